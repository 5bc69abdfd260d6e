//! Tabular multi-task data: one CSV row per example, grouped by a task
//! column.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, KeyedRng};
use crate::task::{LabeledExample, MultiTaskDataset, ProblemKind, SplitDataset};

/// Which CSV columns hold the task id, the features and the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSchema {
    pub task_column: String,
    pub feature_columns: Vec<String>,
    pub target_column: String,
}

/// Per-task train/test assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum HoldoutRule {
    /// The last `n` rows of each task in file order are test rows.
    LastN { n: usize },
    /// `n` rows per task chosen by a seeded shuffle are test rows.
    Random { n: usize, seed: u64 },
    /// A column whose value is `test` or `train`.
    Column { column: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub features: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableTask {
    pub name: String,
    pub rows: Vec<TableRow>,
    /// Indices into `rows`, ascending.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Tasks in order of first appearance in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTable {
    pub schema: TableSchema,
    pub tasks: Vec<TableTask>,
}

const SPLIT_COLUMN: &str = "split";

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_cell(record: &csv::StringRecord, idx: usize, row: usize, column: &str) -> Result<f64> {
    let raw = record.get(idx).unwrap_or("");
    match raw.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumeric { row, column: column.to_string(), value: raw.to_string() }),
    }
}

/// Reads a CSV export. Rows are numbered from 1, excluding the header.
pub fn load_task_table(path: &Path, schema: &TableSchema, split: &HoldoutRule) -> Result<TaskTable> {
    let mut reader = csv::Reader::from_path(path)?;
    read_task_table(&mut reader, schema, split)
}

pub fn read_task_table<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    schema: &TableSchema,
    split: &HoldoutRule,
) -> Result<TaskTable> {
    if schema.feature_columns.is_empty() {
        return Err(Error::Table("schema declares no feature columns".into()));
    }
    let headers = reader.headers()?.clone();
    let task_idx = column_index(&headers, &schema.task_column)?;
    let target_idx = column_index(&headers, &schema.target_column)?;
    let feature_idx = schema
        .feature_columns
        .iter()
        .map(|c| column_index(&headers, c))
        .collect::<Result<Vec<_>>>()?;
    let split_idx = match split {
        HoldoutRule::Column { column } => Some(column_index(&headers, column)?),
        _ => None,
    };

    let mut tasks: Vec<TableTask> = Vec::new();
    let mut flags: Vec<Vec<bool>> = Vec::new();
    let mut lookup: HashMap<String, usize> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let name = record.get(task_idx).unwrap_or("").trim().to_string();
        if name.is_empty() {
            return Err(Error::Table(format!("row {row}: empty task id")));
        }
        let features = feature_idx
            .iter()
            .zip(&schema.feature_columns)
            .map(|(&j, c)| parse_cell(&record, j, row, c))
            .collect::<Result<Vec<_>>>()?;
        let target = parse_cell(&record, target_idx, row, &schema.target_column)?;
        let is_test = match split_idx {
            Some(j) => match record.get(j).unwrap_or("").trim() {
                "test" => true,
                "train" => false,
                other => {
                    return Err(Error::Table(format!(
                        "row {row}: split value {other:?} is neither train nor test"
                    )))
                }
            },
            None => false,
        };
        let t = *lookup.entry(name.clone()).or_insert_with(|| {
            tasks.push(TableTask { name, rows: Vec::new(), train: Vec::new(), test: Vec::new() });
            flags.push(Vec::new());
            tasks.len() - 1
        });
        tasks[t].rows.push(TableRow { features, target });
        flags[t].push(is_test);
    }
    if tasks.is_empty() {
        return Err(Error::Table("no data rows".into()));
    }

    for (t, (task, flag)) in tasks.iter_mut().zip(flags.iter_mut()).enumerate() {
        let m = task.rows.len();
        match split {
            HoldoutRule::LastN { n } => {
                for (i, f) in flag.iter_mut().enumerate() {
                    *f = i + n >= m;
                }
            }
            HoldoutRule::Random { n, seed } => {
                let mut order: Vec<usize> = (0..m).collect();
                order.shuffle(&mut KeyedRng::new(*seed, &[t as u64, purpose::SPLIT]));
                for &i in order.iter().take(*n) {
                    flag[i] = true;
                }
            }
            HoldoutRule::Column { .. } => {}
        }
        task.train = (0..m).filter(|&i| !flag[i]).collect();
        task.test = (0..m).filter(|&i| flag[i]).collect();
        if task.train.is_empty() {
            return Err(Error::EmptySplit { task: task.name.clone(), split: "train" });
        }
        if task.test.is_empty() {
            return Err(Error::EmptySplit { task: task.name.clone(), split: "test" });
        }
    }
    Ok(TaskTable { schema: schema.clone(), tasks })
}

impl TaskTable {
    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn dim(&self) -> usize {
        self.schema.feature_columns.len()
    }

    /// Regression tasks, ids in table order.
    pub fn to_split_dataset(&self) -> Result<SplitDataset> {
        let pick = |task: &TableTask, idx: &[usize]| -> Vec<LabeledExample> {
            idx.iter()
                .map(|&i| LabeledExample::new(task.rows[i].features.clone(), task.rows[i].target))
                .collect()
        };
        let train = self.tasks.iter().map(|t| pick(t, &t.train)).collect();
        let test = self.tasks.iter().map(|t| pick(t, &t.test)).collect();
        SplitDataset::new(
            MultiTaskDataset::from_examples(train, self.dim(), ProblemKind::Regression)?,
            MultiTaskDataset::from_examples(test, self.dim(), ProblemKind::Regression)?,
        )
    }

    /// Writes the schema columns plus a `split` column, so that
    /// [`HoldoutRule::Column`] reproduces the table on reload.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        let mut header = vec![self.schema.task_column.clone()];
        header.extend(self.schema.feature_columns.iter().cloned());
        header.push(self.schema.target_column.clone());
        header.push(SPLIT_COLUMN.to_string());
        w.write_record(&header)?;
        for task in &self.tasks {
            for (i, row) in task.rows.iter().enumerate() {
                let mut rec = vec![task.name.clone()];
                rec.extend(row.features.iter().map(|v| v.to_string()));
                rec.push(row.target.to_string());
                let split = if task.test.binary_search(&i).is_ok() { "test" } else { "train" };
                rec.push(split.to_string());
                w.write_record(&rec)?;
            }
        }
        Ok(())
    }

    /// The rule that reloads a table written by [`TaskTable::write_csv`].
    pub fn round_trip_rule() -> HoldoutRule {
        HoldoutRule::Column { column: SPLIT_COLUMN.to_string() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(features: &[&str]) -> TableSchema {
        TableSchema {
            task_column: "task".into(),
            feature_columns: features.iter().map(|s| s.to_string()).collect(),
            target_column: "y".into(),
        }
    }

    fn read(text: &str, schema: &TableSchema, rule: &HoldoutRule) -> Result<TaskTable> {
        read_task_table(&mut csv::Reader::from_reader(text.as_bytes()), schema, rule)
    }

    fn toy() -> String {
        let mut s = String::from("task,a,b,y\n");
        for t in ["s1", "s2", "s3"] {
            for i in 0..4 {
                s.push_str(&format!("{t},{i},{},{}\n", i * 2, i as f64 + 0.5));
            }
        }
        s
    }

    #[test]
    fn holdout_last_n_counts() {
        let table = read(&toy(), &schema(&["a", "b"]), &HoldoutRule::LastN { n: 1 }).unwrap();
        assert_eq!(table.num_tasks(), 3);
        for task in &table.tasks {
            assert_eq!(task.train, vec![0, 1, 2]);
            assert_eq!(task.test, vec![3]);
        }
        let data = table.to_split_dataset().unwrap();
        assert_eq!(data.test.task(1).unwrap().examples[0].y, 3.5);
        assert_eq!(data.train.dim(), 2);
    }

    #[test]
    fn random_holdout_is_seeded() {
        let rule = HoldoutRule::Random { n: 2, seed: 4 };
        let a = read(&toy(), &schema(&["a"]), &rule).unwrap();
        let b = read(&toy(), &schema(&["a"]), &rule).unwrap();
        assert_eq!(a, b);
        assert!(a.tasks.iter().all(|t| t.test.len() == 2 && t.train.len() == 2));
    }

    #[test]
    fn error_paths() {
        let bad = "task,a,y\nx,1,2\nx,oops,3\n";
        match read(bad, &schema(&["a"]), &HoldoutRule::LastN { n: 1 }) {
            Err(Error::NonNumeric { row, column, value }) => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "a", "oops"));
            }
            other => panic!("{other:?}"),
        }
        let bad_target = "task,a,y\nx,1,2\nx,1,n/a\n";
        assert!(matches!(
            read(bad_target, &schema(&["a"]), &HoldoutRule::LastN { n: 1 }),
            Err(Error::NonNumeric { row: 2, .. })
        ));
        assert!(matches!(
            read("task,a\nx,1\n", &schema(&["a"]), &HoldoutRule::LastN { n: 1 }),
            Err(Error::MissingColumn(c)) if c == "y"
        ));
        assert!(matches!(
            read("task,a,y\nx,1,2\n", &schema(&["a"]), &HoldoutRule::LastN { n: 1 }),
            Err(Error::EmptySplit { split: "train", .. })
        ));
        assert!(matches!(
            read("task,a,y\nx,1,2\n", &schema(&["a"]), &HoldoutRule::LastN { n: 0 }),
            Err(Error::EmptySplit { split: "test", .. })
        ));
    }

    #[test]
    fn computer_shaped_table() {
        let features: Vec<String> = (0..13).map(|j| format!("f{j}")).collect();
        let mut s = format!("subject,{},rating\n", features.join(","));
        for subject in 0..189 {
            for computer in 0..20 {
                let bits: Vec<String> = (0..13).map(|j| ((computer >> (j % 5)) & 1).to_string()).collect();
                s.push_str(&format!("{subject},{},{}\n", bits.join(","), (subject + computer) % 11));
            }
        }
        let schema = TableSchema {
            task_column: "subject".into(),
            feature_columns: features,
            target_column: "rating".into(),
        };
        let table = read(&s, &schema, &HoldoutRule::LastN { n: 4 }).unwrap();
        assert_eq!(table.num_tasks(), 189);
        assert!(table.tasks.iter().all(|t| t.train.len() == 16 && t.test.len() == 4));
    }

    #[test]
    fn write_then_reload_reproduces_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let table = read(&toy(), &schema(&["a", "b"]), &HoldoutRule::Random { n: 1, seed: 9 }).unwrap();
        table.write_csv(&path).unwrap();
        let back = load_task_table(&path, &table.schema, &TaskTable::round_trip_rule()).unwrap();
        assert_eq!(back, table);
    }
}
