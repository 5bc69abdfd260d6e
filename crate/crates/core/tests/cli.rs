use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn mtl(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mtl"));
    cmd.args(args).env_remove("MTL_OUTPUT_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn mtl")
}

fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn small_two_modes(replicates: usize) -> Value {
    json!({
        "experiment": "two_modes",
        "tau0": 10.0,
        "composers": ["l1", {"alpha_minimax": 0.2}],
        "capacity_grid": [2.0],
        "replicates": replicates,
        "seed": 3,
        "solver": {"max_iters": 200},
        "two_modes": {"data": {"n_type1": 8, "n_type2": 2}},
        "output_dir": "out"
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn results(dir: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(dir.join("results.csv")).unwrap();
    reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn run_writes_a_row_per_composer_replicate_and_metric() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_two_modes(3));
    let out = mtl(&["run", config.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out_dir = dir.path().join("out");
    let header = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(
        header.lines().next().unwrap(),
        "experiment,composer,capacity,replicate,metric_kind,max_value,mean_value,std,wall_time_ms"
    );
    let rows = results(&out_dir);
    let per_replicate: Vec<_> = rows.iter().filter(|r| r[3] != "all").collect();
    assert!(per_replicate.len() >= 2 * 3 * 2);
    for composer in ["l1", "alpha_minimax(0.2)"] {
        for rep in ["0", "1", "2"] {
            assert!(per_replicate.iter().any(|r| r[1] == composer && r[3] == rep && r[4] == "ltl_l2_risk"));
        }
    }
    for r in &rows {
        assert_eq!(r[0], "two_modes");
        let (max, mean): (f64, f64) = (r[5].parse().unwrap(), r[6].parse().unwrap());
        assert!(max >= mean && mean >= 0.0);
        assert_eq!(r[7].is_empty(), r[3] != "all");
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["config"]["replicates"], 3);
}

#[test]
fn malformed_config_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut value = small_two_modes(1);
    value["replicates"] = json!("three");
    let out = mtl(&["run", write_config(dir.path(), &value).to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("replicates"), "{}", stderr(&out));

    let mut value = small_two_modes(1);
    value["two_modes"]["data"]["sigma_tsk"] = json!(1.0);
    let out = mtl(&["run", write_config(dir.path(), &value).to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sigma_tsk"), "{}", stderr(&out));

    let mut value = small_two_modes(1);
    value["composers"] = json!([{"alpha_minimax": 1.5}]);
    let out = mtl(&["run", write_config(dir.path(), &value).to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn missing_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let value = json!({
        "experiment": "task_table",
        "model": "aep",
        "composers": ["l1"],
        "capacity_grid": [10.0],
        "table": {
            "path": "absent.csv",
            "schema": {"task_column": "id", "feature_columns": ["x"], "target_column": "y"},
            "holdout": {"rule": "last_n", "n": 1}
        }
    });
    let out = mtl(&["run", write_config(dir.path(), &value).to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn divergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("huge.csv"), "id,x,y\na,1e150,1\na,1e150,2\nb,1,1\nb,2,2\n").unwrap();
    let value = json!({
        "experiment": "task_table",
        "model": "ep",
        "mode": "regularized",
        "lambda0": 1.0,
        "solver": {"normalize_step": false},
        "composers": ["l1"],
        "capacity_grid": [1.0],
        "table": {
            "path": "huge.csv",
            "schema": {"task_column": "id", "feature_columns": ["x"], "target_column": "y"},
            "holdout": {"rule": "last_n", "n": 1}
        }
    });
    let out = mtl(&["run", write_config(dir.path(), &value).to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn output_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_two_modes(1));
    let config = config.to_str().unwrap();
    let from_env = dir.path().join("env");
    let from_flag = dir.path().join("flag");

    let out = mtl(&["run", config], &[("MTL_OUTPUT_DIR", &from_env)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(from_env.join("results.csv").exists());
    assert!(!dir.path().join("out").exists());

    let out = mtl(&["run", config, "--output-dir", from_flag.to_str().unwrap()], &[("MTL_OUTPUT_DIR", &from_env)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(from_flag.join("results.csv").exists());
}

#[test]
fn trace_flag_writes_one_trace_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_two_modes(2));
    let out = mtl(&["run", config.to_str().unwrap(), "--trace", "--workers", "2"], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let traces = dir.path().join("out").join("traces");
    let mut names: Vec<String> =
        std::fs::read_dir(&traces).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 4, "{names:?}");
    let text = std::fs::read_to_string(traces.join(&names[0])).unwrap();
    assert!(text.lines().count() > 1);
}

#[test]
fn repeated_runs_match_except_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_two_modes(2));
    let strip = |d: &Path| -> Vec<Vec<String>> {
        results(d).into_iter().map(|mut r| {
            r.pop();
            r
        }).collect()
    };
    let mut seen = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "3")] {
        let target = dir.path().join(name);
        let out =
            mtl(&["run", config.to_str().unwrap(), "--output-dir", target.to_str().unwrap(), "--workers", workers], &[]);
        assert!(out.status.success(), "{}", stderr(&out));
        seen.push(strip(&target));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn verify_runs_a_named_suite() {
    let out = mtl(&["verify", "composition"], &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0 failed"), "{text}");

    let out = mtl(&["verify", "everything"], &[]);
    assert_eq!(out.status.code(), Some(2));
}
