//! Tasks, samples, losses and per-task empirical risks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl LabeledExample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }
}

/// The m-sample observed for a single task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSample {
    pub task_id: usize,
    pub examples: Vec<LabeledExample>,
}

impl TaskSample {
    pub fn new(task_id: usize, examples: Vec<LabeledExample>) -> Self {
        Self { task_id, examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Regression,
    Classification,
}

/// A fixed set of `T` tasks sharing one input dimension.
///
/// Construction validates every invariant, so downstream code can index
/// `tasks[t]` by task id without further checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiTaskDataset {
    tasks: Vec<TaskSample>,
    dim: usize,
    kind: ProblemKind,
}

impl MultiTaskDataset {
    pub fn new(tasks: Vec<TaskSample>, dim: usize, kind: ProblemKind) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::InvalidParameter("a dataset needs at least one task".into()));
        }
        for (t, task) in tasks.iter().enumerate() {
            if task.task_id != t {
                return Err(Error::InvalidParameter(format!(
                    "task ids must be 0..T-1 in order; position {t} holds id {}",
                    task.task_id
                )));
            }
            if task.is_empty() {
                return Err(Error::EmptyTask(t));
            }
            for ex in &task.examples {
                if ex.x.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: ex.x.len(),
                    });
                }
                if !ex.y.is_finite() || ex.x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("dataset"));
                }
                if kind == ProblemKind::Classification && ex.y != 1.0 && ex.y != -1.0 {
                    return Err(Error::InvalidLabel(ex.y));
                }
            }
        }
        Ok(Self { tasks, dim, kind })
    }

    /// Builds a dataset from per-task example lists, assigning ids in order.
    pub fn from_examples(
        per_task: Vec<Vec<LabeledExample>>,
        dim: usize,
        kind: ProblemKind,
    ) -> Result<Self> {
        let tasks = per_task
            .into_iter()
            .enumerate()
            .map(|(t, examples)| TaskSample::new(t, examples))
            .collect();
        Self::new(tasks, dim, kind)
    }

    pub fn tasks(&self) -> &[TaskSample] {
        &self.tasks
    }

    pub fn task(&self, t: usize) -> Result<&TaskSample> {
        self.tasks.get(t).ok_or(Error::UnknownTask {
            task: t,
            tasks: self.tasks.len(),
        })
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn num_examples(&self) -> usize {
        self.tasks.iter().map(TaskSample::len).sum()
    }

    /// The tasks at `ids`, re-indexed 0..ids.len()-1 in the given order.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        let mut tasks = Vec::with_capacity(ids.len());
        for (new_id, &t) in ids.iter().enumerate() {
            let mut task = self.task(t)?.clone();
            task.task_id = new_id;
            tasks.push(task);
        }
        Self::new(tasks, self.dim, self.kind)
    }

    /// Applies `f` to every input vector; the output dimension is `dim`.
    pub fn map_inputs(&self, dim: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let tasks = self
            .tasks
            .iter()
            .map(|task| TaskSample {
                task_id: task.task_id,
                examples: task
                    .examples
                    .iter()
                    .map(|ex| LabeledExample::new(f(&ex.x), ex.y))
                    .collect(),
            })
            .collect();
        Self::new(tasks, dim, self.kind)
    }
}

/// Paired train/test samples over the same task ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: MultiTaskDataset,
    pub test: MultiTaskDataset,
}

impl SplitDataset {
    pub fn new(train: MultiTaskDataset, test: MultiTaskDataset) -> Result<Self> {
        if train.num_tasks() != test.num_tasks() {
            return Err(Error::LengthMismatch {
                expected: train.num_tasks(),
                found: test.num_tasks(),
            });
        }
        if train.dim() != test.dim() {
            return Err(Error::DimensionMismatch {
                expected: train.dim(),
                found: test.dim(),
            });
        }
        Ok(Self { train, test })
    }

    pub fn num_tasks(&self) -> usize {
        self.train.num_tasks()
    }

    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        Self::new(self.train.subset(ids)?, self.test.subset(ids)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    Squared,
    Hinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossKind {
    pub variant: LossVariant,
    /// Upper clip `B`; only the theory harness sets this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_bound: Option<f64>,
}

impl LossKind {
    pub const SQUARED: Self = Self {
        variant: LossVariant::Squared,
        clip_bound: None,
    };
    pub const HINGE: Self = Self {
        variant: LossVariant::Hinge,
        clip_bound: None,
    };

    pub fn clipped(variant: LossVariant, bound: f64) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "clip bound must be positive, got {bound}"
            )));
        }
        Ok(Self {
            variant,
            clip_bound: Some(bound),
        })
    }

    fn check_label(&self, label: f64) -> Result<()> {
        if self.variant == LossVariant::Hinge && label != 1.0 && label != -1.0 {
            return Err(Error::InvalidLabel(label));
        }
        Ok(())
    }

    pub fn loss(&self, prediction: f64, label: f64) -> Result<f64> {
        self.check_label(label)?;
        let raw = match self.variant {
            LossVariant::Squared => (prediction - label).powi(2),
            LossVariant::Hinge => (1.0 - prediction * label).max(0.0),
        };
        Ok(match self.clip_bound {
            Some(b) => raw.min(b),
            None => raw,
        })
    }

    /// A subderivative of the unclipped loss in the prediction argument.
    ///
    /// Hinge takes 0 at the kink `prediction * label == 1`.
    pub fn subderivative(&self, prediction: f64, label: f64) -> Result<f64> {
        self.check_label(label)?;
        Ok(match self.variant {
            LossVariant::Squared => 2.0 * (prediction - label),
            LossVariant::Hinge => {
                if prediction * label < 1.0 {
                    -label
                } else {
                    0.0
                }
            }
        })
    }
}

/// Mean loss of `predictor` over the task's m-sample.
pub fn empirical_risk(
    task: &TaskSample,
    predictor: impl Fn(&[f64]) -> f64,
    kind: LossKind,
) -> Result<f64> {
    if task.is_empty() {
        return Err(Error::EmptyTask(task.task_id));
    }
    let mut total = 0.0;
    for ex in &task.examples {
        total += kind.loss(predictor(&ex.x), ex.y)?;
    }
    Ok(total / task.len() as f64)
}

/// Per-task empirical risks, one entry per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RiskVector(Vec<f64>);

impl RiskVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("risk vector"));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidParameter(format!("negative risk {v}")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

impl AsRef<[f64]> for RiskVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
