//! The JSON experiment description.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::composition::{default_alpha, Composer};
use crate::data::{HoldoutRule, TableSchema, TournamentSpec, TwoModesConfig};
use crate::error::{Error, Result};
use crate::evaluation::MetricKind;
use crate::models::{AepConfig, EpConfig, ModelConfig};
use crate::solver::SolveConfig;
use crate::theory::{FiniteEnvironment, TailBoundConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TwoModes,
    TaskTable,
    Mnist,
    Theory,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::TwoModes => "two_modes",
            ExperimentKind::TaskTable => "task_table",
            ExperimentKind::Mnist => "mnist",
            ExperimentKind::Theory => "theory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Ep,
    Aep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Regularized,
    Constrained,
}

/// A composer as written in a config: `"l1"`, `"l2"`, `"minimax"` or
/// `{"alpha_minimax": level}`, where alpha is derived from the level and
/// the number of training tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposerSpec {
    L1,
    L2,
    Minimax,
    AlphaMinimax(f64),
}

impl ComposerSpec {
    pub fn label(&self) -> String {
        match self {
            ComposerSpec::L1 => "l1".into(),
            ComposerSpec::L2 => "l2".into(),
            ComposerSpec::Minimax => "minimax".into(),
            ComposerSpec::AlphaMinimax(level) => format!("alpha_minimax({level})"),
        }
    }

    pub fn build(&self, tasks: usize) -> Result<Composer> {
        Ok(match self {
            ComposerSpec::L1 => Composer::mean(),
            ComposerSpec::L2 => Composer::L2,
            ComposerSpec::Minimax => Composer::Max,
            ComposerSpec::AlphaMinimax(level) => Composer::alpha_minimax(default_alpha(tasks, *level)?)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoModesSettings {
    pub data: TwoModesConfig,
    /// New tasks for the learning-to-learn test; defaults to the number of
    /// training tasks.
    pub ltl_tasks: Option<usize>,
}

impl Default for TwoModesSettings {
    fn default() -> Self {
        Self { data: TwoModesConfig::default(), ltl_tasks: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSettings {
    /// CSV path, relative to the config file.
    pub path: PathBuf,
    pub schema: TableSchema,
    pub holdout: HoldoutRule,
    /// Task-level cross-validation folds for the learning-to-learn test.
    #[serde(default)]
    pub folds: Option<usize>,
    #[serde(default = "default_table_metric")]
    pub metric: MetricKind,
}

fn default_table_metric() -> MetricKind {
    MetricKind::Rmse
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DigitSource {
    /// IDX files, relative to the config file.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
    /// Generated digit-like images.
    Synthetic {
        train_per_class: usize,
        test_per_class: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MnistSettings {
    pub source: DigitSource,
    #[serde(default)]
    pub tournament: TournamentSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheorySettings {
    pub environment: FiniteEnvironment,
    pub tasks: Vec<usize>,
    pub bound: TailBoundConfig,
    /// Gamma values for the direct-versus-Markov comparison table.
    pub comparison_gammas: Vec<f64>,
}

impl Default for TheorySettings {
    fn default() -> Self {
        Self {
            environment: FiniteEnvironment::default(),
            tasks: vec![25, 50, 100],
            bound: TailBoundConfig::default(),
            comparison_gammas: vec![1.0, 1.5, 2.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_model")]
    pub model: ModelFamily,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Shared-parameter bound for constrained EP.
    #[serde(default)]
    pub tau0: Option<f64>,
    /// Shared-parameter penalty for regularized EP.
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub composers: Vec<ComposerSpec>,
    /// Swept capacity: `tau1`, `lambda1`, the trace-norm radius or its
    /// penalty, depending on model and mode.
    #[serde(default)]
    pub capacity_grid: Vec<f64>,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolveConfig,
    /// Refit EP task blocks with the shared block fixed after each solve.
    #[serde(default = "yes")]
    pub refine_task_blocks: bool,
    #[serde(default)]
    pub two_modes: Option<TwoModesSettings>,
    #[serde(default)]
    pub table: Option<TableSettings>,
    #[serde(default)]
    pub mnist: Option<MnistSettings>,
    #[serde(default)]
    pub theory: Option<TheorySettings>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_model() -> ModelFamily {
    ModelFamily::Ep
}

fn default_mode() -> Mode {
    Mode::Constrained
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                invalid(inner.to_string())
            } else {
                invalid(format!("{path}: {inner}"))
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Model configuration at the first grid point; the runner substitutes
    /// each capacity in turn.
    pub fn base_model_config(&self) -> Result<ModelConfig> {
        let c = self.capacity_grid.first().copied().unwrap_or(1.0);
        Ok(match (self.model, self.mode) {
            (ModelFamily::Ep, Mode::Constrained) => ModelConfig::Ep(EpConfig::Constrained {
                tau0: self.tau0.ok_or_else(|| invalid("tau0: required for constrained EP"))?,
                tau1: c,
            }),
            (ModelFamily::Ep, Mode::Regularized) => ModelConfig::Ep(EpConfig::Regularized {
                lambda0: self.lambda0.ok_or_else(|| invalid("lambda0: required for regularized EP"))?,
                lambda1: c,
            }),
            (ModelFamily::Aep, Mode::Constrained) => ModelConfig::Aep(AepConfig::Constrained { radius: c }),
            (ModelFamily::Aep, Mode::Regularized) => ModelConfig::Aep(AepConfig::Regularized { lambda: c }),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let kind = self.experiment;
        if self.replicates == 0 {
            return Err(invalid("replicates: must be at least 1"));
        }
        self.solver.validate().map_err(|e| invalid(format!("solver: {e}")))?;
        let sections = [
            ("two_modes", self.two_modes.is_some(), ExperimentKind::TwoModes),
            ("table", self.table.is_some(), ExperimentKind::TaskTable),
            ("mnist", self.mnist.is_some(), ExperimentKind::Mnist),
            ("theory", self.theory.is_some(), ExperimentKind::Theory),
        ];
        for (name, present, owner) in sections {
            if present && owner != kind {
                return Err(invalid(format!("{name}: section does not apply to experiment {}", kind.label())));
            }
        }
        if kind == ExperimentKind::Theory {
            let t = self.theory.clone().unwrap_or_default();
            t.environment.validate().map_err(|e| invalid(format!("theory.environment: {e}")))?;
            if t.tasks.is_empty() || t.tasks.contains(&0) {
                return Err(invalid("theory.tasks: need a nonempty list of positive task counts"));
            }
            if !(t.bound.delta > 0.0 && t.bound.delta < 1.0) {
                return Err(invalid("theory.bound.delta: must lie in (0, 1)"));
            }
            if t.comparison_gammas.iter().any(|g| !(*g > 0.0)) {
                return Err(invalid("theory.comparison_gammas: values must be positive"));
            }
            return Ok(());
        }
        if self.composers.is_empty() {
            return Err(invalid("composers: must be nonempty"));
        }
        for c in &self.composers {
            if let ComposerSpec::AlphaMinimax(level) = c {
                if !(*level > 0.0 && *level < 1.0) {
                    return Err(invalid(format!("composers: alpha_minimax level must lie in (0, 1), got {level}")));
                }
            }
        }
        if self.capacity_grid.is_empty() {
            return Err(invalid("capacity_grid: must be nonempty"));
        }
        if self.capacity_grid.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(invalid("capacity_grid: values must be finite and nonnegative"));
        }
        let constrained = self.mode == Mode::Constrained;
        if constrained && self.capacity_grid.iter().any(|c| *c <= 0.0) {
            return Err(invalid("capacity_grid: constrained radii must be positive"));
        }
        self.base_model_config()?.validate().map_err(|e| invalid(format!("model: {e}")))?;
        match kind {
            ExperimentKind::TwoModes => {
                let s = self.two_modes.clone().unwrap_or_default();
                s.data.validate().map_err(|e| invalid(format!("two_modes.data: {e}")))?;
                if s.data.seed != 0 {
                    return Err(invalid("two_modes.data.seed: set the seed at the top level"));
                }
                if s.ltl_tasks == Some(0) {
                    return Err(invalid("two_modes.ltl_tasks: must be at least 1"));
                }
            }
            ExperimentKind::TaskTable => {
                let t = self.table.as_ref().ok_or_else(|| invalid("table: required for task_table"))?;
                if t.metric == MetricKind::Multiclass01 {
                    return Err(invalid("table.metric: multiclass_01 does not apply to regression tables"));
                }
                match t.folds {
                    Some(k) if k < 2 => return Err(invalid("table.folds: must be at least 2")),
                    None if self.replicates > 1 => {
                        return Err(invalid("replicates: without table.folds every replicate is identical; use 1"))
                    }
                    _ => {}
                }
            }
            ExperimentKind::Mnist => {
                let m = self.mnist.as_ref().ok_or_else(|| invalid("mnist: required for mnist"))?;
                m.tournament.validate().map_err(|e| invalid(format!("mnist.tournament: {e}")))?;
                if self.model != ModelFamily::Aep {
                    return Err(invalid("model: the tournament uses aep"));
                }
                if self.replicates != 1 {
                    return Err(invalid("replicates: the digit data is fixed; use 1"));
                }
                if let DigitSource::Synthetic { train_per_class, test_per_class, .. } = m.source {
                    if train_per_class == 0 || test_per_class == 0 {
                        return Err(invalid("mnist.source.synthetic: per-class counts must be positive"));
                    }
                }
            }
            ExperimentKind::Theory => unreachable!("handled above"),
        }
        Ok(())
    }
}
