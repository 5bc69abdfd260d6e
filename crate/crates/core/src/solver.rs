//! Subgradient minimization of `phi(risks(params)) + Omega(params)`.
//!
//! Constrained configurations take a projected step, regularized ones a
//! proximal step on the penalty. The best iterate seen is returned.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::composition::Composer;
use crate::error::{Error, Result};
use crate::linalg::svt;
use crate::models::{task_gradient, AepConfig, EpConfig, Model, ModelConfig};
use crate::task::{LossKind, MultiTaskDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    Constant,
    InvSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub step0: f64,
    pub step_schedule: StepSchedule,
    /// Divide each step by the norm of the composed subgradient, so `step0`
    /// is a distance in parameter space whatever the scale of the risks.
    pub normalize_step: bool,
    /// Plateau tolerance on the best objective.
    pub tol: f64,
    pub patience: usize,
    /// Recorded for provenance; the method itself draws no randomness.
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step0: 1.0,
            step_schedule: StepSchedule::InvSqrt,
            normalize_step: true,
            tol: 1e-8,
            patience: 50,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.step0 > 0.0) || !self.step0.is_finite() {
            return Err(Error::InvalidParameter(format!("step0 must be positive, got {}", self.step0)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.patience == 0 {
            return Err(Error::InvalidParameter("patience must be at least 1".into()));
        }
        Ok(())
    }

    fn step(&self, k: usize) -> f64 {
        match self.step_schedule {
            StepSchedule::Constant => self.step0,
            StepSchedule::InvSqrt => self.step0 / (k as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// Objective of the last evaluated iterate.
    pub final_objective: f64,
    pub best_objective: f64,
    pub iterations_run: usize,
    /// Objective of every evaluated iterate, in order.
    pub objective_trace: Vec<f64>,
    pub max_risk_trace: Vec<f64>,
    pub mean_risk_trace: Vec<f64>,
    pub converged: bool,
}

impl SolveReport {
    /// Running minimum of the objective trace.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.objective_trace
            .iter()
            .map(|v| {
                best = best.min(*v);
                best
            })
            .collect()
    }

    /// Writes `iteration,objective,max_risk,mean_risk` rows.
    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "iteration,objective,max_risk,mean_risk")?;
        for (i, ((o, mx), mn)) in self
            .objective_trace
            .iter()
            .zip(&self.max_risk_trace)
            .zip(&self.mean_risk_trace)
            .enumerate()
        {
            writeln!(out, "{},{o},{mx},{mn}", i + 1)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Starting point and frozen blocks.
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Defaults to all-zero parameters.
    pub init: Option<Model>,
    /// EP only: keep the shared vector `v0` of the starting point fixed.
    pub freeze_shared: bool,
}

pub fn solve(
    data: &MultiTaskDataset,
    config: &ModelConfig,
    composer: &Composer,
    kind: LossKind,
    cfg: &SolveConfig,
) -> Result<(Model, SolveReport)> {
    solve_with(data, config, composer, kind, cfg, &SolveOptions::default())
}

pub fn solve_with(
    data: &MultiTaskDataset,
    config: &ModelConfig,
    composer: &Composer,
    kind: LossKind,
    cfg: &SolveConfig,
    options: &SolveOptions,
) -> Result<(Model, SolveReport)> {
    config.validate()?;
    cfg.validate()?;
    let tasks = data.num_tasks();
    if tasks == 0 {
        return Err(Error::InvalidParameter("dataset has no tasks".into()));
    }
    if let Composer::WeightedL1(crate::composition::TaskWeights::Prior(p)) = composer {
        if p.len() != tasks {
            return Err(Error::LengthMismatch { expected: tasks, found: p.len() });
        }
    }
    let mut model = match &options.init {
        Some(m) => {
            let same_family = matches!(
                (m, config),
                (Model::Ep(_), ModelConfig::Ep(_)) | (Model::Aep(_), ModelConfig::Aep(_))
            );
            if !same_family {
                return Err(Error::InvalidParameter("initial model family differs from config".into()));
            }
            m.clone()
        }
        None => Model::zeros(config, tasks, data.dim()),
    };
    if options.freeze_shared && !matches!(model, Model::Ep(_)) {
        return Err(Error::InvalidParameter("freeze_shared applies to EP models only".into()));
    }
    if config.is_constrained() && options.init.is_some() {
        model.project_in_place(config)?;
    }

    let mut report = SolveReport {
        final_objective: f64::NAN,
        best_objective: f64::INFINITY,
        iterations_run: 0,
        objective_trace: Vec::new(),
        max_risk_trace: Vec::new(),
        mean_risk_trace: Vec::new(),
        converged: false,
    };
    let mut best_model = model.clone();
    let mut best_trace: Vec<f64> = Vec::new();

    for k in 1..=cfg.max_iters {
        let risks = match model.risk_vector(data, kind) {
            Err(Error::NonFinite(_)) => {
                return Err(Error::Divergence { iteration: k, objective: f64::INFINITY })
            }
            r => r?,
        };
        let penalty = if config.is_constrained() {
            0.0
        } else {
            model.regularizer_value(config)?
        };
        let objective = composer.compose(&risks)? + penalty;
        if !objective.is_finite() {
            return Err(Error::Divergence { iteration: k, objective });
        }
        report.objective_trace.push(objective);
        report.max_risk_trace.push(risks.max());
        report.mean_risk_trace.push(risks.mean());
        report.iterations_run = k;
        if objective < report.best_objective {
            report.best_objective = objective;
            best_model.clone_from(&model);
        }
        best_trace.push(report.best_objective);
        if k > cfg.patience && best_trace[k - 1 - cfg.patience] - report.best_objective < cfg.tol {
            report.converged = true;
            break;
        }
        if k == cfg.max_iters {
            break;
        }

        let weights = composer.subgradient(&risks)?;
        let eta = descend(&mut model, data, kind, &weights, cfg.step(k), cfg.normalize_step, options.freeze_shared)?;
        if config.is_constrained() {
            model.project_in_place(config)?;
        } else {
            prox(&mut model, config, eta, options.freeze_shared)?;
        }
    }
    report.final_objective = *report.objective_trace.last().expect("at least one iteration");
    Ok((best_model, report))
}

/// Takes the step and returns the step size actually applied, which the
/// prox of a regularized model reuses.
fn descend(
    model: &mut Model,
    data: &MultiTaskDataset,
    kind: LossKind,
    weights: &[f64],
    eta: f64,
    normalize: bool,
    freeze_shared: bool,
) -> Result<f64> {
    let grads = weights
        .iter()
        .enumerate()
        .map(|(t, &w)| {
            if w == 0.0 {
                return Ok(None);
            }
            let g = task_gradient(&model.task_weights(t)?, data.task(t)?, kind)?;
            Ok(Some((t, w, g)))
        })
        .collect::<Result<Vec<_>>>()?;
    let grads: Vec<(usize, f64, Vec<f64>)> = grads.into_iter().flatten().collect();
    let eta = if normalize {
        let norm = direction_norm(model, &grads, freeze_shared);
        if norm > 0.0 {
            eta / norm
        } else {
            eta
        }
    } else {
        eta
    };
    for (t, w, g) in grads {
        match model {
            Model::Ep(p) => {
                for (i, gi) in g.iter().enumerate() {
                    if !freeze_shared {
                        p.v0[i] -= eta * w * gi;
                    }
                    p.vt[t][i] -= eta * w * gi;
                }
            }
            Model::Aep(p) => {
                for (wi, gi) in p.w.row_mut(t).iter_mut().zip(&g) {
                    *wi -= eta * w * gi;
                }
            }
        }
    }
    Ok(eta)
}

fn direction_norm(model: &Model, grads: &[(usize, f64, Vec<f64>)], freeze_shared: bool) -> f64 {
    let blocks: f64 = grads.iter().map(|(_, w, g)| w * w * g.iter().map(|x| x * x).sum::<f64>()).sum();
    let shared = match model {
        Model::Ep(p) if !freeze_shared => (0..p.v0.len())
            .map(|i| grads.iter().map(|(_, w, g)| w * g[i]).sum::<f64>().powi(2))
            .sum::<f64>(),
        _ => 0.0,
    };
    (blocks + shared).sqrt()
}

fn prox(model: &mut Model, config: &ModelConfig, eta: f64, freeze_shared: bool) -> Result<()> {
    match (model, config) {
        (Model::Ep(p), ModelConfig::Ep(EpConfig::Regularized { lambda0, lambda1 })) => {
            if !freeze_shared {
                let s = 1.0 / (1.0 + 2.0 * lambda0 * eta);
                p.v0.iter_mut().for_each(|v| *v *= s);
            }
            let s = 1.0 / (1.0 + 2.0 * lambda1 / p.vt.len() as f64 * eta);
            p.vt.iter_mut().flatten().for_each(|v| *v *= s);
            Ok(())
        }
        (Model::Aep(p), ModelConfig::Aep(AepConfig::Regularized { lambda })) => {
            p.w = svt(&p.w, lambda * eta)?;
            Ok(())
        }
        _ => Err(Error::ModeMismatch { expected: "regularized" }),
    }
}
