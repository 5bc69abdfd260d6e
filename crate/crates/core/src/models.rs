//! The two linear multi-task model families.
//!
//! * **EP**: task `t` predicts with `v0 + v_t`, a shared vector plus a
//!   task-specific offset, under squared-norm penalties or ball constraints
//!   on each block.
//! * **AEP**: task `t` predicts with row `t` of a `T x d` matrix `W` under a
//!   trace-norm penalty or trace-norm ball constraint, which pulls the task
//!   predictors toward a shared low-dimensional subspace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{project_l2_ball_in_place, project_trace_ball, trace_norm, Matrix};
use crate::task::{dot, empirical_risk, LossKind, MultiTaskDataset, RiskVector, TaskSample};

#[derive(Debug, Clone, PartialEq)]
pub struct EpParams {
    pub v0: Vec<f64>,
    pub vt: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EpConfig {
    Regularized { lambda0: f64, lambda1: f64 },
    Constrained { tau0: f64, tau1: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AepParams {
    pub w: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AepConfig {
    Regularized { lambda: f64 },
    Constrained { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Ep(EpParams),
    Aep(AepParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelConfig {
    Ep(EpConfig),
    Aep(AepConfig),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )));
    }
    Ok(())
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelConfig::Ep(EpConfig::Regularized { lambda0, lambda1 }) => {
                positive("lambda0", lambda0)?;
                positive("lambda1", lambda1)
            }
            ModelConfig::Ep(EpConfig::Constrained { tau0, tau1 }) => {
                positive("tau0", tau0)?;
                positive("tau1", tau1)
            }
            ModelConfig::Aep(AepConfig::Regularized { lambda }) => positive("lambda", lambda),
            ModelConfig::Aep(AepConfig::Constrained { radius }) => positive("radius", radius),
        }
    }

    pub fn is_constrained(&self) -> bool {
        matches!(
            self,
            ModelConfig::Ep(EpConfig::Constrained { .. })
                | ModelConfig::Aep(AepConfig::Constrained { .. })
        )
    }
}

impl Model {
    /// All-zero parameters, feasible for every constraint set.
    pub fn zeros(config: &ModelConfig, tasks: usize, dim: usize) -> Self {
        match config {
            ModelConfig::Ep(_) => Model::Ep(EpParams {
                v0: vec![0.0; dim],
                vt: vec![vec![0.0; dim]; tasks],
            }),
            ModelConfig::Aep(_) => Model::Aep(AepParams {
                w: Matrix::zeros(tasks, dim),
            }),
        }
    }

    pub fn num_tasks(&self) -> usize {
        match self {
            Model::Ep(p) => p.vt.len(),
            Model::Aep(p) => p.w.rows(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Ep(p) => p.v0.len(),
            Model::Aep(p) => p.w.cols(),
        }
    }

    /// The effective linear predictor of task `t`.
    pub fn task_weights(&self, t: usize) -> Result<Vec<f64>> {
        self.check_task(t)?;
        Ok(match self {
            Model::Ep(p) => p.v0.iter().zip(&p.vt[t]).map(|(a, b)| a + b).collect(),
            Model::Aep(p) => p.w.row(t).to_vec(),
        })
    }

    fn check_task(&self, t: usize) -> Result<()> {
        if t >= self.num_tasks() {
            return Err(Error::UnknownTask {
                task: t,
                tasks: self.num_tasks(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, t: usize, x: &[f64]) -> Result<f64> {
        self.check_task(t)?;
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(match self {
            Model::Ep(p) => dot(&p.v0, x) + dot(&p.vt[t], x),
            Model::Aep(p) => dot(p.w.row(t), x),
        })
    }

    fn check_data(&self, data: &MultiTaskDataset) -> Result<()> {
        if data.num_tasks() != self.num_tasks() {
            return Err(Error::LengthMismatch {
                expected: self.num_tasks(),
                found: data.num_tasks(),
            });
        }
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: data.dim(),
            });
        }
        Ok(())
    }

    pub fn risk_vector(&self, data: &MultiTaskDataset, kind: LossKind) -> Result<RiskVector> {
        self.check_data(data)?;
        let risks = data
            .tasks()
            .iter()
            .map(|task| {
                let w = self.task_weights(task.task_id)?;
                empirical_risk(task, |x| dot(&w, x), kind)
            })
            .collect::<Result<Vec<_>>>()?;
        RiskVector::new(risks)
    }

    pub fn regularizer_value(&self, config: &ModelConfig) -> Result<f64> {
        match (self, config) {
            (Model::Ep(p), ModelConfig::Ep(EpConfig::Regularized { lambda0, lambda1 })) => {
                let t = p.vt.len() as f64;
                let tasks: f64 = p.vt.iter().map(|v| dot(v, v)).sum();
                Ok(lambda0 * dot(&p.v0, &p.v0) + lambda1 / t * tasks)
            }
            (Model::Aep(p), ModelConfig::Aep(AepConfig::Regularized { lambda })) => {
                Ok(lambda * trace_norm(&p.w)?)
            }
            (_, c) if c.is_constrained() => Err(Error::ModeMismatch {
                expected: "regularized",
            }),
            _ => Err(Error::InvalidParameter("model and config families differ".into())),
        }
    }

    /// Euclidean projection onto the constraint set of `config`.
    pub fn project_feasible(&self, config: &ModelConfig) -> Result<Model> {
        let mut out = self.clone();
        out.project_in_place(config)?;
        Ok(out)
    }

    pub(crate) fn project_in_place(&mut self, config: &ModelConfig) -> Result<()> {
        match (self, config) {
            (Model::Ep(p), ModelConfig::Ep(EpConfig::Constrained { tau0, tau1 })) => {
                positive("tau0", *tau0)?;
                positive("tau1", *tau1)?;
                project_l2_ball_in_place(&mut p.v0, *tau0);
                for v in &mut p.vt {
                    project_l2_ball_in_place(v, *tau1);
                }
                Ok(())
            }
            (Model::Aep(p), ModelConfig::Aep(AepConfig::Constrained { radius })) => {
                p.w = project_trace_ball(&p.w, *radius)?;
                Ok(())
            }
            (_, c) if !c.is_constrained() => Err(Error::ModeMismatch {
                expected: "constrained",
            }),
            _ => Err(Error::InvalidParameter("model and config families differ".into())),
        }
    }

    /// Whether every constraint of `config` holds within `tol`.
    pub fn is_feasible(&self, config: &ModelConfig, tol: f64) -> Result<bool> {
        match (self, config) {
            (Model::Ep(p), ModelConfig::Ep(EpConfig::Constrained { tau0, tau1 })) => {
                Ok(crate::task::norm(&p.v0) <= tau0 + tol
                    && p.vt.iter().all(|v| crate::task::norm(v) <= tau1 + tol))
            }
            (Model::Aep(p), ModelConfig::Aep(AepConfig::Constrained { radius })) => {
                Ok(trace_norm(&p.w)? <= radius + tol)
            }
            _ => Ok(true),
        }
    }

    /// Direction `d risk_t / d params`: the per-task gradient placed in the
    /// blocks that task `t` depends on, zero elsewhere.
    pub fn risk_gradient_contribution(
        &self,
        data: &MultiTaskDataset,
        kind: LossKind,
        t: usize,
    ) -> Result<Model> {
        self.check_data(data)?;
        let g = task_gradient(&self.task_weights(t)?, data.task(t)?, kind)?;
        let mut dir = Model::zeros(&self.family_config(), self.num_tasks(), self.dim());
        match &mut dir {
            Model::Ep(p) => {
                p.v0.clone_from(&g);
                p.vt[t] = g;
            }
            Model::Aep(p) => p.w.row_mut(t).copy_from_slice(&g),
        }
        Ok(dir)
    }

    fn family_config(&self) -> ModelConfig {
        match self {
            Model::Ep(_) => ModelConfig::Ep(EpConfig::Constrained { tau0: 1.0, tau1: 1.0 }),
            Model::Aep(_) => ModelConfig::Aep(AepConfig::Constrained { radius: 1.0 }),
        }
    }

    /// Flattened parameters, for distance checks in tests and tooling.
    pub fn flat(&self) -> Vec<f64> {
        match self {
            Model::Ep(p) => p.v0.iter().chain(p.vt.iter().flatten()).copied().collect(),
            Model::Aep(p) => p.w.as_slice().to_vec(),
        }
    }
}

/// `(1/m) sum_i loss'(<w, x_i>, y_i) x_i` for one task.
pub(crate) fn task_gradient(w: &[f64], task: &TaskSample, kind: LossKind) -> Result<Vec<f64>> {
    if task.is_empty() {
        return Err(Error::EmptyTask(task.task_id));
    }
    let mut g = vec![0.0; w.len()];
    for ex in &task.examples {
        let d = kind.subderivative(dot(w, &ex.x), ex.y)?;
        if d != 0.0 {
            for (gi, xi) in g.iter_mut().zip(&ex.x) {
                *gi += d * xi;
            }
        }
    }
    let scale = 1.0 / task.len() as f64;
    g.iter_mut().for_each(|v| *v *= scale);
    Ok(g)
}

/// On-disk model checkpoint.
///
/// ```json
/// {"kind":"ep","tasks":2,"dim":2,"v0":[1,0],"vt":[0,1,0,0]}
/// {"kind":"aep","tasks":2,"dim":2,"w":[2,0,0,1]}
/// ```
///
/// `vt` and `w` are row-major `tasks x dim` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Checkpoint {
    Ep {
        tasks: usize,
        dim: usize,
        v0: Vec<f64>,
        vt: Vec<f64>,
    },
    Aep {
        tasks: usize,
        dim: usize,
        w: Vec<f64>,
    },
}

impl From<&Model> for Checkpoint {
    fn from(m: &Model) -> Self {
        match m {
            Model::Ep(p) => Checkpoint::Ep {
                tasks: p.vt.len(),
                dim: p.v0.len(),
                v0: p.v0.clone(),
                vt: p.vt.iter().flatten().copied().collect(),
            },
            Model::Aep(p) => Checkpoint::Aep {
                tasks: p.w.rows(),
                dim: p.w.cols(),
                w: p.w.as_slice().to_vec(),
            },
        }
    }
}

impl TryFrom<Checkpoint> for Model {
    type Error = Error;

    fn try_from(c: Checkpoint) -> Result<Self> {
        match c {
            Checkpoint::Ep { tasks, dim, v0, vt } => {
                if v0.len() != dim {
                    return Err(Error::LengthMismatch {
                        expected: dim,
                        found: v0.len(),
                    });
                }
                if vt.len() != tasks * dim {
                    return Err(Error::LengthMismatch {
                        expected: tasks * dim,
                        found: vt.len(),
                    });
                }
                let vt = if dim == 0 {
                    vec![Vec::new(); tasks]
                } else {
                    vt.chunks(dim).map(<[f64]>::to_vec).collect()
                };
                Ok(Model::Ep(EpParams { v0, vt }))
            }
            Checkpoint::Aep { tasks, dim, w } => Ok(Model::Aep(AepParams {
                w: Matrix::from_vec(tasks, dim, w)?,
            })),
        }
    }
}

impl Model {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Checkpoint::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<Checkpoint>(s)?.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd;
    use crate::rng::KeyedRng;
    use crate::task::{LabeledExample, ProblemKind};
    use rand::Rng;

    fn ep(v0: Vec<f64>, vt: Vec<Vec<f64>>) -> Model {
        Model::Ep(EpParams { v0, vt })
    }

    fn random_data(tasks: usize, m: usize, d: usize, key: u64, classification: bool) -> MultiTaskDataset {
        let mut rng = KeyedRng::new(31, &[key]);
        let per_task = (0..tasks)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let y = if classification {
                            if rng.random_bool(0.5) { 1.0 } else { -1.0 }
                        } else {
                            rng.random_range(-2.0..2.0)
                        };
                        LabeledExample::new(x, y)
                    })
                    .collect()
            })
            .collect();
        let kind = if classification { ProblemKind::Classification } else { ProblemKind::Regression };
        MultiTaskDataset::from_examples(per_task, d, kind).unwrap()
    }

    fn random_model(family: &ModelConfig, tasks: usize, d: usize, key: u64) -> Model {
        let mut rng = KeyedRng::new(37, &[key]);
        let mut m = Model::zeros(family, tasks, d);
        match &mut m {
            Model::Ep(p) => {
                p.v0.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
                p.vt.iter_mut().flatten().for_each(|v| *v = rng.random_range(-1.0..1.0));
            }
            Model::Aep(p) => p.w.as_mut_slice().iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0)),
        }
        m
    }

    const EP_REG: ModelConfig = ModelConfig::Ep(EpConfig::Regularized { lambda0: 2.0, lambda1: 1.0 });
    const AEP_C: ModelConfig = ModelConfig::Aep(AepConfig::Constrained { radius: 2.0 });

    #[test]
    fn predict_examples() {
        let m = ep(vec![1.0, 0.0], vec![vec![0.0, 1.0]]);
        assert_eq!(m.predict(0, &[1.0, 1.0]).unwrap(), 2.0);
        let shared = ep(vec![1.0, -1.0], vec![vec![0.0; 2]; 3]);
        for t in 0..3 {
            assert_eq!(shared.predict(t, &[2.0, 1.0]).unwrap(), 1.0);
        }
        let a = Model::Aep(AepParams { w: Matrix::from_rows(&[vec![2.0, 0.0]]).unwrap() });
        assert_eq!(a.predict(0, &[3.0, 1.0]).unwrap(), 6.0);
        assert!(matches!(m.predict(1, &[1.0, 1.0]), Err(Error::UnknownTask { .. })));
        assert!(matches!(m.predict(0, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn risk_vector_examples() {
        let data = random_data(3, 4, 2, 0, false);
        let zero = Model::zeros(&EP_REG, 3, 2);
        let r = zero.risk_vector(&data, LossKind::SQUARED).unwrap();
        for (t, task) in data.tasks().iter().enumerate() {
            let my: f64 = task.examples.iter().map(|e| e.y * e.y).sum::<f64>() / 4.0;
            assert!((r.values()[t] - my).abs() < 1e-12);
        }
        // per-task loop oracle
        let m = random_model(&EP_REG, 3, 2, 1);
        let r = m.risk_vector(&data, LossKind::SQUARED).unwrap();
        for (t, task) in data.tasks().iter().enumerate() {
            let mut s = 0.0;
            for e in &task.examples {
                s += (m.predict(t, &e.x).unwrap() - e.y).powi(2);
            }
            assert!((r.values()[t] - s / task.len() as f64).abs() < 1e-12);
        }
        assert!(matches!(
            Model::zeros(&EP_REG, 2, 2).risk_vector(&data, LossKind::SQUARED),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn interpolating_model_has_zero_risk() {
        let data = MultiTaskDataset::from_examples(
            vec![
                vec![LabeledExample::new(vec![1.0, 0.0], 2.0), LabeledExample::new(vec![0.0, 1.0], -1.0)],
                vec![LabeledExample::new(vec![1.0, 1.0], 0.0)],
            ],
            2,
            ProblemKind::Regression,
        )
        .unwrap();
        let m = Model::Aep(AepParams { w: Matrix::from_rows(&[vec![2.0, -1.0], vec![1.0, -1.0]]).unwrap() });
        assert_eq!(m.risk_vector(&data, LossKind::SQUARED).unwrap().values(), &[0.0, 0.0]);
    }

    #[test]
    fn regularizer_examples() {
        let m = ep(vec![1.0, 0.0], vec![vec![0.0; 2]; 2]);
        assert_eq!(m.regularizer_value(&EP_REG).unwrap(), 2.0);
        let a = Model::Aep(AepParams { w: Matrix::diag(&[3.0, 1.0]) });
        let cfg = ModelConfig::Aep(AepConfig::Regularized { lambda: 0.5 });
        assert!((a.regularizer_value(&cfg).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(Model::zeros(&EP_REG, 2, 2).regularizer_value(&EP_REG).unwrap(), 0.0);
        assert!(matches!(a.regularizer_value(&AEP_C), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn projection_examples() {
        let cfg = ModelConfig::Ep(EpConfig::Constrained { tau0: 1.0, tau1: 1.0 });
        let inside = ep(vec![0.5, 0.0], vec![vec![0.0, 0.3]]);
        assert_eq!(inside.project_feasible(&cfg).unwrap(), inside);
        let outside = ep(vec![3.0, 4.0], vec![vec![0.0, 0.3]]);
        match outside.project_feasible(&cfg).unwrap() {
            Model::Ep(p) => {
                assert!((p.v0[0] - 0.6).abs() < 1e-15 && (p.v0[1] - 0.8).abs() < 1e-15);
                assert_eq!(p.vt[0], vec![0.0, 0.3]);
            }
            _ => unreachable!(),
        }
        let a = Model::Aep(AepParams { w: Matrix::diag(&[3.0, 1.0]) });
        match a.project_feasible(&AEP_C).unwrap() {
            Model::Aep(p) => {
                assert!(p.w.sub(&Matrix::diag(&[2.0, 0.0])).unwrap().frobenius_norm() < 1e-12)
            }
            _ => unreachable!(),
        }
        assert!(matches!(a.project_feasible(&ModelConfig::Aep(AepConfig::Regularized { lambda: 1.0 })), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn projection_is_feasible_and_idempotent() {
        let cfg = ModelConfig::Ep(EpConfig::Constrained { tau0: 0.4, tau1: 0.2 });
        for key in 0..20 {
            let m = random_model(&cfg, 3, 4, key).project_feasible(&cfg).unwrap();
            assert!(m.is_feasible(&cfg, 1e-8).unwrap());
            let mm = m.project_feasible(&cfg).unwrap();
            let gap: f64 = m.flat().iter().zip(mm.flat()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(gap < 1e-12);

            let a = random_model(&AEP_C, 3, 4, key).project_feasible(&AEP_C).unwrap();
            assert!(a.is_feasible(&AEP_C, 1e-8).unwrap());
            let aa = a.project_feasible(&AEP_C).unwrap();
            let gap: f64 = a.flat().iter().zip(aa.flat()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(gap < 1e-8);
        }
    }

    #[test]
    fn gradient_contribution_examples() {
        let data = MultiTaskDataset::from_examples(
            vec![vec![LabeledExample::new(vec![1.0, 0.0], 1.0)]],
            2,
            ProblemKind::Regression,
        )
        .unwrap();
        let zero = Model::zeros(&EP_REG, 1, 2);
        match zero.risk_gradient_contribution(&data, LossKind::SQUARED, 0).unwrap() {
            Model::Ep(p) => {
                assert_eq!(p.v0, vec![-2.0, 0.0]);
                assert_eq!(p.vt[0], vec![-2.0, 0.0]);
            }
            _ => unreachable!(),
        }
        // all margins > 1 give a zero direction
        let cls = MultiTaskDataset::from_examples(
            vec![vec![LabeledExample::new(vec![1.0, 0.0], 1.0), LabeledExample::new(vec![0.0, 1.0], -1.0)]],
            2,
            ProblemKind::Classification,
        )
        .unwrap();
        let m = Model::Aep(AepParams { w: Matrix::from_rows(&[vec![3.0, -3.0]]).unwrap() });
        let dir = m.risk_gradient_contribution(&cls, LossKind::HINGE, 0).unwrap();
        assert!(dir.flat().iter().all(|v| *v == 0.0));
    }

    /// Central finite differences of the task risk with respect to every
    /// parameter coordinate.
    fn finite_difference(m: &Model, data: &MultiTaskDataset, kind: LossKind, t: usize) -> Vec<f64> {
        let flat = m.flat();
        let h = 1e-6;
        let rebuild = |f: &[f64]| -> Model {
            match m {
                Model::Ep(p) => {
                    let d = p.v0.len();
                    ep(f[..d].to_vec(), f[d..].chunks(d).map(<[f64]>::to_vec).collect())
                }
                Model::Aep(p) => Model::Aep(AepParams { w: Matrix::from_vec(p.w.rows(), p.w.cols(), f.to_vec()).unwrap() }),
            }
        };
        (0..flat.len())
            .map(|i| {
                let mut up = flat.clone();
                up[i] += h;
                let mut dn = flat.clone();
                dn[i] -= h;
                let ru = rebuild(&up).risk_vector(data, kind).unwrap().values()[t];
                let rd = rebuild(&dn).risk_vector(data, kind).unwrap().values()[t];
                (ru - rd) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for key in 0..10 {
            let data = random_data(3, 5, 3, key, false);
            for family in [EP_REG, AEP_C] {
                let m = random_model(&family, 3, 3, key + 100);
                for t in 0..3 {
                    let g = m.risk_gradient_contribution(&data, LossKind::SQUARED, t).unwrap().flat();
                    let fd = finite_difference(&m, &data, LossKind::SQUARED, t);
                    for (a, b) in g.iter().zip(&fd) {
                        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
                    }
                }
            }
        }
        // hinge away from kinks
        let data = random_data(2, 6, 3, 77, true);
        let m = random_model(&AEP_C, 2, 3, 78);
        for t in 0..2 {
            let w = m.task_weights(t).unwrap();
            let near_kink = data.tasks()[t].examples.iter().any(|e| (dot(&w, &e.x) * e.y - 1.0).abs() < 1e-3);
            assert!(!near_kink);
            let g = m.risk_gradient_contribution(&data, LossKind::HINGE, t).unwrap().flat();
            let fd = finite_difference(&m, &data, LossKind::HINGE, t);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn weighted_objective_is_midpoint_convex() {
        let data = random_data(3, 4, 2, 5, false);
        let weights = [0.2, 0.5, 0.3];
        let obj = |m: &Model| -> f64 {
            m.risk_vector(&data, LossKind::SQUARED).unwrap().values().iter().zip(&weights).map(|(r, w)| r * w).sum()
        };
        for key in 0..30 {
            let a = random_model(&EP_REG, 3, 2, key);
            let b = random_model(&EP_REG, 3, 2, key + 1000);
            let mid: Vec<f64> = a.flat().iter().zip(b.flat()).map(|(x, y)| 0.5 * (x + y)).collect();
            let mid = ep(mid[..2].to_vec(), mid[2..].chunks(2).map(<[f64]>::to_vec).collect());
            assert!(obj(&mid) <= 0.5 * (obj(&a) + obj(&b)) + 1e-12);
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = random_model(&EP_REG, 3, 2, 9);
        assert_eq!(Model::from_json(&m.to_json().unwrap()).unwrap(), m);
        let a = random_model(&AEP_C, 2, 3, 9);
        let json = a.to_json().unwrap();
        assert!(json.starts_with("{\"kind\":\"aep\",\"tasks\":2,\"dim\":3,\"w\":["));
        assert_eq!(Model::from_json(&json).unwrap(), a);
        assert!(Model::from_json(r#"{"kind":"ep","tasks":2,"dim":2,"v0":[0,0],"vt":[1]}"#).is_err());
        // a sanity use of svd to keep the import honest in this module's tests
        assert_eq!(svd(&Matrix::identity(2)).unwrap().s, vec![1.0, 1.0]);
    }
}
