//! Test metrics for the MTL and LTL protocols, task-level cross-validation
//! and the multiclass error of a tournament.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::composition::Composer;
use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};
use crate::models::{AepConfig, AepParams, EpConfig, EpParams, Model, ModelConfig};
use crate::rng::{purpose, KeyedRng};
use crate::solver::{solve, solve_with, SolveConfig, SolveOptions, SolveReport};
use crate::task::{dot, LossKind, MultiTaskDataset, RiskVector, SplitDataset, TaskSample};
use crate::data::tournament_decode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Mean loss per task, plain mean over tasks.
    L2Risk,
    /// Root mean squared error per task, plain mean over tasks.
    Rmse,
    /// RMSE per task, mean weighted by task size.
    NormalizedMeanRmse,
    #[serde(rename = "multiclass_01")]
    Multiclass01,
}

impl MetricKind {
    pub fn label(&self) -> &'static str {
        match self {
            MetricKind::L2Risk => "l2_risk",
            MetricKind::Rmse => "rmse",
            MetricKind::NormalizedMeanRmse => "normalized_mean_rmse",
            MetricKind::Multiclass01 => "multiclass_01",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub max_risk: f64,
    pub mean_risk: f64,
    pub per_task: RiskVector,
    pub metric_kind: MetricKind,
}

/// Neumaier-compensated sum, so aggregates do not depend on accumulation
/// order beyond the last bit.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean).powi(2))) / n;
    (mean, var.sqrt())
}

impl Metrics {
    /// Aggregates per-task values; `sizes` weights the mean for
    /// [`MetricKind::NormalizedMeanRmse`].
    pub fn from_per_task(per_task: RiskVector, metric_kind: MetricKind, sizes: &[usize]) -> Result<Self> {
        if per_task.is_empty() {
            return Err(Error::InvalidParameter("metrics need at least one task".into()));
        }
        let mean_risk = match metric_kind {
            MetricKind::NormalizedMeanRmse => {
                if sizes.len() != per_task.len() {
                    return Err(Error::LengthMismatch { expected: per_task.len(), found: sizes.len() });
                }
                let total: usize = sizes.iter().sum();
                compensated_sum(
                    per_task.values().iter().zip(sizes).map(|(v, &m)| v * m as f64 / total as f64),
                )
            }
            _ => compensated_sum(per_task.values().iter().copied()) / per_task.len() as f64,
        };
        Ok(Self { max_risk: per_task.max(), mean_risk, per_task, metric_kind })
    }
}

fn per_task_metric(task: &TaskSample, w: &[f64], kind: LossKind, metric: MetricKind) -> Result<f64> {
    if task.is_empty() {
        return Err(Error::EmptyTask(task.task_id));
    }
    match metric {
        MetricKind::L2Risk => crate::task::empirical_risk(task, |x| dot(w, x), kind),
        MetricKind::Rmse | MetricKind::NormalizedMeanRmse => {
            let mse = compensated_sum(task.examples.iter().map(|e| (dot(w, &e.x) - e.y).powi(2)))
                / task.len() as f64;
            Ok(mse.sqrt())
        }
        MetricKind::Multiclass01 => Err(Error::InvalidParameter(
            "multiclass error is computed by multiclass_01".into(),
        )),
    }
}

fn metrics_for(
    predictors: &[Vec<f64>],
    test: &MultiTaskDataset,
    kind: LossKind,
    metric: MetricKind,
) -> Result<Metrics> {
    let values = test
        .tasks()
        .iter()
        .zip(predictors)
        .map(|(task, w)| per_task_metric(task, w, kind, metric))
        .collect::<Result<Vec<_>>>()?;
    let sizes: Vec<usize> = test.tasks().iter().map(TaskSample::len).collect();
    Metrics::from_per_task(RiskVector::new(values)?, metric, &sizes)
}

pub fn evaluate_mtl(model: &Model, test: &MultiTaskDataset, kind: LossKind, metric: MetricKind) -> Result<Metrics> {
    if test.num_tasks() > model.num_tasks() {
        return Err(Error::UnknownTask { task: test.num_tasks() - 1, tasks: model.num_tasks() });
    }
    if test.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: test.dim() });
    }
    let predictors = (0..test.num_tasks())
        .map(|t| model.task_weights(t))
        .collect::<Result<Vec<_>>>()?;
    metrics_for(&predictors, test, kind, metric)
}

/// What a trained model hands to new tasks.
#[derive(Debug, Clone, PartialEq)]
pub enum SharedComponent {
    /// The shared vector `v0`, kept fixed on new tasks.
    Ep { v0: Vec<f64> },
    /// `d x k` orthonormal basis of the row space of `W`.
    Aep { basis: Matrix },
}

/// Relative threshold for the numerical rank of `W`.
pub const EPSILON_RANK: f64 = 1e-6;

impl SharedComponent {
    pub fn from_model(model: &Model) -> Result<Self> {
        match model {
            Model::Ep(p) => Ok(SharedComponent::Ep { v0: p.v0.clone() }),
            Model::Aep(p) => {
                let dec = svd(&p.w)?;
                let top = dec.s.first().copied().unwrap_or(0.0);
                let k = if top > 0.0 {
                    dec.s.iter().filter(|&&s| s > EPSILON_RANK * top).count()
                } else {
                    0
                };
                let columns: Vec<Vec<f64>> = (0..k).map(|j| dec.v.column(j)).collect();
                Ok(SharedComponent::Aep { basis: Matrix::from_columns(&columns, p.w.cols()) })
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SharedComponent::Ep { v0 } => v0.len(),
            SharedComponent::Aep { basis } => basis.rows(),
        }
    }
}

/// Per-task adaptation output.
#[derive(Debug, Clone)]
pub struct LtlOutcome {
    pub metrics: Metrics,
    /// Effective predictor of each new task.
    pub predictors: Vec<Vec<f64>>,
    pub reports: Vec<SolveReport>,
}

/// Fits each new task on its train split alone, then scores its test split.
///
/// EP keeps `v0` fixed and fits `v_t`; AEP fits coefficients in the shared
/// subspace. Each task is a single-task problem, so the composer reduces to
/// the task's own risk and the mean composer is used.
pub fn evaluate_ltl(
    shared: &SharedComponent,
    new_tasks: &SplitDataset,
    config: &ModelConfig,
    kind: LossKind,
    cfg: &SolveConfig,
    metric: MetricKind,
) -> Result<LtlOutcome> {
    let (predictors, reports) = adapt(shared, &new_tasks.train, config, kind, cfg)?;
    let metrics = metrics_for(&predictors, &new_tasks.test, kind, metric)?;
    Ok(LtlOutcome { metrics, predictors, reports })
}

/// Adaptation only ever sees training samples.
fn adapt(
    shared: &SharedComponent,
    train: &MultiTaskDataset,
    config: &ModelConfig,
    kind: LossKind,
    cfg: &SolveConfig,
) -> Result<(Vec<Vec<f64>>, Vec<SolveReport>)> {
    if shared.dim() != train.dim() {
        return Err(Error::DimensionMismatch { expected: shared.dim(), found: train.dim() });
    }
    let composer = Composer::mean();
    let mut predictors = Vec::with_capacity(train.num_tasks());
    let mut reports = Vec::with_capacity(train.num_tasks());
    for t in 0..train.num_tasks() {
        let single = train.subset(&[t])?;
        match (shared, config) {
            (SharedComponent::Ep { v0 }, ModelConfig::Ep(_)) => {
                let init = Model::Ep(EpParams { v0: v0.clone(), vt: vec![vec![0.0; v0.len()]] });
                let opts = SolveOptions { init: Some(init), freeze_shared: true };
                let (m, rep) = solve_with(&single, config, &composer, kind, cfg, &opts)?;
                predictors.push(m.task_weights(0)?);
                reports.push(rep);
            }
            (SharedComponent::Aep { basis }, ModelConfig::Aep(_)) => {
                let k = basis.cols();
                if k == 0 {
                    predictors.push(vec![0.0; basis.rows()]);
                    continue;
                }
                let reduced = single.map_inputs(k, |x| basis.tr_matvec(x).expect("dimension checked"))?;
                let (m, rep) = solve(&reduced, config, &composer, kind, cfg)?;
                predictors.push(basis.matvec(&m.task_weights(0)?)?);
                reports.push(rep);
            }
            _ => return Err(Error::InvalidParameter("shared component and config families differ".into())),
        }
    }
    Ok((predictors, reports))
}

/// Refits every task block of an EP model with `v0` held fixed, starting
/// from the current blocks.
///
/// The minimax subgradient only moves the worst task, so at its optimum the
/// other blocks are arbitrary. Each refit starts from the current block and
/// keeps the best iterate, so no task risk increases and the composed
/// objective stays where it was for every composer. AEP models are returned
/// unchanged.
pub fn refine_task_blocks(
    model: &Model,
    train: &MultiTaskDataset,
    config: &ModelConfig,
    kind: LossKind,
    cfg: &SolveConfig,
) -> Result<Model> {
    let Model::Ep(p) = model else {
        return Ok(model.clone());
    };
    let mut refined = p.clone();
    for t in 0..train.num_tasks() {
        let single = train.subset(&[t])?;
        let init = Model::Ep(EpParams { v0: p.v0.clone(), vt: vec![p.vt[t].clone()] });
        let opts = SolveOptions { init: Some(init), freeze_shared: true };
        let (m, _) = solve_with(&single, config, &Composer::mean(), kind, cfg, &opts)?;
        if let Model::Ep(q) = m {
            refined.vt[t] = q.vt.into_iter().next().expect("one task");
        }
    }
    Ok(Model::Ep(refined))
}

/// Cross-validation summary over folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub folds: Vec<Metrics>,
    pub max_mean: f64,
    pub max_std: f64,
    pub mean_mean: f64,
    pub mean_std: f64,
}

/// Task ids after a seeded shuffle, cut into `k` contiguous folds whose
/// sizes differ by at most one.
pub fn task_folds(tasks: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > tasks {
        return Err(Error::InvalidParameter(format!("fold count {k} must lie in 2..={tasks}")));
    }
    let mut ids: Vec<usize> = (0..tasks).collect();
    ids.shuffle(&mut KeyedRng::new(seed, &[purpose::FOLDS]));
    let (base, extra) = (tasks / k, tasks % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = ids[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

/// Holds each fold out as new tasks; `runner(train_tasks, held_out)` trains
/// on the former and reports metrics on the latter.
pub fn task_cv(
    data: &SplitDataset,
    k: usize,
    seed: u64,
    mut runner: impl FnMut(&SplitDataset, &SplitDataset) -> Result<Metrics>,
) -> Result<CvSummary> {
    let folds = task_folds(data.num_tasks(), k, seed)?;
    let mut results = Vec::with_capacity(k);
    for fold in &folds {
        let rest: Vec<usize> = (0..data.num_tasks()).filter(|t| fold.binary_search(t).is_err()).collect();
        results.push(runner(&data.subset(&rest)?, &data.subset(fold)?)?);
    }
    let maxes: Vec<f64> = results.iter().map(|m| m.max_risk).collect();
    let means: Vec<f64> = results.iter().map(|m| m.mean_risk).collect();
    let (max_mean, max_std) = mean_std(&maxes);
    let (mean_mean, mean_std) = mean_std(&means);
    Ok(CvSummary { folds: results, max_mean, max_std, mean_mean, mean_std })
}

/// Fraction of inputs whose round-robin decoded class differs from the label.
/// Row `t` of the model scores pair `t` of the tournament.
pub fn multiclass_01(model: &Model, inputs: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<f64> {
    let pairs = n_classes * n_classes.saturating_sub(1) / 2;
    if model.num_tasks() != pairs {
        return Err(Error::LengthMismatch { expected: pairs, found: model.num_tasks() });
    }
    if inputs.len() != labels.len() {
        return Err(Error::LengthMismatch { expected: inputs.len(), found: labels.len() });
    }
    if inputs.is_empty() {
        return Err(Error::InvalidParameter("no test inputs".into()));
    }
    let mut wrong = 0usize;
    for (x, &label) in inputs.iter().zip(labels) {
        let scores = (0..pairs).map(|t| model.predict(t, x)).collect::<Result<Vec<_>>>()?;
        if tournament_decode(&scores, n_classes)? != label {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / inputs.len() as f64)
}

/// Convenience for AEP tournament models.
pub fn aep_model(w: Matrix) -> Model {
    Model::Aep(AepParams { w })
}

/// Capacity-indexed model configuration for the sweeps.
pub fn with_capacity(config: &ModelConfig, capacity: f64) -> ModelConfig {
    match *config {
        ModelConfig::Ep(EpConfig::Constrained { tau0, .. }) => {
            ModelConfig::Ep(EpConfig::Constrained { tau0, tau1: capacity })
        }
        ModelConfig::Ep(EpConfig::Regularized { lambda0, .. }) => {
            ModelConfig::Ep(EpConfig::Regularized { lambda0, lambda1: capacity })
        }
        ModelConfig::Aep(AepConfig::Constrained { .. }) => ModelConfig::Aep(AepConfig::Constrained { radius: capacity }),
        ModelConfig::Aep(AepConfig::Regularized { .. }) => ModelConfig::Aep(AepConfig::Regularized { lambda: capacity }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_two_modes, TwoModesConfig};
    use crate::task::{LabeledExample, ProblemKind};
    use rand::Rng;

    fn rv(v: &[f64]) -> RiskVector {
        RiskVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn aggregate_examples() {
        let m = Metrics::from_per_task(rv(&[1.0, 2.0, 3.0]), MetricKind::L2Risk, &[]).unwrap();
        assert_eq!((m.max_risk, m.mean_risk), (3.0, 2.0));
        let single = Metrics::from_per_task(rv(&[0.7]), MetricKind::Rmse, &[]).unwrap();
        assert_eq!(single.max_risk, single.mean_risk);
        let w = Metrics::from_per_task(rv(&[1.0, 4.0]), MetricKind::NormalizedMeanRmse, &[3, 1]).unwrap();
        assert_eq!(w.mean_risk, 1.75);
    }

    #[test]
    fn compensated_sum_is_order_independent() {
        let mut rng = KeyedRng::new(1, &[2]);
        let mut v: Vec<f64> = (0..1000).map(|i| rng.random_range(-1.0..1.0) * 10f64.powi(i % 12)).collect();
        let a = compensated_sum(v.iter().copied());
        v.reverse();
        let b = compensated_sum(v.iter().copied());
        assert!((a - b).abs() <= 1e-16 * v.iter().map(|x| x.abs()).sum::<f64>());
        assert_eq!(compensated_sum([1e16, 1.0, -1e16]), 1.0);
    }

    fn toy_split() -> SplitDataset {
        let task = |w: f64, xs: &[f64]| xs.iter().map(|&x| LabeledExample::new(vec![x], w * x)).collect::<Vec<_>>();
        SplitDataset::new(
            MultiTaskDataset::from_examples(vec![task(1.0, &[1.0, 2.0]), task(-1.0, &[1.0])], 1, ProblemKind::Regression).unwrap(),
            MultiTaskDataset::from_examples(vec![task(1.0, &[3.0]), task(-1.0, &[0.5, 2.0])], 1, ProblemKind::Regression).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_model_scores_zero() {
        let data = toy_split();
        let m = Model::Ep(EpParams { v0: vec![0.0], vt: vec![vec![1.0], vec![-1.0]] });
        for metric in [MetricKind::L2Risk, MetricKind::Rmse, MetricKind::NormalizedMeanRmse] {
            let r = evaluate_mtl(&m, &data.test, LossKind::SQUARED, metric).unwrap();
            assert_eq!((r.max_risk, r.mean_risk), (0.0, 0.0));
        }
        let short = Model::Ep(EpParams { v0: vec![0.0], vt: vec![vec![1.0]] });
        assert!(matches!(evaluate_mtl(&short, &data.test, LossKind::SQUARED, MetricKind::L2Risk), Err(Error::UnknownTask { .. })));
    }

    #[test]
    fn stored_aggregates_recompute_exactly() {
        let g = generate_two_modes(&TwoModesConfig::default(), 0).unwrap();
        let m = Model::Ep(EpParams { v0: g.mu.clone(), vt: vec![vec![0.0; 10]; 55] });
        for metric in [MetricKind::L2Risk, MetricKind::Rmse, MetricKind::NormalizedMeanRmse] {
            let r = evaluate_mtl(&m, &g.data.test, LossKind::SQUARED, metric).unwrap();
            assert_eq!(r.max_risk, r.per_task.max());
            let again = Metrics::from_per_task(r.per_task.clone(), metric, &vec![15; 55]).unwrap();
            assert_eq!(again, r);
        }
    }

    #[test]
    fn frozen_zero_v0_matches_single_task_solves() {
        let data = toy_split();
        let cfg = ModelConfig::Ep(EpConfig::Constrained { tau0: 100.0, tau1: 100.0 });
        let sc = SolveConfig { max_iters: 4000, step0: 0.2, ..Default::default() };
        let shared = SharedComponent::Ep { v0: vec![0.0] };
        let out = evaluate_ltl(&shared, &data, &cfg, LossKind::SQUARED, &sc, MetricKind::L2Risk).unwrap();
        for t in 0..2 {
            let (m, _) = solve(&data.train.subset(&[t]).unwrap(), &cfg, &Composer::mean(), LossKind::SQUARED, &sc).unwrap();
            let direct = m.task_weights(0).unwrap();
            assert!((direct[0] - out.predictors[t][0]).abs() < 1e-3);
        }
        assert!((out.predictors[0][0] - 1.0).abs() < 1e-3);
        assert!((out.predictors[1][0] + 1.0).abs() < 1e-3);
    }

    #[test]
    fn replayed_task_recovers_training_risk() {
        let cfg = TwoModesConfig { sigma_noise: 0.0, n_type1: 5, n_type2: 1, ..Default::default() };
        let g = generate_two_modes(&cfg, 0).unwrap();
        let mc = ModelConfig::Ep(EpConfig::Constrained { tau0: 10.0, tau1: 2.0 });
        let sc = SolveConfig { max_iters: 3000, step0: 0.05, patience: 500, ..Default::default() };
        let (model, _) = solve(&g.data.train, &mc, &Composer::mean(), LossKind::SQUARED, &sc).unwrap();
        let train_risk = model.risk_vector(&g.data.train, LossKind::SQUARED).unwrap();
        let shared = SharedComponent::from_model(&model).unwrap();
        let replay = g.data.subset(&[0]).unwrap();
        let out = evaluate_ltl(&shared, &SplitDataset::new(replay.train.clone(), replay.train.clone()).unwrap(), &mc, LossKind::SQUARED, &sc, MetricKind::L2Risk).unwrap();
        // the adapted fit can only match or beat the jointly trained block
        assert!(out.metrics.per_task.values()[0] <= train_risk.values()[0] + 1e-3);
    }

    #[test]
    fn refinement_never_raises_a_task_risk() {
        let g = generate_two_modes(&TwoModesConfig { n_type1: 8, n_type2: 2, ..Default::default() }, 1).unwrap();
        let mc = ModelConfig::Ep(EpConfig::Constrained { tau0: 10.0, tau1: 2.0 });
        let sc = SolveConfig { max_iters: 300, ..Default::default() };
        for composer in [Composer::Max, Composer::mean(), Composer::L2] {
            let (m, _) = solve(&g.data.train, &mc, &composer, LossKind::SQUARED, &sc).unwrap();
            let before = m.risk_vector(&g.data.train, LossKind::SQUARED).unwrap();
            let r = refine_task_blocks(&m, &g.data.train, &mc, LossKind::SQUARED, &sc).unwrap();
            let after = r.risk_vector(&g.data.train, LossKind::SQUARED).unwrap();
            for (a, b) in after.values().iter().zip(before.values()) {
                assert!(a <= b);
            }
            assert!(composer.compose(&after).unwrap() <= composer.compose(&before).unwrap());
            assert!(r.is_feasible(&mc, 1e-8).unwrap());
            match (&m, &r) {
                (Model::Ep(a), Model::Ep(b)) => assert_eq!(a.v0, b.v0),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn aep_subspace_transfer() {
        // W of rank one along e1: new tasks can only use the first coordinate
        let w = Matrix::from_rows(&[vec![2.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let shared = SharedComponent::from_model(&aep_model(w)).unwrap();
        match &shared {
            SharedComponent::Aep { basis } => assert_eq!(basis.shape(), (2, 1)),
            _ => unreachable!(),
        }
        let ex = |x: [f64; 2], y| LabeledExample::new(x.to_vec(), y);
        let train = MultiTaskDataset::from_examples(vec![vec![ex([1.0, 0.0], 3.0), ex([0.0, 1.0], 5.0)]], 2, ProblemKind::Regression).unwrap();
        let data = SplitDataset::new(train.clone(), train).unwrap();
        let cfg = ModelConfig::Aep(AepConfig::Constrained { radius: 100.0 });
        let sc = SolveConfig { max_iters: 4000, step0: 0.5, ..Default::default() };
        let out = evaluate_ltl(&shared, &data, &cfg, LossKind::SQUARED, &sc, MetricKind::L2Risk).unwrap();
        assert!((out.predictors[0][0].abs() - 3.0).abs() < 1e-2);
        assert_eq!(out.predictors[0][1], 0.0);
        let zero = SharedComponent::from_model(&aep_model(Matrix::zeros(2, 2))).unwrap();
        let out = evaluate_ltl(&zero, &data, &cfg, LossKind::SQUARED, &sc, MetricKind::L2Risk).unwrap();
        assert_eq!(out.predictors[0], vec![0.0, 0.0]);
    }

    #[test]
    fn folds_partition_tasks() {
        for (t, k) in [(10, 3), (7, 7), (55, 10)] {
            let folds = task_folds(t, k, 4).unwrap();
            assert_eq!(folds.len(), k);
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            assert_eq!(all, (0..t).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
        assert_eq!(task_folds(10, 3, 4).unwrap(), task_folds(10, 3, 4).unwrap());
        assert!(task_folds(3, 4, 0).is_err());
        assert!(task_folds(3, 1, 0).is_err());
    }

    #[test]
    fn cv_examples() {
        let data = toy_split();
        let constant = |_: &SplitDataset, held: &SplitDataset| {
            Metrics::from_per_task(RiskVector::new(vec![0.5; held.num_tasks()]).unwrap(), MetricKind::L2Risk, &[])
        };
        let s = task_cv(&data, 2, 0, constant).unwrap();
        assert_eq!((s.max_std, s.mean_std, s.max_mean), (0.0, 0.0, 0.5));
        // leave-one-task-out: every fold holds exactly one task
        let mut seen = Vec::new();
        task_cv(&data, 2, 0, |train, held| {
            assert_eq!((train.num_tasks(), held.num_tasks()), (1, 1));
            seen.push(held.test.tasks()[0].len());
            Metrics::from_per_task(RiskVector::new(vec![0.0]).unwrap(), MetricKind::L2Risk, &[])
        })
        .unwrap();
        seen.sort_unstable();
        assert_eq!(seen, vec![1, 2]);
    }

    #[test]
    fn multiclass_examples() {
        // three classes on a line: class c sits at x = c; pair scorers split
        // halfway between their classes
        let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
        let rows: Vec<Vec<f64>> = pairs.iter().map(|&(a, b)| vec![-1.0, (a + b) as f64 / 2.0]).collect();
        let model = aep_model(Matrix::from_rows(&rows).unwrap());
        let inputs: Vec<Vec<f64>> = (0..3).map(|c| vec![c as f64, 1.0]).collect();
        assert_eq!(multiclass_01(&model, &inputs, &[0, 1, 2], 3).unwrap(), 0.0);
        assert_eq!(multiclass_01(&model, &inputs, &[1, 1, 2], 3).unwrap(), 1.0 / 3.0);
        assert!(multiclass_01(&model, &inputs, &[0, 1], 3).is_err());
    }

    #[test]
    fn random_voting_is_about_ninety_percent_wrong() {
        let mut rng = KeyedRng::new(8, &[0]);
        let w = Matrix::from_vec(45, 45, (0..45 * 45).map(|i| if i % 46 == 0 { 1.0 } else { 0.0 }).collect()).unwrap();
        let model = aep_model(w);
        let n = 10_000;
        let inputs: Vec<Vec<f64>> = (0..n).map(|_| (0..45).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let labels: Vec<usize> = (0..n).map(|i| i % 10).collect();
        let err = multiclass_01(&model, &inputs, &labels, 10).unwrap();
        assert!((err - 0.9).abs() < 0.03, "{err}");
    }
}
