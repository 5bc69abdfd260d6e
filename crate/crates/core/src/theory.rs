//! Monte Carlo checks of the new-task tail bounds for a finite family of
//! representations, plus the bound arithmetic itself.
//!
//! A representation is a unit direction `u`; its hypotheses are
//! `x -> s <u, x>` with `|s| <= hypothesis_bound`. Tasks are linear with
//! Gaussian inputs and noise, so every quantity has a closed form: the
//! empirical risk minimizer of the clipped squared loss is found exactly on
//! each piece of the piecewise-quadratic objective, and the true risk of a
//! hypothesis is the clipped second moment of a Gaussian residual.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erfc};

use crate::error::{Error, Result};
use crate::rng::{purpose, KeyedRng};
use crate::task::{dot, norm};

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_counts(c: usize, t: usize) -> Result<()> {
    if c == 0 || t == 0 {
        return Err(Error::InvalidParameter("C and T must be at least 1".into()));
    }
    Ok(())
}

/// `log(2C/delta) / T`.
pub fn lemma1_bound(c: usize, delta: f64, t: usize) -> Result<f64> {
    check_delta(delta)?;
    check_counts(c, t)?;
    Ok((2.0 * c as f64 / delta).ln() / t as f64)
}

/// `(log(2C/delta) + log ceil(B) + log(T + 1)) / T`.
pub fn theorem1_rhs(c: usize, delta: f64, t: usize, b: f64) -> Result<f64> {
    check_delta(delta)?;
    check_counts(c, t)?;
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("loss bound must be positive, got {b}")));
    }
    Ok(((2.0 * c as f64 / delta).ln() + b.ceil().ln() + (t as f64 + 1.0).ln()) / t as f64)
}

/// True-risk level in the theorem's event:
/// `gamma + 1/T + 2 L R + sqrt(8 log(4/delta) / m)`.
pub fn theorem1_threshold(gamma: f64, t: usize, lipschitz: f64, rademacher: f64, delta: f64, m: usize) -> Result<f64> {
    check_delta(delta)?;
    check_counts(1, t)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok(gamma + 1.0 / t as f64 + 2.0 * lipschitz * rademacher + (8.0 * (4.0 / delta).ln() / m as f64).sqrt())
}

/// Markov-style bound `(mean_empirical_risk + epsilon) / gamma`.
pub fn markov_rhs(mean_empirical_risk: f64, epsilon: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    Ok((mean_empirical_risk + epsilon) / gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of the empirical Rademacher complexity of the
/// norm ball `{x -> <w, x> : |w| <= bound}` on `sample`, using the
/// closed-form supremum `(bound / m) |sum_i sigma_i x_i|`.
pub fn estimate_rademacher(sample: &[Vec<f64>], bound: f64, n_draws: usize, seed: u64) -> Result<RademacherEstimate> {
    if sample.is_empty() || n_draws == 0 {
        return Err(Error::InvalidParameter("need a nonempty sample and at least one draw".into()));
    }
    let d = sample[0].len();
    if sample.iter().any(|x| x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: sample.iter().map(Vec::len).find(|&l| l != d).unwrap_or(d) });
    }
    let m = sample.len() as f64;
    let mut rng = KeyedRng::new(seed, &[purpose::RADEMACHER]);
    let draws: Vec<f64> = (0..n_draws)
        .map(|_| {
            let mut acc = vec![0.0; d];
            for x in sample {
                let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                acc.iter_mut().zip(x).for_each(|(a, v)| *a += s * v);
            }
            bound / m * norm(&acc)
        })
        .collect();
    let n = draws.len() as f64;
    let value = draws.iter().sum::<f64>() / n;
    let var = if draws.len() > 1 {
        draws.iter().map(|v| (v - value).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(RademacherEstimate { value, std_error: (var / n).sqrt() })
}

/// One mixture component of the task prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskCluster {
    pub weight: f64,
    pub center: Vec<f64>,
    /// Standard deviation of task parameters around `center`.
    pub spread: f64,
}

/// A finite family of one-dimensional representations with a mixture task
/// prior. Tasks draw `w` from a cluster; examples are `x ~ N(0, I)` and
/// `y = <w, x> + noise_sd * N(0, 1)`. The loss is squared, clipped at
/// `clip_bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiniteEnvironment {
    pub representations: Vec<Vec<f64>>,
    pub clusters: Vec<TaskCluster>,
    pub noise_sd: f64,
    pub hypothesis_bound: f64,
    pub m: usize,
    pub clip_bound: f64,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

fn e(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

impl Default for FiniteEnvironment {
    /// Four representations in `R^5`. The first fits the common cluster only
    /// (90% of tasks), the second fits both clusters, the last two fit
    /// neither.
    fn default() -> Self {
        Self {
            representations: vec![e(5, 0), unit(&[2.0, 0.75, 0.0, 0.0, 0.0]), e(5, 2), e(5, 3)],
            clusters: vec![
                TaskCluster { weight: 0.9, center: vec![2.0, 0.0, 0.0, 0.0, 0.0], spread: 0.1 },
                TaskCluster { weight: 0.1, center: vec![2.0, 1.5, 0.0, 0.0, 0.0], spread: 0.1 },
            ],
            noise_sd: 0.3,
            hypothesis_bound: 5.0,
            m: 20,
            clip_bound: 4.0,
        }
    }
}

/// A sampled task: its parameter and its m-sample.
#[derive(Debug, Clone)]
struct EnvTask {
    w: Vec<f64>,
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
}

impl FiniteEnvironment {
    /// The default environment restricted to its first two representations.
    pub fn two_representations() -> Self {
        let mut env = Self::default();
        env.representations.truncate(2);
        env
    }

    /// One representation that fits every task exactly.
    pub fn trivial() -> Self {
        Self {
            representations: vec![e(5, 0)],
            clusters: vec![TaskCluster { weight: 1.0, center: vec![2.0, 0.0, 0.0, 0.0, 0.0], spread: 0.0 }],
            noise_sd: 0.0,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.clusters.first().map_or(0, |c| c.center.len())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.representations.is_empty() || self.clusters.is_empty() {
            return Err(Error::InvalidParameter("environment needs representations and clusters".into()));
        }
        if d == 0 || self.representations.iter().chain(self.clusters.iter().map(|c| &c.center)).any(|v| v.len() != d) {
            return Err(Error::InvalidParameter("environment vectors must share one nonzero dimension".into()));
        }
        if self.representations.iter().any(|u| (norm(u) - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidParameter("representations must be unit vectors".into()));
        }
        let total: f64 = self.clusters.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 || self.clusters.iter().any(|c| !(c.weight >= 0.0) || !(c.spread >= 0.0)) {
            return Err(Error::InvalidParameter("cluster weights must be a distribution".into()));
        }
        if !(self.clip_bound > 0.0) || !(self.hypothesis_bound > 0.0) || !(self.noise_sd >= 0.0) || self.m == 0 {
            return Err(Error::InvalidParameter("clip bound, hypothesis bound and m must be positive".into()));
        }
        Ok(())
    }

    /// Lipschitz constant of the clipped squared loss in the prediction.
    pub fn lipschitz(&self) -> f64 {
        2.0 * self.clip_bound.sqrt()
    }

    fn sample_task(&self, rng: &mut KeyedRng) -> EnvTask {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut cluster = self.clusters.last().expect("validated");
        for c in &self.clusters {
            acc += c.weight;
            if u < acc {
                cluster = c;
                break;
            }
        }
        let d = self.dim();
        let w: Vec<f64> = cluster
            .center
            .iter()
            .map(|c| c + cluster.spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut xs = Vec::with_capacity(self.m);
        let mut ys = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            let x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let noise: f64 = rng.sample(StandardNormal);
            ys.push(dot(&w, &x) + self.noise_sd * noise);
            xs.push(x);
        }
        EnvTask { w, xs, ys }
    }

    fn clipped(&self, r: f64) -> f64 {
        (r * r).min(self.clip_bound)
    }

    /// Exact minimizer over `|s| <= bound` of the mean clipped loss of
    /// `s * z_i` against `y_i`. Returns `(s, risk)`.
    fn erm(&self, z: &[f64], y: &[f64]) -> (f64, f64) {
        let a = self.hypothesis_bound;
        let c = self.clip_bound.sqrt();
        let mut cuts = vec![-a, a];
        for (&zi, &yi) in z.iter().zip(y) {
            if zi != 0.0 {
                for s in [(yi - c) / zi, (yi + c) / zi] {
                    if s > -a && s < a {
                        cuts.push(s);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let risk = |s: f64| z.iter().zip(y).map(|(zi, yi)| self.clipped(s * zi - yi)).sum::<f64>() / z.len() as f64;
        let mut best = (cuts[0], risk(cuts[0]));
        for pair in cuts.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let mid = 0.5 * (lo + hi);
            // on this piece the unclipped points are fixed: minimize their
            // quadratic in closed form
            let (mut szz, mut szy) = (0.0, 0.0);
            for (&zi, &yi) in z.iter().zip(y) {
                if (mid * zi - yi).powi(2) < self.clip_bound {
                    szz += zi * zi;
                    szy += zi * yi;
                }
            }
            let mut candidates = vec![hi];
            if szz > 0.0 {
                candidates.push((szy / szz).clamp(lo, hi));
            }
            for s in candidates {
                let r = risk(s);
                if r < best.1 {
                    best = (s, r);
                }
            }
        }
        best
    }

    fn fit(&self, task: &EnvTask, rep: usize) -> (f64, f64) {
        let u = &self.representations[rep];
        let z: Vec<f64> = task.xs.iter().map(|x| dot(u, x)).collect();
        self.erm(&z, &task.ys)
    }

    /// `E min((s <u, x> - y)^2, B)`: the residual is `N(0, v)` with
    /// `v = |s u - w|^2 + noise^2`.
    fn true_risk(&self, rep: usize, s: f64, w: &[f64]) -> f64 {
        let u = &self.representations[rep];
        let gap: f64 = u.iter().zip(w).map(|(ui, wi)| (s * ui - wi).powi(2)).sum();
        let var = gap + self.noise_sd * self.noise_sd;
        if var == 0.0 {
            return 0.0;
        }
        let sd = var.sqrt();
        let a = self.clip_bound.sqrt() / sd;
        let pdf = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
        var * (erf(a / std::f64::consts::SQRT_2) - 2.0 * a * pdf) + self.clip_bound * erfc(a / std::f64::consts::SQRT_2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailBoundConfig {
    pub gamma: f64,
    pub delta: f64,
    pub meta_reps: usize,
    /// Fresh tasks per meta-replicate for the tail estimates.
    pub test_tasks: usize,
    /// Additive slack in the Markov-style bound.
    pub epsilon: f64,
    pub rademacher_draws: usize,
    pub seed: u64,
}

impl Default for TailBoundConfig {
    fn default() -> Self {
        Self { gamma: 1.5, delta: 0.1, meta_reps: 500, test_tasks: 2000, epsilon: 0.0, rademacher_draws: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub tasks: usize,
    pub gamma: f64,
    pub delta: f64,
    /// Share of used replicates whose new-task empirical tail estimate
    /// exceeds `lemma1_bound`.
    pub empirical_tail_freq: f64,
    /// Mean over used replicates of the new-task empirical tail estimate.
    pub mean_tail_estimate: f64,
    pub lemma1_bound: f64,
    /// `delta / 2` plus three binomial standard deviations.
    pub allowed_freq: f64,
    pub theorem1_threshold: f64,
    pub theorem1_rhs: f64,
    /// Share of used replicates whose true-risk tail estimate exceeds
    /// `theorem1_rhs`.
    pub theorem_tail_freq: f64,
    pub markov_rhs: f64,
    /// Mean training empirical risk of the selected representation.
    pub mean_train_risk: f64,
    pub rademacher: f64,
    pub used_reps: usize,
    pub skip_rate: f64,
    /// Replicates selecting each representation.
    pub selections: Vec<usize>,
    pub lemma_holds: bool,
}

struct RepOutcome {
    selected: usize,
    tail: f64,
    true_tail: f64,
    mean_train_risk: f64,
}

/// Draws `T` training tasks per meta-replicate, selects the lowest-index
/// representation whose every training task reaches empirical risk
/// `<= gamma`, and estimates on fresh tasks how often that representation
/// fails to reach `gamma` (empirical risk) and the theorem's threshold (true
/// risk of the empirical risk minimizer).
///
/// Training task `t` of replicate `r` is keyed by `(seed, r, t)`, so runs
/// at different `T` share their first tasks; test tasks depend only on
/// `(seed, r)`.
pub fn verify_tail_bound(env: &FiniteEnvironment, tasks: usize, cfg: &TailBoundConfig) -> Result<BoundReport> {
    env.validate()?;
    check_delta(cfg.delta)?;
    if tasks == 0 || cfg.meta_reps == 0 || cfg.test_tasks == 0 {
        return Err(Error::InvalidParameter("tasks, meta_reps and test_tasks must be at least 1".into()));
    }
    let c = env.representations.len();
    let d = env.dim();

    // distribution-level complexity: the worst representation on a common
    // input sample
    let mut rng = KeyedRng::new(cfg.seed, &[u64::MAX, 0, purpose::RADEMACHER]);
    let inputs: Vec<Vec<f64>> = (0..env.m)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let mut rademacher = 0.0f64;
    for (i, u) in env.representations.iter().enumerate() {
        let z: Vec<Vec<f64>> = inputs.iter().map(|x| vec![dot(u, x)]).collect();
        let est = estimate_rademacher(&z, env.hypothesis_bound, cfg.rademacher_draws, cfg.seed.wrapping_add(i as u64))?;
        rademacher = rademacher.max(est.value);
    }
    let lemma = lemma1_bound(c, cfg.delta, tasks)?;
    let rhs = theorem1_rhs(c, cfg.delta, tasks, env.clip_bound)?;
    let threshold = theorem1_threshold(cfg.gamma, tasks, env.lipschitz(), rademacher, cfg.delta, env.m)?;

    let outcomes: Vec<Option<RepOutcome>> = (0..cfg.meta_reps as u64)
        .into_par_iter()
        .map(|r| {
            let train: Vec<EnvTask> = (0..tasks as u64)
                .map(|t| env.sample_task(&mut KeyedRng::new(cfg.seed, &[r, t, purpose::ENV_TRAIN])))
                .collect();
            let mut selected = None;
            for rep in 0..c {
                let risks: Vec<f64> = train.iter().map(|task| env.fit(task, rep).1).collect();
                if risks.iter().all(|&v| v <= cfg.gamma) {
                    selected = Some((rep, risks.iter().sum::<f64>() / risks.len() as f64));
                    break;
                }
            }
            let (rep, mean_train_risk) = selected?;
            let mut trng = KeyedRng::new(cfg.seed, &[r, 0, purpose::ENV_TEST]);
            let (mut over, mut true_over) = (0usize, 0usize);
            for _ in 0..cfg.test_tasks {
                let task = env.sample_task(&mut trng);
                let (s, risk) = env.fit(&task, rep);
                if risk > cfg.gamma {
                    over += 1;
                }
                if env.true_risk(rep, s, &task.w) > threshold {
                    true_over += 1;
                }
            }
            let n = cfg.test_tasks as f64;
            Some(RepOutcome { selected: rep, tail: over as f64 / n, true_tail: true_over as f64 / n, mean_train_risk })
        })
        .collect();

    let used: Vec<&RepOutcome> = outcomes.iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::Inconclusive(format!(
            "no replicate admits a representation with all {tasks} training risks <= {}",
            cfg.gamma
        )));
    }
    let n = used.len() as f64;
    let mut selections = vec![0usize; c];
    used.iter().for_each(|o| selections[o.selected] += 1);
    let freq = used.iter().filter(|o| o.tail > lemma).count() as f64 / n;
    let p = cfg.delta / 2.0;
    let allowed = p + 3.0 * (p * (1.0 - p) / n).sqrt();
    let mean_train = used.iter().map(|o| o.mean_train_risk).sum::<f64>() / n;
    Ok(BoundReport {
        tasks,
        gamma: cfg.gamma,
        delta: cfg.delta,
        empirical_tail_freq: freq,
        mean_tail_estimate: used.iter().map(|o| o.tail).sum::<f64>() / n,
        lemma1_bound: lemma,
        allowed_freq: allowed,
        theorem1_threshold: threshold,
        theorem1_rhs: rhs,
        theorem_tail_freq: used.iter().filter(|o| o.true_tail > rhs).count() as f64 / n,
        markov_rhs: markov_rhs(mean_train, cfg.epsilon, cfg.gamma)?,
        mean_train_risk: mean_train,
        rademacher,
        used_reps: used.len(),
        skip_rate: 1.0 - n / cfg.meta_reps as f64,
        selections,
        lemma_holds: freq <= allowed,
    })
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("spearman needs two equal-length series of length >= 2".into()));
    }
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (vx * vy).sqrt())
}

/// One row of the direct-versus-Markov comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub tasks: usize,
    pub gamma: f64,
    pub theorem1_rhs: f64,
    pub markov_rhs: f64,
}

/// Both bounds over a `(T, gamma)` grid at fixed `C`, `delta`, `B`, mean
/// empirical risk and `epsilon`.
pub fn bound_comparison(
    c: usize,
    delta: f64,
    b: f64,
    mean_empirical_risk: f64,
    epsilon: f64,
    tasks: &[usize],
    gammas: &[f64],
) -> Result<Vec<BoundComparison>> {
    let mut rows = Vec::with_capacity(tasks.len() * gammas.len());
    for &t in tasks {
        for &gamma in gammas {
            rows.push(BoundComparison {
                tasks: t,
                gamma,
                theorem1_rhs: theorem1_rhs(c, delta, t, b)?,
                markov_rhs: markov_rhs(mean_empirical_risk, epsilon, gamma)?,
            });
        }
    }
    Ok(rows)
}

pub fn write_comparison_csv<W: std::io::Write>(rows: &[BoundComparison], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
