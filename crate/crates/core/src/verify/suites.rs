//! Named property suites over the oracles, shared by `mtl verify` and the
//! acceptance tests.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;

use super::oracles::{
    ep_constrained_optimum, l2_ball_by_bisection, simplex_by_enumeration, trace_ball_by_threshold_search,
};
use crate::composition::{inner_minimize_b, Composer};
use crate::error::{Error, Result};
use crate::linalg::{project_l2_ball, project_simplex_scaled, project_trace_ball, Matrix};
use crate::models::{EpConfig, ModelConfig};
use crate::rng::KeyedRng;
use crate::solver::{solve, SolveConfig};
use crate::task::{LabeledExample, LossKind, MultiTaskDataset, ProblemKind, RiskVector};
use crate::theory::{spearman, verify_tail_bound, FiniteEnvironment, TailBoundConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Projections,
    Composition,
    SolverOracle,
    Theory,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Projections, Suite::Composition, Suite::SolverOracle, Suite::Theory];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Projections => "projections",
            Suite::Composition => "composition",
            Suite::SolverOracle => "solver_oracle",
            Suite::Theory => "theory",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::InvalidParameter(format!("unknown suite `{s}`, expected one of {}", names.join(", ")))
            })
    }
}

/// Outcome of one property.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Check {
    fn timed(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Self {
        let start = Instant::now();
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        Check { name, passed, detail, elapsed: start.elapsed() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {} ({:.1}s): {}", self.name, self.elapsed.as_secs_f64(), self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite.name())?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

pub fn run_suite(suite: Suite) -> SuiteReport {
    let checks = match suite {
        Suite::Projections => vec![
            l2_ball_matches_oracle(),
            simplex_matches_enumeration(),
            trace_ball_matches_threshold_search(),
            projections_idempotent_and_nonexpansive(),
        ],
        Suite::Composition => vec![
            alpha_minimax_matches_grid_scan(),
            large_alpha_zeroes_b(),
            small_alpha_is_max(),
            subgradient_validity(),
        ],
        Suite::SolverOracle => vec![solver_matches_oracle(), alpha_regimes_match_endpoints()],
        Suite::Theory => vec![tail_bound_default_environment()],
    };
    SuiteReport { suite, checks }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn random_vec(rng: &mut KeyedRng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

fn random_matrix(rng: &mut KeyedRng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_vec(rows, cols, random_vec(rng, rows * cols, scale)).expect("shape")
}

fn random_scale(rng: &mut KeyedRng) -> f64 {
    10f64.powf(rng.random_range(-1.0..1.0))
}

pub fn l2_ball_matches_oracle() -> Check {
    Check::timed("l2 ball vs dual bisection", || {
        let mut rng = KeyedRng::new(101, &[]);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let n = rng.random_range(1..=6);
            let scale = random_scale(&mut rng);
            let v = random_vec(&mut rng, n, scale);
            let r = rng.random_range(0.1..3.0);
            worst = worst.max(dist(&project_l2_ball(&v, r)?, &l2_ball_by_bisection(&v, r)));
        }
        Ok((worst <= 1e-6, format!("worst deviation {worst:.2e} over 1000 instances")))
    })
}

pub fn simplex_matches_enumeration() -> Check {
    Check::timed("scaled simplex vs support enumeration", || {
        let mut rng = KeyedRng::new(102, &[]);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let n = rng.random_range(1..=6);
            let scale = random_scale(&mut rng);
            let s = random_vec(&mut rng, n, scale);
            let r = rng.random_range(0.1..3.0);
            worst = worst.max(dist(&project_simplex_scaled(&s, r)?, &simplex_by_enumeration(&s, r)));
        }
        Ok((worst <= 1e-6, format!("worst deviation {worst:.2e} over 1000 instances")))
    })
}

pub fn trace_ball_matches_threshold_search() -> Check {
    Check::timed("trace ball vs threshold search", || {
        let mut rng = KeyedRng::new(103, &[]);
        let mut worst = 0.0f64;
        let mut count = 0;
        for rows in 1..=6 {
            for cols in 1..=6 {
                for _ in 0..6 {
                    let scale = random_scale(&mut rng);
                    let w = random_matrix(&mut rng, rows, cols, scale);
                    let r = rng.random_range(0.1..3.0);
                    let p = project_trace_ball(&w, r)?;
                    let o = trace_ball_by_threshold_search(&w, r)?;
                    worst = worst.max(p.sub(&o)?.frobenius_norm());
                    count += 1;
                }
            }
        }
        Ok((worst <= 1e-6, format!("worst deviation {worst:.2e} over {count} matrices up to 6x6")))
    })
}

pub fn projections_idempotent_and_nonexpansive() -> Check {
    Check::timed("idempotence and non-expansiveness", || {
        let mut rng = KeyedRng::new(104, &[]);
        let (mut idem, mut expand) = (0.0f64, f64::NEG_INFINITY);
        for _ in 0..1000 {
            let n = rng.random_range(1..=6);
            let r = rng.random_range(0.1..3.0);
            let scale = random_scale(&mut rng);
            let (x, y) = (random_vec(&mut rng, n, scale), random_vec(&mut rng, n, scale));
            for project in [project_l2_ball, project_simplex_scaled] {
                let (px, py) = (project(&x, r)?, project(&y, r)?);
                idem = idem.max(dist(&project(&px, r)?, &px));
                expand = expand.max(dist(&px, &py) - dist(&x, &y));
            }
            let (rows, cols) = (rng.random_range(1..=6), rng.random_range(1..=6));
            let (a, b) = (random_matrix(&mut rng, rows, cols, scale), random_matrix(&mut rng, rows, cols, scale));
            let (pa, pb) = (project_trace_ball(&a, r)?, project_trace_ball(&b, r)?);
            idem = idem.max(project_trace_ball(&pa, r)?.sub(&pa)?.frobenius_norm());
            expand = expand.max(pa.sub(&pb)?.frobenius_norm() - a.sub(&b)?.frobenius_norm());
        }
        Ok((
            idem <= 1e-10 && expand <= 1e-10,
            format!("max |P(P(x)) - P(x)| = {idem:.2e}, max expansion = {expand:.2e} over 1000 pairs per set"),
        ))
    })
}

/// Risks on the `1e-4` lattice so every breakpoint lies on the scan grid.
fn lattice_risks(rng: &mut KeyedRng, t: usize) -> Vec<f64> {
    (0..t).map(|_| rng.random_range(0..=20_000u32) as f64 * 1e-4).collect()
}

fn alpha_objective(alpha: f64, r: &[f64], b: f64) -> f64 {
    b + r.iter().map(|x| (x - b).max(0.0)).sum::<f64>() / alpha
}

pub fn alpha_minimax_matches_grid_scan() -> Check {
    Check::timed("alpha-minimax vs 1e-4 grid scan", || {
        let mut rng = KeyedRng::new(201, &[]);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let t = rng.random_range(1..=20);
            let r = lattice_risks(&mut rng, t);
            let alpha = rng.random_range(0.1..=2.0 * t as f64);
            let top = r.iter().copied().fold(0.0, f64::max);
            let steps = (top * 1e4).round() as u32;
            let scan = (0..=steps)
                .map(|j| alpha_objective(alpha, &r, j as f64 * 1e-4))
                .fold(f64::INFINITY, f64::min);
            let rv = RiskVector::new(r.clone())?;
            let sol = inner_minimize_b(alpha, &rv)?;
            let value = Composer::alpha_minimax(alpha)?.compose(&rv)?;
            worst = worst
                .max((value - scan).abs())
                .max((sol.value - scan).abs())
                .max((alpha_objective(alpha, &r, sol.b_star) - scan).abs());
        }
        Ok((worst <= 1e-6, format!("worst deviation {worst:.2e} over 1000 vectors, T <= 20")))
    })
}

pub fn large_alpha_zeroes_b() -> Check {
    Check::timed("alpha >= T gives b* = 0", || {
        let mut rng = KeyedRng::new(202, &[]);
        let mut bad = 0;
        for _ in 0..1000 {
            let t = rng.random_range(1..=20);
            let r = RiskVector::new(random_vec(&mut rng, t, 5.0).into_iter().map(f64::abs).collect())?;
            let alpha = t as f64 + rng.random_range(0.0..2.0 * t as f64);
            if inner_minimize_b(alpha, &r)?.b_star != 0.0 {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{bad} of 1000 vectors with b* != 0")))
    })
}

pub fn small_alpha_is_max() -> Check {
    Check::timed("alpha <= 0.3 reproduces max", || {
        let mut rng = KeyedRng::new(203, &[]);
        let mut bad = 0;
        for _ in 0..1000 {
            let t = rng.random_range(1..=20);
            let r: Vec<f64> = (0..t).map(|_| f64::from(rng.random_range(0..50u32))).collect();
            let rv = RiskVector::new(r)?;
            let alpha = rng.random_range(0.01..=0.3);
            if Composer::alpha_minimax(alpha)?.compose(&rv)? != rv.max() {
                bad += 1;
            }
        }
        Ok((bad == 0, format!("{bad} of 1000 integer-gap vectors differ from max")))
    })
}

/// First-order inequalities `f(y) >= f(x) + g(x).(y - x)` for composers and
/// training losses, 10 000 in total.
pub fn subgradient_validity() -> Check {
    Check::timed("subgradient first-order inequality", || {
        let mut rng = KeyedRng::new(204, &[]);
        let mut violations = 0;
        let mut worst = f64::NEG_INFINITY;
        for i in 0..5000 {
            let t = rng.random_range(1..=12);
            let composer = match i % 5 {
                0 => Composer::mean(),
                1 => {
                    let raw: Vec<f64> = (0..t).map(|_| rng.random_range(0.0..1.0)).collect();
                    let total: f64 = raw.iter().sum();
                    let mut p: Vec<f64> = raw.iter().map(|v| v / total).collect();
                    let head: f64 = p[..t - 1].iter().sum();
                    p[t - 1] = 1.0 - head;
                    Composer::weighted(p).unwrap_or_else(|_| Composer::mean())
                }
                2 => Composer::L2,
                3 => Composer::Max,
                _ => Composer::alpha_minimax(rng.random_range(0.1..2.0 * t as f64))?,
            };
            // ties are where subgradients are most fragile
            let mut x: Vec<f64> = (0..t).map(|_| f64::from(rng.random_range(0..6u32))).collect();
            if rng.random_bool(0.5) {
                x = x.iter().map(|v| v + rng.random_range(0.0..1.0)).collect();
            }
            let y: Vec<f64> = x.iter().map(|v| (v + rng.random_range(-2.0..2.0)).max(0.0)).collect();
            let (rx, ry) = (RiskVector::new(x.clone())?, RiskVector::new(y.clone())?);
            let g = composer.subgradient(&rx)?;
            let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            let slack = composer.compose(&rx)? + lin - composer.compose(&ry)?;
            worst = worst.max(slack);
            if slack > 1e-10 {
                violations += 1;
            }
        }
        for i in 0..5000 {
            let (kind, label) = if i % 2 == 0 {
                (LossKind::SQUARED, rng.random_range(-3.0..3.0))
            } else {
                (LossKind::HINGE, if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            };
            // include the hinge kink
            let p = if i % 10 == 1 { label } else { rng.random_range(-4.0..4.0) };
            let q = rng.random_range(-4.0..4.0);
            let slack = kind.loss(p, label)? + kind.subderivative(p, label)? * (q - p) - kind.loss(q, label)?;
            worst = worst.max(slack);
            if slack > 1e-10 {
                violations += 1;
            }
        }
        Ok((violations == 0, format!("{violations} violations in 10000 checks, worst slack {worst:.2e}")))
    })
}

fn oracle_instance(key: u64) -> MultiTaskDataset {
    let mut rng = KeyedRng::new(7, &[key]);
    let d = 1 + (key % 2) as usize;
    let t = 1 + (key % 3) as usize;
    let per_task = (0..t)
        .map(|_| {
            (0..rng.random_range(2..6))
                .map(|_| LabeledExample::new(random_vec(&mut rng, d, 1.0), rng.random_range(-2.0..2.0)))
                .collect()
        })
        .collect();
    MultiTaskDataset::from_examples(per_task, d, ProblemKind::Regression).expect("valid instance")
}

/// Budget for oracle comparisons: the plateau test waits long enough for
/// the minimax iterates to settle.
pub fn oracle_solve_config() -> SolveConfig {
    SolveConfig { max_iters: 4000, patience: 1000, ..SolveConfig::default() }
}

pub fn solver_matches_oracle() -> Check {
    Check::timed("solver vs exhaustive minimum", || {
        let (tau0, tau1) = (1.0, 0.5);
        let config = ModelConfig::Ep(EpConfig::Constrained { tau0, tau1 });
        let cfg = oracle_solve_config();
        let mut worst = f64::NEG_INFINITY;
        let mut below = 0.0f64;
        for key in 0..20 {
            let data = oracle_instance(key);
            for composer in [Composer::mean(), Composer::L2, Composer::Max, Composer::alpha_minimax(1.5)?] {
                let (_, report) = solve(&data, &config, &composer, LossKind::SQUARED, &cfg)?;
                let gap = report.best_objective - ep_constrained_optimum(&data, tau0, tau1, &composer)?;
                worst = worst.max(gap);
                below = below.min(gap);
            }
        }
        Ok((
            worst <= 1e-3 && below >= -1e-6,
            format!("objective gap in [{below:.2e}, {worst:.2e}] over 20 instances x 4 composers"),
        ))
    })
}

/// A fixed three-task instance in two dimensions.
pub fn toy_instance() -> MultiTaskDataset {
    oracle_instance(5)
}

pub fn alpha_regimes_match_endpoints() -> Check {
    Check::timed("alpha regimes at the solver level", || {
        let data = toy_instance();
        let t = data.num_tasks() as f64;
        let config = ModelConfig::Ep(EpConfig::Constrained { tau0: 1.0, tau1: 0.5 });
        let cfg = oracle_solve_config();
        let run = |c: &Composer| solve(&data, &config, c, LossKind::SQUARED, &cfg).map(|(_, r)| r.best_objective);
        let l1 = run(&Composer::mean())?;
        let alpha = t + 1.0;
        let large = run(&Composer::alpha_minimax(alpha)?)?;
        let max = run(&Composer::Max)?;
        let small = run(&Composer::alpha_minimax(0.3)?)?;
        let (d1, d2) = ((large - t / alpha * l1).abs(), (small - max).abs());
        Ok((
            d1 <= 2e-3 && d2 <= 2e-3,
            format!("|phi_{alpha} - (T/alpha) l1| = {d1:.2e}, |phi_0.3 - max| = {d2:.2e}"),
        ))
    })
}

pub const THEORY_TASKS: [usize; 3] = [25, 50, 100];

pub fn tail_bound_default_environment() -> Check {
    Check::timed("tail bound on the default environment", || {
        let env = FiniteEnvironment::default();
        let cfg = TailBoundConfig::default();
        let mut detail = Vec::new();
        let mut holds = true;
        let mut tails = Vec::new();
        for t in THEORY_TASKS {
            let r = verify_tail_bound(&env, t, &cfg)?;
            holds &= r.lemma_holds;
            tails.push(r.mean_tail_estimate);
            detail.push(format!(
                "T={t}: violations {:.3} <= {:.3}, mean tail {:.4}, skipped {:.1}%",
                r.empirical_tail_freq,
                r.allowed_freq,
                r.mean_tail_estimate,
                100.0 * r.skip_rate
            ));
        }
        let ts: Vec<f64> = THEORY_TASKS.iter().map(|&t| t as f64).collect();
        let rho = spearman(&ts, &tails)?;
        detail.push(format!("spearman(T, tail) = {rho:.2}"));
        Ok((holds && rho < 0.0, detail.join("; ")))
    })
}
