//! Risk composers: functions that fold the vector of per-task empirical
//! risks into a single training objective.
//!
//! Four families are provided: a prior-weighted mean (classical MTL), the
//! scaled Euclidean norm, the hard maximum (minimax MTL), and the
//! alpha-minimax relaxation
//!
//! ```text
//! phi_alpha(r) = min_{b >= 0}  b + (1/alpha) * sum_t max(0, r_t - b)
//! ```
//!
//! whose inner minimization over `b` is solved exactly by a sort and a
//! breakpoint scan. For `alpha >= T` it equals `sum(r) / alpha`; for
//! `alpha < 1` it equals `max(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::RiskVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskWeights {
    Uniform,
    Prior(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composer {
    WeightedL1(TaskWeights),
    L2,
    Max,
    AlphaMinimax(f64),
}

/// Minimizer of the alpha-minimax inner problem for a fixed risk vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMinimaxSolution {
    /// Relaxed maximum.
    pub b_star: f64,
    /// Per-task excess over `b_star`.
    pub xi: Vec<f64>,
    pub value: f64,
}

impl Composer {
    /// Classical MTL: the plain mean of the risks.
    pub fn mean() -> Self {
        Composer::WeightedL1(TaskWeights::Uniform)
    }

    pub fn weighted(prior: Vec<f64>) -> Result<Self> {
        if prior.is_empty() || prior.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "task prior entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "task prior must sum to 1, sums to {total}"
            )));
        }
        Ok(Composer::WeightedL1(TaskWeights::Prior(prior)))
    }

    pub fn alpha_minimax(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Composer::AlphaMinimax(alpha))
    }

    /// Short label used in result files.
    pub fn label(&self) -> String {
        match self {
            Composer::WeightedL1(TaskWeights::Uniform) => "l1".into(),
            Composer::WeightedL1(TaskWeights::Prior(_)) => "weighted_l1".into(),
            Composer::L2 => "l2".into(),
            Composer::Max => "minimax".into(),
            Composer::AlphaMinimax(a) => format!("alpha_minimax({a})"),
        }
    }

    fn check(&self, r: &RiskVector) -> Result<()> {
        match self {
            Composer::WeightedL1(TaskWeights::Prior(p)) if p.len() != r.len() => {
                Err(Error::LengthMismatch {
                    expected: p.len(),
                    found: r.len(),
                })
            }
            Composer::AlphaMinimax(a) => check_alpha(*a),
            _ if r.is_empty() => Err(Error::InvalidParameter("empty risk vector".into())),
            _ => Ok(()),
        }
    }

    pub fn compose(&self, r: &RiskVector) -> Result<f64> {
        self.check(r)?;
        let v = r.values();
        Ok(match self {
            Composer::WeightedL1(TaskWeights::Uniform) => r.mean(),
            Composer::WeightedL1(TaskWeights::Prior(p)) => {
                p.iter().zip(v).map(|(w, x)| w * x).sum()
            }
            Composer::L2 => {
                v.iter().map(|x| x * x).sum::<f64>().sqrt() / (v.len() as f64).sqrt()
            }
            Composer::Max => r.max(),
            Composer::AlphaMinimax(a) => inner_minimize_b(*a, r)?.value,
        })
    }

    /// An element of the subdifferential of the composer at `r`.
    ///
    /// For alpha-minimax this is the maximizing dual weight vector
    /// `argmax { w . r : 0 <= w_t <= 1/alpha, sum w <= 1 }`, filled greedily
    /// in descending risk order (lowest index first on ties).
    pub fn subgradient(&self, r: &RiskVector) -> Result<Vec<f64>> {
        self.check(r)?;
        let v = r.values();
        let t = v.len();
        Ok(match self {
            Composer::WeightedL1(TaskWeights::Uniform) => vec![1.0 / t as f64; t],
            Composer::WeightedL1(TaskWeights::Prior(p)) => p.clone(),
            Composer::L2 => {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n == 0.0 {
                    vec![0.0; t]
                } else {
                    let scale = 1.0 / ((t as f64).sqrt() * n);
                    v.iter().map(|x| x * scale).collect()
                }
            }
            Composer::Max => {
                let mut g = vec![0.0; t];
                g[argmax(v)] = 1.0;
                g
            }
            Composer::AlphaMinimax(a) => {
                let cap = 1.0 / a;
                let mut g = vec![0.0; t];
                let mut remaining = 1.0;
                for i in descending_order(v) {
                    if remaining <= 0.0 {
                        break;
                    }
                    if remaining >= cap {
                        g[i] = cap;
                        remaining -= cap;
                    } else {
                        g[i] = remaining;
                        remaining = 0.0;
                    }
                }
                g
            }
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(())
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Indices sorted by descending value; ties keep ascending index order.
fn descending_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].total_cmp(&v[i]).then(i.cmp(&j)));
    idx
}

/// Exact solution of `min_{b >= 0} b + (1/alpha) sum_t max(0, r_t - b)`.
///
/// The right slope on `[r_(k+1), r_(k))` is `1 - k/alpha`, so the smallest
/// minimizer is the `(floor(alpha)+1)`-th largest risk, or 0 once
/// `alpha >= T`.
pub fn inner_minimize_b(alpha: f64, r: &RiskVector) -> Result<AlphaMinimaxSolution> {
    check_alpha(alpha)?;
    let v = r.values();
    let t = v.len();
    let b_star = if alpha >= t as f64 {
        0.0
    } else {
        let mut sorted = v.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        // alpha < t, so floor(alpha) <= t - 1
        sorted[alpha.floor() as usize]
    };
    let xi: Vec<f64> = v.iter().map(|x| (x - b_star).max(0.0)).collect();
    let value = b_star + xi.iter().sum::<f64>() / alpha;
    Ok(AlphaMinimaxSolution { b_star, xi, value })
}

/// Harmonic mean of `ceil(level*T + 0.5)` and `ceil(level*T + 1.5)`: the
/// alpha that lets the relaxed maximum ignore roughly the hardest `level`
/// fraction of tasks.
pub fn default_alpha(tasks: usize, level: f64) -> Result<f64> {
    if tasks == 0 {
        return Err(Error::InvalidParameter("need at least one task".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level must lie in (0, 1), got {level}"
        )));
    }
    let lt = level * tasks as f64;
    let lo = (lt + 0.5).ceil();
    let hi = (lt + 1.5).ceil();
    Ok(2.0 / (1.0 / lo + 1.0 / hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rv(v: &[f64]) -> RiskVector {
        RiskVector::new(v.to_vec()).unwrap()
    }

    /// Grid scan of the inner objective over `[0, max r]`.
    fn grid_scan(alpha: f64, r: &[f64], step: f64) -> (f64, f64) {
        let hi = r.iter().copied().fold(0.0, f64::max);
        let n = (hi / step).ceil() as usize;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=n {
            let b = (k as f64 * step).min(hi);
            let val = b + r.iter().map(|x| (x - b).max(0.0)).sum::<f64>() / alpha;
            if val < best.0 {
                best = (val, b);
            }
        }
        best
    }

    #[test]
    fn grid_oracle_confirms_frozen_alpha_values() {
        for (alpha, r, value, b) in [
            (2.0, vec![0.0, 0.0, 10.0], 5.0, 0.0),
            (0.5, vec![0.0, 0.0, 10.0], 10.0, 10.0),
            (1.5, vec![4.0, 2.0, 1.0], 10.0 / 3.0, 2.0),
            (4.0, vec![1.0, 2.0, 3.0], 1.5, 0.0),
        ] {
            let (gv, gb) = grid_scan(alpha, &r, 1e-3);
            assert!((gv - value).abs() < 1e-9, "grid {gv} vs frozen {value}");
            assert!((gb - b).abs() < 1e-9);
        }
    }

    #[test]
    fn compose_examples() {
        let mean = Composer::mean();
        assert!((mean.compose(&rv(&[1.0, 2.0, 3.0])).unwrap() - 2.0).abs() < 1e-15);
        let l2 = Composer::L2.compose(&rv(&[3.0, 4.0])).unwrap();
        assert!((l2 - 5.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(Composer::Max.compose(&rv(&[1.0, 2.0, 3.0])).unwrap(), 3.0);

        let am = |a: f64, r: &[f64]| Composer::AlphaMinimax(a).compose(&rv(r)).unwrap();
        assert!((am(2.0, &[0.0, 0.0, 10.0]) - 5.0).abs() < 1e-12);
        assert!((am(0.5, &[0.0, 0.0, 10.0]) - 10.0).abs() < 1e-12);
        assert!((am(1.5, &[4.0, 2.0, 1.0]) - 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn inner_minimize_examples() {
        let s = inner_minimize_b(4.0, &rv(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(s.b_star, 0.0);
        assert!((s.value - 1.5).abs() < 1e-12);

        let s = inner_minimize_b(2.0, &rv(&[0.0, 0.0, 10.0])).unwrap();
        assert_eq!(s.b_star, 0.0);
        assert_eq!(s.xi, vec![0.0, 0.0, 10.0]);
        assert!((s.value - 5.0).abs() < 1e-12);

        let s = inner_minimize_b(1.5, &rv(&[4.0, 2.0, 1.0])).unwrap();
        assert_eq!(s.b_star, 2.0);
        assert_eq!(s.xi, vec![2.0, 0.0, 0.0]);
        assert!((s.value - 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn subgradient_examples() {
        assert_eq!(
            Composer::Max.subgradient(&rv(&[1.0, 3.0, 3.0])).unwrap(),
            vec![0.0, 1.0, 0.0]
        );
        assert_eq!(
            Composer::mean().subgradient(&rv(&[5.0, 1.0, 2.0, 0.0])).unwrap(),
            vec![0.25; 4]
        );
        // Full weight 1/alpha on the task above b*, remaining mass on the
        // breakpoint task; see the first-order check below.
        let g = Composer::AlphaMinimax(1.5)
            .subgradient(&rv(&[4.0, 2.0, 1.0]))
            .unwrap();
        assert!((g[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((g[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(g[2], 0.0);
        assert_eq!(
            Composer::L2.subgradient(&rv(&[0.0, 0.0])).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn indicator_rule_fails_the_first_order_inequality() {
        // Weight only on tasks strictly above b* is not a subgradient: moving
        // the breakpoint task down lowers phi below the linear model.
        let phi = |r: &[f64]| Composer::AlphaMinimax(1.5).compose(&rv(r)).unwrap();
        let r = [4.0, 2.0, 1.0];
        let r2 = [4.0, 1.0, 1.0];
        let indicator = [2.0 / 3.0, 0.0, 0.0];
        let lin: f64 = phi(&r) + indicator.iter().zip(r2.iter().zip(&r)).map(|(g, (a, b))| g * (a - b)).sum::<f64>();
        assert!(phi(&r2) < lin - 1e-3);
    }

    #[test]
    fn errors() {
        let w = Composer::weighted(vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            w.compose(&rv(&[1.0, 2.0, 3.0])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(Composer::weighted(vec![0.5, 0.6]).is_err());
        assert!(Composer::alpha_minimax(0.0).is_err());
        assert!(Composer::AlphaMinimax(-1.0).compose(&rv(&[1.0])).is_err());
        assert!(inner_minimize_b(0.0, &rv(&[1.0])).is_err());
    }

    #[test]
    fn default_alpha_examples() {
        assert!((default_alpha(55, 0.1).unwrap() - 84.0 / 13.0).abs() < 1e-12);
        assert!((default_alpha(10, 0.1).unwrap() - 2.4).abs() < 1e-12);
        assert!((default_alpha(10, 0.2).unwrap() - 24.0 / 7.0).abs() < 1e-12);
        assert!(default_alpha(0, 0.1).is_err());
        assert!(default_alpha(10, 1.0).is_err());
    }

    fn risks() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0..10.0f64, 1..12)
    }

    fn composer_for(t: usize) -> impl Strategy<Value = Composer> {
        prop_oneof![
            Just(Composer::mean()),
            Just(Composer::L2),
            Just(Composer::Max),
            (0.05..(2.0 * t as f64)).prop_map(Composer::AlphaMinimax),
            prop::collection::vec(0.01..1.0f64, t).prop_map(|w| {
                let s: f64 = w.iter().sum();
                Composer::WeightedL1(TaskWeights::Prior(w.iter().map(|x| x / s).collect()))
            }),
        ]
    }

    fn composer_and_pair() -> impl Strategy<Value = (Composer, Vec<f64>, Vec<f64>)> {
        (1usize..10).prop_flat_map(|t| {
            (
                composer_for(t),
                prop::collection::vec(0.0..10.0f64, t),
                prop::collection::vec(0.0..10.0f64, t),
            )
        })
    }

    proptest! {
        #[test]
        fn inner_minimize_matches_grid_scan(r in risks(), alpha in 0.1..20.0f64) {
            let s = inner_minimize_b(alpha, &rv(&r)).unwrap();
            let (gv, _) = grid_scan(alpha, &r, 1e-4);
            // grid error is at most step * max(1, T/alpha)
            let slack = 1e-4 * (r.len() as f64 / alpha).max(1.0) + 1e-12;
            prop_assert!(s.value <= gv + 1e-12);
            prop_assert!(gv - s.value <= slack);
            for (x, xi) in r.iter().zip(&s.xi) {
                prop_assert_eq!(*xi, (x - s.b_star).max(0.0));
            }
        }

        #[test]
        fn composers_are_convex((c, a, b) in composer_and_pair(), lam in 0.0..1.0f64) {
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| lam * x + (1.0 - lam) * y).collect();
            let lhs = c.compose(&rv(&mix)).unwrap();
            let rhs = lam * c.compose(&rv(&a)).unwrap() + (1.0 - lam) * c.compose(&rv(&b)).unwrap();
            prop_assert!(lhs <= rhs + 1e-10);
        }

        #[test]
        fn composers_are_monotone((c, a, d) in composer_and_pair()) {
            let b: Vec<f64> = a.iter().zip(&d).map(|(x, y)| x + y).collect();
            prop_assert!(c.compose(&rv(&a)).unwrap() <= c.compose(&rv(&b)).unwrap() + 1e-10);
        }

        #[test]
        fn subgradient_inequality_holds((c, a, b) in composer_and_pair()) {
            let g = c.subgradient(&rv(&a)).unwrap();
            let lin: f64 = c.compose(&rv(&a)).unwrap()
                + g.iter().zip(b.iter().zip(&a)).map(|(gi, (y, x))| gi * (y - x)).sum::<f64>();
            prop_assert!(c.compose(&rv(&b)).unwrap() >= lin - 1e-10);
        }

        #[test]
        fn alpha_regime_endpoints(r in risks()) {
            let t = r.len() as f64;
            let big = Composer::AlphaMinimax(t + 0.5).compose(&rv(&r)).unwrap();
            prop_assert!((big - r.iter().sum::<f64>() / (t + 0.5)).abs() <= 1e-12 * (1.0 + big));
            let small = Composer::AlphaMinimax(0.3).compose(&rv(&r)).unwrap();
            prop_assert_eq!(small, rv(&r).max());
        }

        #[test]
        fn larger_alpha_never_increases_value(r in risks(), a in 0.05..10.0f64, da in 0.0..10.0f64) {
            let lo = Composer::AlphaMinimax(a).compose(&rv(&r)).unwrap();
            let hi = Composer::AlphaMinimax(a + da).compose(&rv(&r)).unwrap();
            prop_assert!(hi <= lo + 1e-12);
            prop_assert!(lo <= rv(&r).max() + 1e-12);
        }
    }
}
