//! Brute-force reference solutions for tiny instances.

use crate::composition::Composer;
use crate::linalg::{svd, svt, trace_norm, Matrix};
use crate::error::{Error, Result};
use crate::task::{MultiTaskDataset, RiskVector};

/// Quadratic form of a task's squared-loss risk:
/// `risk(w) = w'Aw - 2b'w + c` for `d <= 2`.
/// Risks are evaluated from the rows directly to avoid cancellation.
#[derive(Debug, Clone)]
struct Quadratic {
    a: [[f64; 2]; 2],
    b: [f64; 2],
    rows: Vec<([f64; 2], f64)>,
}

impl Quadratic {
    fn fit(data: &MultiTaskDataset, t: usize) -> Result<Self> {
        let task = data.task(t)?;
        let mut q = Quadratic { a: [[0.0; 2]; 2], b: [0.0; 2], rows: Vec::new() };
        let n = task.len() as f64;
        for ex in &task.examples {
            let x = [ex.x[0], *ex.x.get(1).unwrap_or(&0.0)];
            for i in 0..2 {
                for j in 0..2 {
                    q.a[i][j] += x[i] * x[j] / n;
                }
                q.b[i] += ex.y * x[i] / n;
            }
            q.rows.push((x, ex.y));
        }
        Ok(q)
    }

    fn eval(&self, w: [f64; 2]) -> f64 {
        let n = self.rows.len() as f64;
        self.rows.iter().map(|(x, y)| (x[0] * w[0] + x[1] * w[1] - y).powi(2)).sum::<f64>() / n
    }

    /// Minimum over the disk `|w - center| <= radius` through the
    /// trust-region secular equation, solved by bisection.
    fn min_over_disk(&self, center: [f64; 2], radius: f64) -> f64 {
        // u minimizes u'Au + 2 u'q with q = A c - b
        let q = [
            self.a[0][0] * center[0] + self.a[0][1] * center[1] - self.b[0],
            self.a[1][0] * center[0] + self.a[1][1] * center[1] - self.b[1],
        ];
        // closed-form eigenpairs of the symmetric 2x2 matrix A
        let (p, r, h) = (self.a[0][0], self.a[1][1], self.a[0][1]);
        let mid = 0.5 * (p + r);
        let rad = (0.25 * (p - r) * (p - r) + h * h).sqrt();
        let theta = 0.5 * (2.0 * h).atan2(p - r);
        let e = [[theta.cos(), theta.sin()], [-theta.sin(), theta.cos()]];
        let lam = [mid + rad, mid - rad];
        let floor = 1e-12 * (1.0 + p.abs() + r.abs());
        let step = |mu: f64| -> [f64; 2] {
            let mut u = [0.0; 2];
            for i in 0..2 {
                let qi = q[0] * e[i][0] + q[1] * e[i][1];
                let denom = lam[i] + mu;
                // a flat direction with no pull contributes nothing
                let c = if denom <= floor { 0.0 } else { -qi / denom };
                u[0] += c * e[i][0];
                u[1] += c * e[i][1];
            }
            u
        };
        let norm = |u: [f64; 2]| u[0].hypot(u[1]);
        let at = |u: [f64; 2]| self.eval([center[0] + u[0], center[1] + u[1]]);
        let flat_pull = (0..2).any(|i| lam[i] <= floor && (q[0] * e[i][0] + q[1] * e[i][1]).abs() > floor);
        let interior = step(0.0);
        if !flat_pull && norm(interior) <= radius {
            return at(interior);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while norm(step(hi)) > radius {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm(step(mid)) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = step(hi);
        let s = radius / norm(u).max(radius);
        at([u[0] * s, u[1] * s])
    }
}

/// Golden-section minimum of a convex function on `[lo, hi]`.
fn golden(lo: f64, hi: f64, f: &mut dyn FnMut(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..90 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2).min(f(lo)).min(f(hi))
}

/// Optimal objective of constrained EP with squared loss on an instance with
/// `d <= 2`.
///
/// The task blocks decouple once `v0` is fixed, and every composer is
/// nondecreasing in each risk, so the optimum is
/// `min_{|v0| <= tau0} phi(g_1(v0), ..., g_T(v0))` with
/// `g_t(v0) = min_{|v_t| <= tau1} risk_t(v0 + v_t)`. The inner minima are
/// solved exactly and the outer convex problem by nested golden-section
/// search over the disk.
pub fn ep_constrained_optimum(
    data: &MultiTaskDataset,
    tau0: f64,
    tau1: f64,
    composer: &Composer,
) -> Result<f64> {
    let d = data.dim();
    if d == 0 || d > 2 {
        return Err(Error::InvalidParameter(format!("oracle supports d in 1..=2, got {d}")));
    }
    let quads = (0..data.num_tasks())
        .map(|t| {
            let mut q = Quadratic::fit(data, t)?;
            if d == 1 {
                // a unit curvature on the dummy axis keeps the solve regular
                q.a[1][1] = 1.0;
            }
            Ok(q)
        })
        .collect::<Result<Vec<_>>>()?;
    let outer = |v0: [f64; 2]| -> f64 {
        let r: Vec<f64> = quads.iter().map(|q| q.min_over_disk(v0, tau1)).collect();
        composer
            .compose(&RiskVector::new(r).expect("finite risks"))
            .expect("length-compatible composer")
    };
    if d == 1 {
        return Ok(golden(-tau0, tau0, &mut |x| outer([x, 0.0])));
    }
    Ok(golden(-tau0, tau0, &mut |x| {
        let h = (tau0 * tau0 - x * x).max(0.0).sqrt();
        golden(-h, h, &mut |y| outer([x, y]))
    }))
}

/// Objective value on a plain grid over the feasible set of a `d = 1`
/// instance: `v0` and every `v_t` on `steps + 1` evenly spaced points.
pub fn ep_constrained_grid_1d(
    data: &MultiTaskDataset,
    tau0: f64,
    tau1: f64,
    composer: &Composer,
    steps: usize,
) -> Result<f64> {
    if data.dim() != 1 {
        return Err(Error::InvalidParameter("grid oracle needs d = 1".into()));
    }
    let grid = |r: f64| (0..=steps).map(move |i| -r + 2.0 * r * i as f64 / steps as f64);
    let mut best = f64::INFINITY;
    for v0 in grid(tau0) {
        // per task, the best offset on the grid, since the composer is monotone
        let risks = data
            .tasks()
            .iter()
            .map(|task| {
                grid(tau1)
                    .map(|vt| {
                        task.examples.iter().map(|e| ((v0 + vt) * e.x[0] - e.y).powi(2)).sum::<f64>()
                            / task.len() as f64
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        best = best.min(composer.compose(&RiskVector::new(risks)?)?);
    }
    Ok(best)
}

fn bisect(mut lo: f64, mut hi: f64, too_small: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if too_small(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ball projection through the Lagrangian: `x = v / (1 + mu)` with `mu >= 0`
/// found by bisection on `|x| = radius`.
pub fn l2_ball_by_bisection(v: &[f64], radius: f64) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n <= radius {
        return v.to_vec();
    }
    let mu = bisect(0.0, n / radius.max(f64::MIN_POSITIVE), |mu| n / (1.0 + mu) > radius);
    v.iter().map(|x| x / (1.0 + mu)).collect()
}

/// Projection onto `{ s >= 0, sum(s) <= radius }` by enumerating every
/// support set with the sum constraint both inactive and active, keeping the
/// closest feasible candidate. Exponential in the length.
pub fn simplex_by_enumeration(s: &[f64], radius: f64) -> Vec<f64> {
    let n = s.len();
    assert!(n <= 16, "enumeration oracle is for short vectors");
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |x: Vec<f64>| {
        let feasible = x.iter().all(|&v| v >= -1e-12) && x.iter().sum::<f64>() <= radius + 1e-12;
        if feasible {
            let d: f64 = x.iter().zip(s).map(|(a, b)| (a - b).powi(2)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, x));
            }
        }
    };
    for mask in 0u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let free: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { s[i] } else { 0.0 }).collect();
        consider(free.clone());
        if !support.is_empty() {
            let theta = (support.iter().map(|&i| s[i]).sum::<f64>() - radius) / support.len() as f64;
            let shifted = (0..n).map(|i| if mask >> i & 1 == 1 { s[i] - theta } else { 0.0 }).collect();
            consider(shifted);
        }
    }
    best.expect("zero vector is always feasible").1
}

/// Trace-ball projection as singular value thresholding at the level
/// `theta` that puts the result on the sphere, found by bisection.
pub fn trace_ball_by_threshold_search(w: &Matrix, radius: f64) -> Result<Matrix> {
    let total = trace_norm(w)?;
    if total <= radius {
        return Ok(w.clone());
    }
    let top = svd(w)?.s.first().copied().unwrap_or(0.0);
    let tr_at = |theta: f64| svt(w, theta).and_then(|m| trace_norm(&m)).unwrap_or(f64::NAN);
    let theta = bisect(0.0, top, |t| tr_at(t) > radius);
    svt(w, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::KeyedRng;
    use crate::task::{LabeledExample, ProblemKind};
    use rand::Rng;

    fn random_instance(key: u64, d: usize, tasks: usize) -> MultiTaskDataset {
        let mut rng = KeyedRng::new(41, &[key]);
        let per_task = (0..tasks)
            .map(|_| {
                let m = rng.random_range(1..5);
                (0..m)
                    .map(|_| {
                        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                        LabeledExample::new(x, rng.random_range(-3.0..3.0))
                    })
                    .collect()
            })
            .collect();
        MultiTaskDataset::from_examples(per_task, d, ProblemKind::Regression).unwrap()
    }

    #[test]
    fn golden_and_plain_grid_agree_in_one_dimension() {
        for key in 0..10 {
            let data = random_instance(key, 1, 3);
            for composer in [Composer::mean(), Composer::Max, Composer::L2] {
                let exact = ep_constrained_optimum(&data, 1.0, 0.5, &composer).unwrap();
                let grid = ep_constrained_grid_1d(&data, 1.0, 0.5, &composer, 2000).unwrap();
                assert!(exact <= grid + 1e-12);
                assert!(grid - exact < 5e-3, "{grid} vs {exact}");
            }
        }
    }

    #[test]
    fn disk_minimum_matches_angle_scan() {
        for key in 0..20 {
            let data = random_instance(key, 2, 1);
            let q = Quadratic::fit(&data, 0).unwrap();
            let center = [0.3, -0.2];
            let exact = q.min_over_disk(center, 0.7);
            let mut scan = f64::INFINITY;
            for i in 0..=200 {
                for j in 0..720 {
                    let rad = 0.7 * i as f64 / 200.0;
                    let th = j as f64 * std::f64::consts::TAU / 720.0;
                    scan = scan.min(q.eval([center[0] + rad * th.cos(), center[1] + rad * th.sin()]));
                }
            }
            assert!(exact <= scan + 1e-10, "{exact} {scan} {key}");
            assert!(scan - exact < 1e-3);
        }
    }
}
