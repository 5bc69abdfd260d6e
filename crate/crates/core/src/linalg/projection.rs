//! Euclidean projections and proximal maps used by the model constraint
//! sets.

use super::{svd, Matrix};
use crate::error::{Error, Result};
use crate::task::norm;

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )));
    }
    Ok(())
}

/// Nearest point of the centered Euclidean ball of radius `radius`.
pub fn project_l2_ball(v: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_radius(radius)?;
    let n = norm(v);
    if n <= radius {
        return Ok(v.to_vec());
    }
    let s = radius / n;
    Ok(v.iter().map(|x| x * s).collect())
}

/// In-place variant of [`project_l2_ball`].
pub(crate) fn project_l2_ball_in_place(v: &mut [f64], radius: f64) {
    let n = norm(v);
    if n > radius {
        let s = radius / n;
        v.iter_mut().for_each(|x| *x *= s);
    }
}

/// Projection onto `{ s >= 0, sum(s) <= radius }` by sort and threshold.
pub fn project_simplex_scaled(s: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_radius(radius)?;
    let clamped: Vec<f64> = s.iter().map(|x| x.max(0.0)).collect();
    if clamped.iter().sum::<f64>() <= radius {
        return Ok(clamped);
    }
    let mut sorted = s.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - radius) / (k + 1) as f64;
        if *x > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    Ok(s.iter().map(|x| (x - theta).max(0.0)).collect())
}

/// Nearest point (Frobenius) of the trace-norm ball of radius `radius`.
pub fn project_trace_ball(w: &Matrix, radius: f64) -> Result<Matrix> {
    check_radius(radius)?;
    let dec = svd(w)?;
    if dec.s.iter().sum::<f64>() <= radius {
        return Ok(w.clone());
    }
    let shrunk = project_simplex_scaled(&dec.s, radius)?;
    Ok(dec.reconstruct_with(&shrunk))
}

/// Singular value soft-thresholding: the proximal map of
/// `threshold * ||.||_tr`.
pub fn svt(w: &Matrix, threshold: f64) -> Result<Matrix> {
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be nonnegative, got {threshold}"
        )));
    }
    let dec = svd(w)?;
    let shrunk: Vec<f64> = dec.s.iter().map(|s| (s - threshold).max(0.0)).collect();
    Ok(dec.reconstruct_with(&shrunk))
}
