//! One-sided Jacobi (Hestenes) singular value decomposition.

use super::Matrix;
use crate::error::{Error, Result};

/// Relative off-diagonal tolerance for a column pair to count as orthogonal.
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Thin SVD `A = U · diag(S) · Vᵀ` with `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    /// Nonincreasing, nonnegative.
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    /// `U · diag(values) · Vᵀ` for a replacement spectrum.
    pub fn reconstruct_with(&self, values: &[f64]) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = Matrix::zeros(m, n);
        for (j, sigma) in values.iter().enumerate() {
            if *sigma == 0.0 {
                continue;
            }
            for i in 0..m {
                let ui = self.u[(i, j)] * sigma;
                if ui == 0.0 {
                    continue;
                }
                let row = out.row_mut(i);
                for (l, r) in row.iter_mut().enumerate() {
                    *r += ui * self.v[(l, j)];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(&self.s)
    }
}

/// Sum of singular values.
pub fn trace_norm(a: &Matrix) -> Result<f64> {
    Ok(svd(a)?.s.iter().sum())
}

pub fn svd(a: &Matrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    if a.rows() >= a.cols() {
        let (carrier, norms, rotation) = jacobi_tall(a);
        Ok(finish(carrier, norms, rotation, true, a.rows(), a.cols()))
    } else {
        let (carrier, norms, rotation) = jacobi_tall(&a.transpose());
        Ok(finish(carrier, norms, rotation, false, a.rows(), a.cols()))
    }
}

/// Orthogonalizes the columns of a tall `a` (rows >= cols). Returns the
/// rotated columns (not yet normalized), their norms, and the accumulated
/// right rotation as columns.
fn jacobi_tall(a: &Matrix) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for i in 0..m {
                        alpha += cp[i] * cp[i];
                        beta += cq[i] * cq[i];
                        gamma += cp[i] * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    (cols, norms, v)
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Sorts, normalizes, completes the carrier basis where columns vanished,
/// and fixes signs so the first nonzero entry of each right vector is
/// positive.
///
/// `carrier` holds the rotated, unnormalized columns and `rotation` the
/// accumulated orthonormal rotation. For tall inputs the carrier is the left
/// side; for wide inputs (factored through the transpose) it is the right.
fn finish(
    carrier: Vec<Vec<f64>>,
    norms: Vec<f64>,
    rotation: Vec<Vec<f64>>,
    carrier_is_left: bool,
    rows: usize,
    cols: usize,
) -> SvdResult {
    let k = norms.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let mut carrier: Vec<Vec<f64>> = order.iter().map(|&i| carrier[i].clone()).collect();
    let rotation: Vec<Vec<f64>> = order.iter().map(|&i| rotation[i].clone()).collect();

    let negligible = s.first().copied().unwrap_or(0.0) * 1e-14;
    let mut degenerate = Vec::new();
    for (j, col) in carrier.iter_mut().enumerate() {
        if s[j] > negligible && s[j] > 0.0 {
            col.iter_mut().for_each(|x| *x /= s[j]);
        } else {
            degenerate.push(j);
        }
    }
    if !degenerate.is_empty() {
        complete_basis(&mut carrier, &degenerate);
    }

    let (mut u_cols, mut v_cols) = if carrier_is_left {
        (carrier, rotation)
    } else {
        (rotation, carrier)
    };
    for j in 0..k {
        let first = v_cols[j].iter().find(|x| x.abs() > 1e-14).copied();
        if first.is_some_and(|x| x < 0.0) {
            v_cols[j].iter_mut().for_each(|x| *x = -*x);
            u_cols[j].iter_mut().for_each(|x| *x = -*x);
        }
    }

    SvdResult {
        u: Matrix::from_columns(&u_cols, rows),
        s,
        v: Matrix::from_columns(&v_cols, cols),
    }
}

/// Replaces the columns at `slots` with unit vectors orthogonal to every
/// other column, drawing candidates from the standard basis.
fn complete_basis(cols: &mut [Vec<f64>], slots: &[usize]) {
    let len = cols.first().map_or(0, Vec::len);
    let mut candidate = 0;
    for &slot in slots {
        loop {
            assert!(candidate < len, "basis completion ran out of candidates");
            let mut e = vec![0.0; len];
            e[candidate] = 1.0;
            candidate += 1;
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for (j, c) in cols.iter().enumerate() {
                    if j == slot || (slots.contains(&j) && j > slot) {
                        continue;
                    }
                    let d: f64 = c.iter().zip(&e).map(|(a, b)| a * b).sum();
                    for (x, y) in e.iter_mut().zip(c) {
                        *x -= d * y;
                    }
                }
            }
            let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-6 {
                e.iter_mut().for_each(|x| *x /= n);
                cols[slot] = e;
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::KeyedRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random(rows: usize, cols: usize, key: u64) -> Matrix {
        let mut rng = KeyedRng::new(99, &[key]);
        let data = (0..rows * cols).map(|_| StandardNormal.sample(&mut rng)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    fn orthonormality_error(m: &Matrix) -> f64 {
        let g = m.transpose().matmul(m).unwrap();
        g.sub(&Matrix::identity(m.cols())).unwrap().frobenius_norm()
    }

    fn check(a: &Matrix) -> SvdResult {
        let r = svd(a).unwrap();
        let k = a.rows().min(a.cols());
        assert_eq!(r.s.len(), k);
        assert_eq!(r.u.shape(), (a.rows(), k));
        assert_eq!(r.v.shape(), (a.cols(), k));
        assert!(orthonormality_error(&r.u) < 1e-8, "U not orthonormal");
        assert!(orthonormality_error(&r.v) < 1e-8, "V not orthonormal");
        assert!(r.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(r.s.iter().all(|s| *s >= 0.0));
        let err = r.reconstruct().sub(a).unwrap().frobenius_norm();
        assert!(err < 1e-8, "reconstruction error {err}");
        r
    }

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(check(&Matrix::identity(3)).s, vec![1.0, 1.0, 1.0]);
        let r = check(&Matrix::diag(&[1.0, 3.0]));
        assert_eq!(r.s, vec![3.0, 1.0]);
        // signed permutation of the identity
        assert_eq!(r.v.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(r.u.as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn random_shapes_reconstruct() {
        for (i, (m, n)) in [(5, 4), (4, 5), (1, 6), (6, 1), (7, 7), (30, 12), (12, 30)]
            .into_iter()
            .enumerate()
        {
            check(&random(m, n, i as u64));
        }
    }

    #[test]
    fn rank_deficient_inputs_get_a_complete_basis() {
        check(&Matrix::zeros(3, 2));
        check(&Matrix::zeros(2, 4));
        // rank one
        let a = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        let r = check(&a);
        assert!(r.s[1] < 1e-12);
        let low = random(6, 2, 7).matmul(&random(2, 5, 8)).unwrap();
        let r = check(&low);
        assert!(r.s[2] < 1e-10);
    }

    #[test]
    fn right_vectors_follow_sign_convention() {
        let r = svd(&random(5, 4, 3)).unwrap();
        for j in 0..4 {
            let first = r.v.column(j).into_iter().find(|x| x.abs() > 1e-14).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut a = Matrix::identity(2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(svd(&a), Err(Error::NonFinite(_))));
    }
}
