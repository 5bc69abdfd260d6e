use super::{svd, Matrix};
use crate::error::{Error, Result};

/// A fitted principal component basis.
#[derive(Debug, Clone)]
pub struct PcaFit {
    /// Column means of the training matrix.
    pub mean: Vec<f64>,
    /// `d x k`, columns are the leading right singular vectors of the
    /// centered data.
    pub projection: Matrix,
    /// `n x k` scores of the training rows.
    pub reduced: Matrix,
    /// Leading singular values of the centered data.
    pub singular_values: Vec<f64>,
}

impl PcaFit {
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: x.len(),
            });
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        self.projection.tr_matvec(&centered)
    }

    pub fn dim(&self) -> usize {
        self.projection.cols()
    }
}

/// Centers the columns of `x` (no scaling) and projects onto the top `k`
/// principal directions.
///
/// When there are more rows than columns the basis is taken from the SVD of
/// the `d x d` scatter matrix, which shares its right singular vectors with
/// the centered data.
pub fn pca_fit_transform(x: &Matrix, k: usize) -> Result<PcaFit> {
    let (n, d) = x.shape();
    if k == 0 || k > n.min(d) {
        return Err(Error::InvalidParameter(format!(
            "pca dimension {k} out of range 1..={}",
            n.min(d)
        )));
    }
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = x.clone();
    for i in 0..n {
        for (v, m) in centered.row_mut(i).iter_mut().zip(&mean) {
            *v -= m;
        }
    }

    let (basis, singular_values) = if n > d {
        let scatter = centered.transpose().matmul(&centered)?;
        let dec = svd(&scatter)?;
        let sv = dec.s.iter().take(k).map(|s| s.max(0.0).sqrt()).collect();
        (dec.v, sv)
    } else {
        let dec = svd(&centered)?;
        (dec.v, dec.s[..k].to_vec())
    };
    let columns: Vec<Vec<f64>> = (0..k).map(|j| basis.column(j)).collect();
    let projection = Matrix::from_columns(&columns, d);
    let reduced = centered.matmul(&projection)?;
    Ok(PcaFit {
        mean,
        projection,
        reduced,
        singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::KeyedRng;
    use rand::Rng;

    fn random(n: usize, d: usize, key: u64) -> Matrix {
        let mut rng = KeyedRng::new(23, &[key]);
        let data = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(n, d, data).unwrap()
    }

    #[test]
    fn points_on_a_line() {
        let dir = [1.0 / 3f64.sqrt(); 3];
        let offs = [2.0, 1.0, -1.0];
        let ts = [-2.0, -0.5, 0.0, 1.0, 1.5];
        let rows: Vec<Vec<f64>> = ts
            .iter()
            .map(|t| (0..3).map(|j| offs[j] + t * dir[j]).collect())
            .collect();
        let fit = pca_fit_transform(&Matrix::from_rows(&rows).unwrap(), 1).unwrap();
        let tmean = ts.iter().sum::<f64>() / ts.len() as f64;
        let sign = fit.reduced[(0, 0)].signum() * (ts[0] - tmean).signum();
        for (i, t) in ts.iter().enumerate() {
            assert!((fit.reduced[(i, 0)] - sign * (t - tmean)).abs() < 1e-10);
        }
    }

    #[test]
    fn full_basis_reconstructs_centered_data() {
        for (n, d) in [(12, 4), (3, 5)] {
            let x = random(n, d, n as u64);
            let k = n.min(d);
            let fit = pca_fit_transform(&x, k).unwrap();
            let back = fit.reduced.matmul(&fit.projection.transpose()).unwrap();
            for i in 0..n {
                for j in 0..d {
                    let c = x[(i, j)] - fit.mean[j];
                    if k == d {
                        assert!((back[(i, j)] - c).abs() < 1e-8);
                    }
                }
            }
            if k < d {
                // n <= d: rank of centered data is at most n - 1 <= k
                let mut err = 0.0;
                for i in 0..n {
                    for j in 0..d {
                        err += (back[(i, j)] - (x[(i, j)] - fit.mean[j])).powi(2);
                    }
                }
                assert!(err.sqrt() < 1e-8);
            }
        }
    }

    #[test]
    fn captured_variance_matches_direct_svd() {
        let x = random(40, 6, 2);
        let k = 3;
        let fit = pca_fit_transform(&x, k).unwrap();
        let mut centered = x.clone();
        for i in 0..40 {
            for (v, m) in centered.row_mut(i).iter_mut().zip(&fit.mean) {
                *v -= m;
            }
        }
        let s = svd(&centered).unwrap().s;
        let captured: f64 = fit.reduced.as_slice().iter().map(|v| v * v).sum::<f64>() / 40.0;
        let expected: f64 = s[..k].iter().map(|v| v * v).sum::<f64>() / 40.0;
        assert!((captured - expected).abs() < 1e-9 * expected.max(1.0));
        for (a, b) in fit.singular_values.iter().zip(&s) {
            assert!((a - b).abs() < 1e-8);
        }
        let t = fit.transform(x.row(5)).unwrap();
        for j in 0..k {
            assert!((t[j] - fit.reduced[(5, j)]).abs() < 1e-12);
        }
    }

    #[test]
    fn k_out_of_range() {
        let x = random(4, 3, 0);
        assert!(pca_fit_transform(&x, 0).is_err());
        assert!(pca_fit_transform(&x, 4).is_err());
    }
}
