use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::ndcore::Matrix;
use crate::scalar::Scalar;

/// Default eigenvalue regularizer.
pub const ZCA_EPSILON: f64 = 1e-5;

/// Fitted ZCA whitening: `x ↦ (x − mean) · W` with the symmetric
/// `W = U · diag(1 / sqrt(λ + ε)) · Uᵀ`, where `U, λ` diagonalize the
/// feature covariance `Xcᵀ·Xc / N` of the centered training data.
#[derive(Clone, Debug)]
pub struct Zca {
    pub mean: Vec<f64>,
    pub transform: Matrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub epsilon: f64,
}

impl Zca {
    pub fn fit<T: Scalar>(x: &Matrix<T>, epsilon: f64) -> Result<Self> {
        let (n, d) = x.shape();
        if n < 2 {
            return Err(Error::InvalidConfig(format!("ZCA needs at least 2 rows, got {n}")));
        }
        let x: Matrix<f64> = x.cast();
        let mean: Vec<f64> = x.column_sums().into_iter().map(|s| s / n as f64).collect();
        let mut centered = x;
        let negated: Vec<f64> = mean.iter().map(|m| -m).collect();
        centered.add_row_broadcast(&negated)?;
        let mut cov = centered.matmul_tn(&centered)?;
        cov.scale(1.0 / n as f64);

        let eig = SymmetricEigen::new(DMatrix::from_row_slice(d, d, cov.as_slice()));
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) || eig.eigenvectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEigen);
        }
        let u = &eig.eigenvectors;
        let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / (l.max(0.0) + epsilon).sqrt()));
        let w = u * scale * u.transpose();
        // exact symmetry regardless of rounding in the product
        let data = (0..d * d)
            .map(|k| {
                let (r, c) = (k / d, k % d);
                0.5 * (w[(r, c)] + w[(c, r)])
            })
            .collect();
        Ok(Self { mean, transform: Matrix::new(d, d, data)?, eigenvalues: eig.eigenvalues.iter().copied().collect(), epsilon })
    }

    pub fn apply<T: Scalar>(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let mut centered: Matrix<f64> = x.cast();
        let negated: Vec<f64> = self.mean.iter().map(|m| -m).collect();
        centered.add_row_broadcast(&negated)?;
        Ok(centered.matmul(&self.transform)?.cast())
    }
}

/// Fits on `x` and returns the whitened `x` with the reusable transform.
pub fn zca_whiten<T: Scalar>(x: &Matrix<T>, epsilon: f64) -> Result<(Matrix<T>, Zca)> {
    let zca = Zca::fit(x, epsilon)?;
    Ok((zca.apply(x)?, zca))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndcore::Rng;

    fn covariance(x: &Matrix<f64>) -> Vec<Vec<f64>> {
        let (n, d) = x.shape();
        let mean: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64).collect();
        (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| (0..n).map(|i| (x.get(i, a) - mean[a]) * (x.get(i, b) - mean[b])).sum::<f64>() / n as f64)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn correlated_data_becomes_white() {
        let mut rng = Rng::new(50);
        let rows: Vec<[f64; 2]> = (0..400)
            .map(|_| {
                let (a, b) = (rng.next_gaussian(), rng.next_gaussian());
                [30.0 * a + 5.0, 24.0 * a + 9.0 * b - 2.0]
            })
            .collect();
        let x = Matrix::from_rows(&rows);
        let (w, zca) = zca_whiten(&x, ZCA_EPSILON).unwrap();
        assert!(zca.eigenvalues.iter().all(|&l| l > 10.0));
        let cov = covariance(&w);
        for (a, row) in cov.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((v - target).abs() < 1e-6, "cov[{a}][{b}] = {v}");
            }
        }
        let t = &zca.transform;
        assert_eq!(t.get(0, 1), t.get(1, 0));
    }

    #[test]
    fn white_input_gives_near_identity() {
        let mut rng = Rng::new(51);
        let x = Matrix::new(20_000, 3, (0..60_000).map(|_| rng.next_gaussian()).collect()).unwrap();
        let zca = Zca::fit(&x, ZCA_EPSILON).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { 1.0 } else { 0.0 };
                assert!((zca.transform.get(r, c) - target).abs() < 0.03);
            }
        }
    }

    #[test]
    fn too_few_rows() {
        assert!(Zca::fit(&Matrix::<f64>::zeros(1, 3), ZCA_EPSILON).is_err());
    }
}
