//! Small generated datasets for tests and quick runs without downloads.

use crate::error::Result;
use crate::ndcore::{Matrix, Rng};
use crate::scalar::Scalar;

use super::Dataset;

/// Class blobs in `[0, 1]^dim`: each class has a uniform random center and
/// samples add Gaussian noise of standard deviation `noise`, clipped to the
/// unit cube. Labels cycle through the classes. Returns `(train, test)` drawn
/// around the same centers.
pub fn gaussian_blobs<T: Scalar>(
    n_train: usize,
    n_test: usize,
    dim: usize,
    classes: usize,
    noise: f64,
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>)> {
    let mut rng = Rng::stream(seed, 21);
    let centers: Vec<Vec<f64>> = (0..classes).map(|_| (0..dim).map(|_| rng.next_uniform()).collect()).collect();
    let draw = |n: usize, rng: &mut Rng| -> Result<Dataset<T>> {
        let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
        let mut data = Vec::with_capacity(n * dim);
        for &l in &labels {
            for &c in &centers[l] {
                data.push(T::lit((c + noise * rng.next_gaussian()).clamp(0.0, 1.0)));
            }
        }
        Dataset::new(Matrix::new(n, dim, data)?, labels, classes, "synthetic")
    };
    let train = draw(n_train, &mut Rng::stream(seed, 22))?;
    let test = draw(n_test, &mut Rng::stream(seed, 23))?;
    Ok((train, test))
}

/// Two classes in two features split by the line `x0 + x1 = 1`, with a
/// margin of 0.1 around it.
pub fn linearly_separable<T: Scalar>(n: usize, seed: u64) -> Result<Dataset<T>> {
    let mut rng = Rng::stream(seed, 24);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    while labels.len() < n {
        let (a, b) = (rng.next_uniform(), rng.next_uniform());
        let s = a + b - 1.0;
        if s.abs() < 0.1 {
            continue;
        }
        data.push(T::lit(a));
        data.push(T::lit(b));
        labels.push(usize::from(s > 0.0));
    }
    Dataset::new(Matrix::new(n, 2, data)?, labels, 2, "separable")
}
