use crate::error::{Error, Result};
use crate::ndcore::Matrix;
use crate::scalar::Scalar;

/// Mean softmax cross-entropy over the batch and its gradient with respect to
/// the logits, `(softmax − onehot) / batch`.
///
/// Each row's maximum is subtracted before exponentiating.
pub fn softmax_cross_entropy<T: Scalar>(logits: &Matrix<T>, labels: &[usize]) -> Result<(T, Matrix<T>)> {
    let (n, classes) = logits.shape();
    if labels.len() != n {
        return Err(Error::LabelCount { labels: labels.len(), rows: n });
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange { label, classes });
    }
    let batch = T::from_usize(n.max(1)).expect("batch size representable");
    let mut grad = Matrix::zeros(n, classes);
    let mut total = T::zero();
    for (b, (row, &label)) in logits.iter_rows().zip(labels).enumerate() {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = row.iter().map(|&v| (v - max).exp()).collect();
        let sum: T = exps.iter().copied().sum();
        total += sum.ln() + max - row[label];
        for (c, (g, e)) in grad.row_mut(b).iter_mut().zip(&exps).enumerate() {
            let onehot = if c == label { T::one() } else { T::zero() };
            *g = (*e / sum - onehot) / batch;
        }
    }
    Ok((total / batch, grad))
}

/// Fraction of rows whose argmax equals the label.
pub fn accuracy<T: Scalar>(logits: &Matrix<T>, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = logits.argmax_rows().iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len() as f64
}
