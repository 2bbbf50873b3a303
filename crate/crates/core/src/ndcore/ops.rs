use std::cmp::Ordering;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Stable permutation ordering `keys` ascending: `keys[p[0]] <= keys[p[1]] <= …`,
/// equal keys keep their original relative order.
pub fn argsort_rows_by_key(keys: &[usize]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..keys.len()).collect();
    perm.sort_by_key(|&i| keys[i]);
    perm
}

/// Per-column arithmetic mean over the selected rows of `m`.
///
/// Accumulates deviations from the first selected row, so a constant column
/// yields that constant exactly.
pub fn row_mean<T: Scalar>(m: &Matrix<T>, rows: &[usize]) -> Result<Vec<T>> {
    let Some(&first) = rows.first() else {
        return Err(Error::EmptySubset);
    };
    if let Some(&bad) = rows.iter().find(|&&r| r >= m.rows()) {
        return Err(Error::IndexOutOfRange { index: bad, len: m.rows() });
    }
    let pivot = m.row(first);
    let mut sums = vec![T::zero(); m.cols()];
    for &r in &rows[1..] {
        for ((s, &v), &p) in sums.iter_mut().zip(m.row(r)).zip(pivot) {
            *s += v - p;
        }
    }
    let n = T::from_usize(rows.len()).expect("row count representable");
    Ok(sums.into_iter().zip(pivot).map(|(s, &p)| p + s / n).collect())
}

/// Indices of the `k` largest values, returned in ascending index order.
///
/// Ties are resolved in favour of the lower index, so among equal values the
/// earliest positions are selected first.
pub fn top_k_indices<T: Scalar>(values: &[T], k: usize) -> Result<Vec<usize>> {
    if k > values.len() {
        return Err(Error::TopKOutOfRange { k, len: values.len() });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut picked = order[..k].to_vec();
    picked.sort_unstable();
    Ok(picked)
}
