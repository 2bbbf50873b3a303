use crate::error::{Error, Result};

use super::MaskSet;

/// Units whose kept/dropped status changed between two mask refreshes.
#[derive(Clone, Debug, PartialEq)]
pub struct Churn {
    pub per_class: Vec<usize>,
    pub mean: f64,
}

/// Per-class Hamming distance between two mask sets, and its mean over classes.
pub fn mask_churn(current: &MaskSet, previous: &MaskSet) -> Result<Churn> {
    if current.classes() != previous.classes() || current.units() != previous.units() {
        return Err(Error::ShapeMismatch {
            op: "mask_churn",
            left: (current.classes(), current.units()),
            right: (previous.classes(), previous.units()),
        });
    }
    let per_class: Vec<usize> =
        current.rows().zip(previous.rows()).map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count()).collect();
    let mean = if per_class.is_empty() { 0.0 } else { per_class.iter().sum::<usize>() as f64 / per_class.len() as f64 };
    Ok(Churn { per_class, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndcore::Rng;

    fn set(rows: Vec<Vec<bool>>) -> MaskSet {
        MaskSet::from_rows(rows, 0.5).unwrap()
    }

    #[test]
    fn identical_sets_have_no_churn() {
        let a = set(vec![vec![true, false, true, false]; 3]);
        let c = mask_churn(&a, &a).unwrap();
        assert_eq!(c.per_class, vec![0, 0, 0]);
        assert_eq!(c.mean, 0.0);
    }

    #[test]
    fn two_changes() {
        let a = set(vec![vec![true, true, false, false]]);
        let b = set(vec![vec![true, false, true, false]]);
        assert_eq!(mask_churn(&a, &b).unwrap().per_class, vec![2]);
    }

    #[test]
    fn matches_popcount_oracle() {
        let mut rng = Rng::new(12);
        for _ in 0..100 {
            let (classes, units) = (1 + rng.next_below(6), 1 + rng.next_below(64));
            let bits = |rng: &mut Rng| -> Vec<u64> { (0..classes).map(|_| rng.next_u64() >> (64 - units)).collect() };
            let (x, y) = (bits(&mut rng), bits(&mut rng));
            let to_rows =
                |v: &[u64]| -> Vec<Vec<bool>> { v.iter().map(|w| (0..units).map(|u| w >> u & 1 == 1).collect()).collect() };
            let c = mask_churn(&set(to_rows(&x)), &set(to_rows(&y))).unwrap();
            let oracle: Vec<usize> = x.iter().zip(&y).map(|(a, b)| (a ^ b).count_ones() as usize).collect();
            assert_eq!(c.per_class, oracle);
        }
    }

    #[test]
    fn shape_mismatch() {
        let a = set(vec![vec![true; 4]]);
        let b = set(vec![vec![true; 5]]);
        assert!(mask_churn(&a, &b).is_err());
    }
}
