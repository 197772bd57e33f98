//! The target function F(w, z): the weighted un-normalized cross-cluster
//! distance, accumulated per cluster pair via sufficient statistics.

use crate::error::{Error, Result};
use crate::mstep::pair_sufficient_stats;
use crate::types::{Assignment, DataMatrix};
use crate::weights::{pairs, WeightTensor};

/// Evaluate F(w, z) = sum over pairs a < b and features k of
/// `w[k][(a,b)] * s[k][(a,b)]`.
///
/// Pairs are accumulated in canonical order, the same order the M-step uses,
/// so a freshly solved tensor reproduces its reported objective bit for bit.
pub fn objective(x: &DataMatrix, z: &Assignment, w: &WeightTensor) -> Result<f64> {
    if z.len() != x.n_samples() {
        return Err(Error::DimensionMismatch {
            context: "assignment length",
            expected: x.n_samples(),
            got: z.len(),
        });
    }
    if w.n_clusters() != z.n_clusters() {
        return Err(Error::DimensionMismatch {
            context: "weight tensor clusters",
            expected: z.n_clusters(),
            got: w.n_clusters(),
        });
    }
    if w.n_features() != x.n_features() {
        return Err(Error::DimensionMismatch {
            context: "weight tensor features",
            expected: x.n_features(),
            got: w.n_features(),
        });
    }
    let mut total = 0.0;
    for (a, b) in pairs(z.n_clusters()) {
        let stats = pair_sufficient_stats(x, z, a, b)?;
        total += stats
            .iter()
            .zip(w.pair(a, b))
            .map(|(s, wk)| s * wk)
            .sum::<f64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cluster_populated_gives_zero() {
        let x = DataMatrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let z = Assignment::new(vec![0, 0, 0], 2).unwrap();
        let w = WeightTensor::uniform(2, 1);
        assert_eq!(objective(&x, &z, &w).unwrap(), 0.0);
    }

    #[test]
    fn single_cross_pair() {
        let x = DataMatrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let z = Assignment::new(vec![0, 1], 2).unwrap();
        let mut w = WeightTensor::zero(2, 1, 1.0);
        w.set_pair(0, 1, vec![1.0]);
        assert_eq!(objective(&x, &z, &w).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let x = DataMatrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let z = Assignment::new(vec![0, 1], 2).unwrap();
        let w = WeightTensor::uniform(3, 1);
        assert!(objective(&x, &z, &w).is_err());
        let w = WeightTensor::uniform(2, 2);
        assert!(objective(&x, &z, &w).is_err());
    }
}
