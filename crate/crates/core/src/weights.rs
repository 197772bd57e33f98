//! Per-cluster-pair weight tensors and sufficient statistics.
//!
//! Unordered cluster pairs (a, b) with a < b are laid out lexicographically:
//! (0,1), (0,2), ..., (0,C-1), (1,2), ... This order is the canonical one for
//! iteration, serialization, and objective accumulation, so that results are
//! bit-identical no matter how individual pairs were computed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of unordered cluster pairs for `n_clusters` clusters.
pub fn pair_count(n_clusters: usize) -> usize {
    n_clusters * (n_clusters - 1) / 2
}

/// Flat index of the unordered pair {a, b}; the order of the two arguments
/// does not matter.
#[inline]
pub fn pair_index(a: usize, b: usize, n_clusters: usize) -> usize {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    debug_assert!(hi < n_clusters && lo < hi);
    lo * n_clusters - lo * (lo + 1) / 2 + (hi - lo - 1)
}

/// Iterate unordered pairs (a, b), a < b, in canonical order.
pub fn pairs(n_clusters: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n_clusters).flat_map(move |a| (a + 1..n_clusters).map(move |b| (a, b)))
}

/// Nonnegative per-feature importance weights for every unordered cluster pair.
///
/// Each pair's length-p vector satisfies the lasso-type constraints
/// `||w||_1 <= budget` and `||w||_2 = 1` (or is all-zero for a degenerate
/// pair with no cross-cluster separation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTensor {
    n_clusters: usize,
    n_features: usize,
    budget: f64,
    pairs: Vec<Vec<f64>>,
}

impl WeightTensor {
    pub fn new(
        n_clusters: usize,
        n_features: usize,
        budget: f64,
        pairs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if n_clusters < 2 {
            return Err(Error::invalid("weight tensor needs at least 2 clusters"));
        }
        if pairs.len() != pair_count(n_clusters) {
            return Err(Error::DimensionMismatch {
                context: "pair vectors",
                expected: pair_count(n_clusters),
                got: pairs.len(),
            });
        }
        if let Some(bad) = pairs.iter().find(|v| v.len() != n_features) {
            return Err(Error::DimensionMismatch {
                context: "pair vector length",
                expected: n_features,
                got: bad.len(),
            });
        }
        Ok(Self {
            n_clusters,
            n_features,
            budget,
            pairs,
        })
    }

    /// All-zero tensor (used as a construction starting point).
    pub fn zero(n_clusters: usize, n_features: usize, budget: f64) -> Self {
        Self {
            n_clusters,
            n_features,
            budget,
            pairs: vec![vec![0.0; n_features]; pair_count(n_clusters)],
        }
    }

    /// Uniform tensor with every pair vector equal to (1/sqrt(p), ...).
    ///
    /// Its L1 norm is sqrt(p), so the recorded budget is sqrt(p) — the
    /// vacuous budget under which a uniform vector is feasible.
    pub fn uniform(n_clusters: usize, n_features: usize) -> Self {
        let w = 1.0 / (n_features as f64).sqrt();
        Self {
            n_clusters,
            n_features,
            budget: (n_features as f64).sqrt(),
            pairs: vec![vec![w; n_features]; pair_count(n_clusters)],
        }
    }

    /// Tensor with every pair set to the same `weights` vector.
    pub fn replicated(n_clusters: usize, budget: f64, weights: &[f64]) -> Self {
        Self {
            n_clusters,
            n_features: weights.len(),
            budget,
            pairs: vec![weights.to_vec(); pair_count(n_clusters)],
        }
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    #[inline]
    pub fn pair(&self, a: usize, b: usize) -> &[f64] {
        &self.pairs[pair_index(a, b, self.n_clusters)]
    }

    pub fn set_pair(&mut self, a: usize, b: usize, weights: Vec<f64>) {
        debug_assert_eq!(weights.len(), self.n_features);
        let idx = pair_index(a, b, self.n_clusters);
        self.pairs[idx] = weights;
    }

    /// Iterate `((a, b), weights)` in canonical pair order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> {
        pairs(self.n_clusters).map(move |(a, b)| ((a, b), self.pair(a, b)))
    }

    /// Check nonnegativity, the L1 budget, and unit-or-zero L2 norm for every pair.
    pub fn validate_constraints(&self) -> Result<()> {
        for ((a, b), w) in self.iter() {
            if w.iter().any(|&v| v < 0.0) {
                return Err(Error::invalid(format!(
                    "pair ({a},{b}) has a negative weight"
                )));
            }
            let l1: f64 = w.iter().sum();
            if l1 > self.budget + 1e-6 {
                return Err(Error::invalid(format!(
                    "pair ({a},{b}) violates the L1 budget: {l1} > {}",
                    self.budget
                )));
            }
            let l2 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if l2 != 0.0 && (l2 - 1.0).abs() > 1e-6 {
                return Err(Error::invalid(format!(
                    "pair ({a},{b}) has L2 norm {l2}, expected 0 or 1"
                )));
            }
        }
        Ok(())
    }
}

/// Per-feature cross-pair squared-difference sums for every cluster pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    n_clusters: usize,
    n_features: usize,
    pairs: Vec<Vec<f64>>,
}

impl PairStats {
    pub fn new(n_clusters: usize, n_features: usize, pairs: Vec<Vec<f64>>) -> Result<Self> {
        if pairs.len() != pair_count(n_clusters) {
            return Err(Error::DimensionMismatch {
                context: "pair stat vectors",
                expected: pair_count(n_clusters),
                got: pairs.len(),
            });
        }
        if pairs
            .iter()
            .any(|v| v.len() != n_features || v.iter().any(|&s| s < 0.0))
        {
            return Err(Error::invalid(
                "pair stats must be length-p and non-negative",
            ));
        }
        Ok(Self {
            n_clusters,
            n_features,
            pairs,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn pair(&self, a: usize, b: usize) -> &[f64] {
        &self.pairs[pair_index(a, b, self.n_clusters)]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> {
        pairs(self.n_clusters).map(move |(a, b)| ((a, b), self.pair(a, b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indexing_is_lexicographic() {
        let c = 4;
        let expected = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let listed: Vec<_> = pairs(c).collect();
        assert_eq!(listed, expected);
        for (idx, &(a, b)) in expected.iter().enumerate() {
            assert_eq!(pair_index(a, b, c), idx);
            assert_eq!(pair_index(b, a, c), idx);
        }
        assert_eq!(pair_count(c), expected.len());
    }

    #[test]
    fn uniform_tensor_is_feasible() {
        let w = WeightTensor::uniform(3, 16);
        w.validate_constraints().unwrap();
        let v = w.pair(1, 2);
        assert!((v.iter().sum::<f64>() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constraint_violations_detected() {
        let mut w = WeightTensor::zero(2, 2, 1.0);
        w.set_pair(0, 1, vec![-0.1, 0.0]);
        assert!(w.validate_constraints().is_err());
        w.set_pair(0, 1, vec![0.9, 0.9]);
        assert!(w.validate_constraints().is_err());
        w.set_pair(0, 1, vec![1.0, 0.0]);
        w.validate_constraints().unwrap();
    }
}
