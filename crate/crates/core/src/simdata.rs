//! Synthetic benchmark generator: Gaussian background with additive block
//! signals tied to specific clusters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded_rng, standard_normal};
use crate::types::{Assignment, DataMatrix};

/// A constant shift applied to one cluster's rows over a half-open feature range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalBlock {
    pub cluster: usize,
    pub start: usize,
    pub end: usize,
}

impl SignalBlock {
    pub fn new(cluster: usize, start: usize, end: usize) -> Self {
        Self {
            cluster,
            start,
            end,
        }
    }
}

/// Specification of a simulated dataset: iid N(0, 1) background plus
/// `signal` added to each block's feature columns for its cluster's rows.
///
/// The default is the canonical benchmark: 60 samples in three clusters of
/// 20, 100 features, signal 1.2 on features 0..10 / 10..20 / 20..30 for
/// clusters 0 / 1 / 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSpec {
    pub n_per_cluster: Vec<usize>,
    pub n_features: usize,
    pub signal: f64,
    pub blocks: Vec<SignalBlock>,
    pub seed: u64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            n_per_cluster: vec![20, 20, 20],
            n_features: 100,
            signal: 1.2,
            blocks: vec![
                SignalBlock::new(0, 0, 10),
                SignalBlock::new(1, 10, 20),
                SignalBlock::new(2, 20, 30),
            ],
            seed: 0,
        }
    }
}

impl SimSpec {
    pub fn n_samples(&self) -> usize {
        self.n_per_cluster.iter().sum()
    }

    pub fn n_clusters(&self) -> usize {
        self.n_per_cluster.len()
    }

    fn validate(&self) -> Result<()> {
        if self.n_per_cluster.len() < 2 {
            return Err(Error::invalid("simulation needs at least 2 clusters"));
        }
        if self.n_per_cluster.contains(&0) {
            return Err(Error::invalid("every cluster needs at least one sample"));
        }
        if self.n_features == 0 {
            return Err(Error::invalid("simulation needs at least one feature"));
        }
        if !self.signal.is_finite() {
            return Err(Error::invalid("signal must be finite"));
        }
        for block in &self.blocks {
            if block.cluster >= self.n_per_cluster.len() {
                return Err(Error::invalid(format!(
                    "block cluster {} out of range [0, {})",
                    block.cluster,
                    self.n_per_cluster.len()
                )));
            }
            if block.start > block.end || block.end > self.n_features {
                return Err(Error::invalid(format!(
                    "block feature range {}..{} invalid for {} features",
                    block.start, block.end, self.n_features
                )));
            }
        }
        Ok(())
    }
}

/// Generate the matrix and its planted labels. Rows are laid out cluster by
/// cluster; the background is drawn row-major from `seeded_rng(spec.seed, 0)`,
/// so the same spec always produces the identical matrix.
pub fn simulate(spec: &SimSpec) -> Result<(DataMatrix, Assignment)> {
    spec.validate()?;
    let n = spec.n_samples();
    let p = spec.n_features;
    let mut rng = seeded_rng(spec.seed, 0);
    let mut values = Vec::with_capacity(n * p);
    for _ in 0..n * p {
        values.push(standard_normal(&mut rng));
    }

    let mut labels = Vec::with_capacity(n);
    for (cluster, &count) in spec.n_per_cluster.iter().enumerate() {
        labels.extend(std::iter::repeat_n(cluster, count));
    }
    for block in &spec.blocks {
        for (i, &label) in labels.iter().enumerate() {
            if label != block.cluster {
                continue;
            }
            for k in block.start..block.end {
                values[i * p + k] += spec.signal;
            }
        }
    }

    let matrix = DataMatrix::new(values, n, p)?;
    let truth = Assignment::new(labels, spec.n_per_cluster.len())?;
    Ok((matrix, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_shape_and_labels() {
        let (x, truth) = simulate(&SimSpec::default()).unwrap();
        assert_eq!(x.n_samples(), 60);
        assert_eq!(x.n_features(), 100);
        let sizes = truth.cluster_sizes();
        assert_eq!(sizes, vec![20, 20, 20]);
        assert_eq!(truth.labels()[0], 0);
        assert_eq!(truth.labels()[59], 2);
    }

    #[test]
    fn same_seed_same_matrix() {
        let spec = SimSpec {
            seed: 123,
            ..SimSpec::default()
        };
        let (a, _) = simulate(&spec).unwrap();
        let (b, _) = simulate(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_signal_has_no_planted_structure() {
        // column means of pure N(0,1) data: z-test at alpha = 0.001 over 60 samples
        let spec = SimSpec {
            signal: 0.0,
            seed: 7,
            ..SimSpec::default()
        };
        let (x, _) = simulate(&spec).unwrap();
        let limit = 3.29 / (60.0f64).sqrt(); // z_{0.9995}
        let mut outliers = 0;
        for k in 0..x.n_features() {
            let mean: f64 = (0..60).map(|i| x.get(i, k)).sum::<f64>() / 60.0;
            if mean.abs() > limit {
                outliers += 1;
            }
        }
        // expect ~0.1 columns beyond the limit; allow a little slack
        assert!(outliers <= 2, "{outliers} columns outside the z band");
    }

    #[test]
    fn block_mean_difference_matches_signal() {
        // mean over (rows 0..20 x cols 0..10) minus mean over (rows 20..60 x cols 0..10)
        // estimates the signal. 3 sigma of the estimator at these block sizes:
        // sqrt(1/200 + 1/400) * 3 = 0.26. The 10-seed average gets a 0.15 band.
        let mut diffs = Vec::new();
        for seed in 0..10 {
            let spec = SimSpec {
                seed,
                ..SimSpec::default()
            };
            let (x, _) = simulate(&spec).unwrap();
            let block: f64 = (0..20)
                .flat_map(|i| (0..10).map(move |k| (i, k)))
                .map(|(i, k)| x.get(i, k))
                .sum::<f64>()
                / 200.0;
            let rest: f64 = (20..60)
                .flat_map(|i| (0..10).map(move |k| (i, k)))
                .map(|(i, k)| x.get(i, k))
                .sum::<f64>()
                / 400.0;
            diffs.push(block - rest);
        }
        for d in &diffs {
            assert!((d - 1.2).abs() < 0.26, "difference {d} too far from 1.2");
        }
        let avg: f64 = diffs.iter().sum::<f64>() / diffs.len() as f64;
        assert!((avg - 1.2).abs() < 0.15, "averaged difference {avg}");
    }

    #[test]
    fn off_block_columns_stay_centered() {
        for seed in [0, 1, 2] {
            let spec = SimSpec {
                seed,
                ..SimSpec::default()
            };
            let (x, _) = simulate(&spec).unwrap();
            let limit = 4.0 / (60.0f64).sqrt();
            for k in 30..100 {
                let mean: f64 = (0..60).map(|i| x.get(i, k)).sum::<f64>() / 60.0;
                assert!(mean.abs() < limit, "column {k} mean {mean} off-center");
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = SimSpec::default();
        spec.blocks[0].end = 101;
        assert!(simulate(&spec).is_err());
        let mut spec = SimSpec::default();
        spec.blocks[0].cluster = 3;
        assert!(simulate(&spec).is_err());
        let spec = SimSpec {
            n_per_cluster: vec![60],
            ..SimSpec::default()
        };
        assert!(simulate(&spec).is_err());
    }
}
