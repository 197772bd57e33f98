//! Core domain types shared by all clustering modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightTensor;

/// An n-samples by p-features observation matrix with optional names.
///
/// Values are stored row-major; every entry must be finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    values: Vec<f64>,
    n_samples: usize,
    n_features: usize,
    sample_ids: Option<Vec<String>>,
    feature_names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(values: Vec<f64>, n_samples: usize, n_features: usize) -> Result<Self> {
        if n_samples == 0 || n_features == 0 {
            return Err(Error::invalid("matrix must have at least 1 row and 1 column"));
        }
        if values.len() != n_samples * n_features {
            return Err(Error::DimensionMismatch {
                context: "matrix buffer length",
                expected: n_samples * n_features,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, column {}",
                pos / n_features,
                pos % n_features
            )));
        }
        Ok(Self {
            values,
            n_samples,
            n_features,
            sample_ids: None,
            feature_names: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_samples = rows.len();
        if n_samples == 0 {
            return Err(Error::invalid("matrix must have at least 1 row"));
        }
        let n_features = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::DimensionMismatch {
                    context: "row length",
                    expected: n_features,
                    got: row.len(),
                })
                .map_err(|e| match e {
                    Error::DimensionMismatch { expected, got, .. } => Error::invalid(format!(
                        "ragged row {i}: expected {expected} columns, got {got}"
                    )),
                    other => other,
                });
            }
        }
        Self::new(rows.into_iter().flatten().collect(), n_samples, n_features)
    }

    pub fn with_sample_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n_samples {
            return Err(Error::DimensionMismatch {
                context: "sample ids",
                expected: self.n_samples,
                got: ids.len(),
            });
        }
        if has_duplicates(&ids) {
            return Err(Error::invalid("sample ids must be unique"));
        }
        self.sample_ids = Some(ids);
        Ok(self)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                context: "feature names",
                expected: self.n_features,
                got: names.len(),
            });
        }
        if has_duplicates(&names) {
            return Err(Error::invalid("feature names must be unique"));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.n_features + k]
    }

    pub fn sample_ids(&self) -> Option<&[String]> {
        self.sample_ids.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Transposed copy (samples become features and vice versa); names swap roles.
    pub fn transposed(&self) -> Result<Self> {
        let mut values = vec![0.0; self.values.len()];
        for i in 0..self.n_samples {
            for k in 0..self.n_features {
                values[k * self.n_samples + i] = self.get(i, k);
            }
        }
        let mut out = Self::new(values, self.n_features, self.n_samples)?;
        out.sample_ids = self.feature_names.clone();
        out.feature_names = self.sample_ids.clone();
        Ok(out)
    }
}

fn has_duplicates(items: &[String]) -> bool {
    let mut seen = std::collections::HashSet::with_capacity(items.len());
    items.iter().any(|s| !seen.insert(s))
}

/// A hard partition of samples into `n_clusters` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, n_clusters: usize) -> Result<Self> {
        if n_clusters < 2 {
            return Err(Error::invalid("cluster count must be at least 2"));
        }
        if labels.is_empty() {
            return Err(Error::invalid("assignment must cover at least one sample"));
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= n_clusters) {
            return Err(Error::invalid(format!(
                "cluster index {bad} out of range [0, {n_clusters})"
            )));
        }
        Ok(Self { labels, n_clusters })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn cluster_of(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_clusters];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Per-cluster mean vectors; row `c` is the centroid of cluster `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids {
    values: Vec<f64>,
    n_clusters: usize,
    n_features: usize,
}

impl Centroids {
    pub fn new(values: Vec<f64>, n_clusters: usize, n_features: usize) -> Result<Self> {
        if values.len() != n_clusters * n_features {
            return Err(Error::DimensionMismatch {
                context: "centroid buffer length",
                expected: n_clusters * n_features,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("centroids must be finite"));
        }
        Ok(Self {
            values,
            n_clusters,
            n_features,
        })
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn row(&self, c: usize) -> &[f64] {
        &self.values[c * self.n_features..(c + 1) * self.n_features]
    }
}

/// Initialization strategy for cluster centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    /// Pick distinct data points uniformly at random as the initial centers.
    RandomPoints,
    /// Greedy k-means++: distance-squared weighted seeding with a small
    /// candidate pool per center.
    KmeansPp,
}

/// Configuration for the clustering engine and baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Number of clusters C.
    pub n_clusters: usize,
    /// Per-pair L1 budget T; must lie in [1, sqrt(p)].
    pub budget: f64,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Relative convergence threshold on the objective between outer iterations.
    pub rel_tol: f64,
    /// Bisection iteration cap for the per-pair weight solver.
    pub delta_search_iters: usize,
    pub init_method: InitMethod,
    /// Warm-start each E-step from the previous iteration's centroids; when
    /// false, centers are re-drawn at random for every E-step.
    pub warm_start: bool,
}

impl Config {
    pub fn new(n_clusters: usize, budget: f64) -> Self {
        Self {
            n_clusters,
            budget,
            max_outer_iters: 50,
            max_inner_iters: 100,
            restarts: 10,
            seed: 0,
            rel_tol: 1e-3,
            delta_search_iters: 64,
            init_method: InitMethod::KmeansPp,
            warm_start: true,
        }
    }

    /// Validate the configuration against a concrete dataset.
    pub fn validate_for(&self, x: &DataMatrix) -> Result<()> {
        let n = x.n_samples();
        let p = x.n_features();
        if self.n_clusters < 2 {
            return Err(Error::invalid("cluster count must be at least 2"));
        }
        if self.n_clusters > n {
            return Err(Error::invalid(format!(
                "cluster count {} exceeds sample count {n}",
                self.n_clusters
            )));
        }
        let max_budget = (p as f64).sqrt();
        if !(self.budget >= 1.0 && self.budget <= max_budget + 1e-9) {
            return Err(Error::invalid(format!(
                "budget t = {} outside the valid range [1, sqrt(p)] = [1, {max_budget}]",
                self.budget
            )));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("at least one restart is required"));
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::invalid("iteration caps must be positive"));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol >= 0.0) {
            return Err(Error::invalid("rel_tol must be finite and non-negative"));
        }
        if self.delta_search_iters == 0 {
            return Err(Error::invalid("delta_search_iters must be positive"));
        }
        Ok(())
    }
}

/// Outcome of one clustering run (or the winning restart of several).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub assignment: Assignment,
    pub weights: WeightTensor,
    /// Objective value recorded after every M-step, in order.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    /// Outer E/M iterations performed (the initial M-step is not counted).
    pub iterations: usize,
    pub restart_index: usize,
    pub seed_used: u64,
    pub warnings: Vec<String>,
}

impl ClusteringResult {
    /// Final objective value F.
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("objective trace is never empty")
    }
}
