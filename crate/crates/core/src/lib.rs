//! Cluster-specific sparse K-means.
//!
//! K-means-style clustering that simultaneously learns, for every feature and
//! every pair of clusters, a nonnegative weight expressing how strongly that
//! feature separates that cluster pair, under per-pair lasso-type constraints
//! (`||w||_1 <= t`, `||w||_2 <= 1`, `w >= 0`).
//!
//! The algorithm alternates two steps until the objective — the weighted
//! un-normalized cross-cluster distance — stabilizes:
//!
//! * **E-step** ([`estep`]): assign each point to the cluster maximizing its
//!   weighted distance to the other clusters' centroids.
//! * **M-step** ([`mstep`]): for the fixed assignment, solve every pair's
//!   constrained problem exactly via normalized soft-thresholding.
//!
//! [`engine::csskm`] drives the alternation with deterministic multi-restart;
//! [`baseline`] provides plain K-means and a global-weight sparse K-means for
//! comparison; [`simdata`] generates planted-block benchmarks and [`eval`]
//! scores results.
//!
//! ```
//! use csskm_core::{csskm, match_accuracy, simulate, Config, SimSpec};
//!
//! let (x, truth) = simulate(&SimSpec::default()).unwrap();
//! let mut cfg = Config::new(3, 5.0);
//! cfg.restarts = 2;
//! let result = csskm(&x, &cfg).unwrap();
//! let (accuracy, _) = match_accuracy(&result.assignment, &truth).unwrap();
//! assert!(accuracy > 0.5);
//! ```

pub mod baseline;
pub mod engine;
pub mod error;
pub mod estep;
pub mod eval;
pub mod mstep;
pub mod objective;
pub mod rng;
pub mod simdata;
pub mod types;
pub mod weights;

pub use baseline::{kmeans, sparse_kmeans, SparseKmeansResult};
pub use engine::{csskm, csskm_once, init_assignment};
pub use error::{Error, Result};
pub use estep::{assign_point, compute_centroids, weighted_kmeans, InnerResult};
pub use eval::{
    adjusted_rand_index, confusion_matrix, hypergeometric_enrichment, hypergeometric_pmf,
    match_accuracy, selected_features, SelectedFeatures,
};
pub use mstep::{
    m_step, pair_sufficient_stats, soft_threshold, solve_pair_weights, MStepResult,
    ThresholdSolution,
};
pub use objective::objective;
pub use rng::{seeded_rng, standard_normal, RandomSource};
pub use simdata::{simulate, SignalBlock, SimSpec};
pub use types::{Assignment, Centroids, ClusteringResult, Config, DataMatrix, InitMethod};
pub use weights::{pair_count, pair_index, pairs, PairStats, WeightTensor};
