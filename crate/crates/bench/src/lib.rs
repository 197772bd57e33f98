//! Shared fixtures for the criterion benchmarks.

use csskm_core::{simulate, Assignment, DataMatrix, SimSpec};

/// The canonical 60x100 three-cluster benchmark matrix and its labels.
pub fn benchmark_data(seed: u64) -> (DataMatrix, Assignment) {
    let spec = SimSpec {
        seed,
        ..SimSpec::default()
    };
    simulate(&spec).expect("default spec is valid")
}

/// A larger instance for scaling measurements: 300 samples, 2000 features.
pub fn wide_data(seed: u64) -> (DataMatrix, Assignment) {
    let spec = SimSpec {
        n_per_cluster: vec![100, 100, 100],
        n_features: 2000,
        signal: 1.0,
        blocks: vec![
            csskm_core::SignalBlock::new(0, 0, 50),
            csskm_core::SignalBlock::new(1, 50, 100),
            csskm_core::SignalBlock::new(2, 100, 150),
        ],
        seed,
    };
    simulate(&spec).expect("wide spec is valid")
}
