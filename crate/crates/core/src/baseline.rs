//! Comparison algorithms: textbook K-means and a global-weight sparse
//! K-means analogue built from the same solver and E/M machinery.
//!
//! The K-means assignment rule here is written independently of the weighted
//! E-step on purpose: the two are compared against each other in tests, so
//! they must not share a code path.

use rayon::prelude::*;

use crate::engine::{init_assignment, pick_best};
use crate::error::Result;
use crate::estep::{compute_centroids, squared_distance, weighted_kmeans, InnerResult};
use crate::mstep::{pair_sufficient_stats, solve_pair_weights};
use crate::objective::objective;
use crate::rng::{seeded_rng, RandomSource};
use crate::types::{Assignment, Centroids, ClusteringResult, Config, DataMatrix};
use crate::weights::{pairs, WeightTensor};

/// Textbook Lloyd iteration from the given centroids: nearest-centroid
/// assignment (lowest index on ties), mean update, until assignments stop
/// changing or `max_inner_iters` is reached.
pub fn lloyd(x: &DataMatrix, init: &Centroids, max_inner_iters: usize) -> Result<InnerResult> {
    let c = init.n_clusters();
    let mut centroids = init.clone();
    let mut labels = nearest_assign(x, &centroids);
    let mut converged = false;
    let mut iterations = 0;
    let mut repairs = 0;
    for iter in 1..=max_inner_iters {
        iterations = iter;
        let z = Assignment::new(labels.clone(), c)?;
        let (updated, n_rep) = compute_centroids(x, &z, Some(&centroids));
        repairs += n_rep;
        centroids = updated;
        let next = nearest_assign(x, &centroids);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }
    Ok(InnerResult {
        assignment: Assignment::new(labels, c)?,
        converged,
        iterations,
        repairs,
    })
}

fn nearest_assign(x: &DataMatrix, centroids: &Centroids) -> Vec<usize> {
    (0..x.n_samples())
        .map(|i| {
            let row = x.row(i);
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for c in 0..centroids.n_clusters() {
                let d = squared_distance(row, centroids.row(c));
                if d < best_dist {
                    best_dist = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Standard K-means with the engine's init, tie-breaking, repair, and restart
/// machinery. The result's weights field is the uniform tensor so it can be
/// consumed anywhere a clustering result is expected.
pub fn kmeans(x: &DataMatrix, cfg: &Config) -> Result<ClusteringResult> {
    let mut cfg_check = cfg.clone();
    // budget is unused by plain k-means; validate everything else
    cfg_check.budget = 1.0;
    cfg_check.validate_for(x)?;
    let runs: Vec<Result<ClusteringResult>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(cfg.seed, r as u64);
            kmeans_once(x, cfg, &mut rng, r)
        })
        .collect();
    pick_best(runs)
}

fn kmeans_once(
    x: &DataMatrix,
    cfg: &Config,
    rng: &mut RandomSource,
    restart_index: usize,
) -> Result<ClusteringResult> {
    let z0 = init_assignment(x, cfg.n_clusters, cfg.init_method, rng)?;
    let init = compute_centroids(x, &z0, None).0;
    let inner = lloyd(x, &init, cfg.max_inner_iters)?;
    let weights = WeightTensor::uniform(cfg.n_clusters, x.n_features());
    let f = objective(x, &inner.assignment, &weights)?;
    let mut warnings = Vec::new();
    if inner.repairs > 0 {
        warnings.push(format!("repaired {} empty cluster(s)", inner.repairs));
    }
    Ok(ClusteringResult {
        assignment: inner.assignment,
        weights,
        objective_trace: vec![f],
        converged: inner.converged,
        iterations: inner.iterations,
        restart_index,
        seed_used: cfg.seed,
        warnings,
    })
}

/// Result of the global-weight sparse K-means baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseKmeansResult {
    pub clustering: ClusteringResult,
    /// One weight per feature, shared by every cluster pair.
    pub global_weights: Vec<f64>,
}

/// Global-weight sparse K-means: the M-step pools the pair stats over all
/// cluster pairs and solves a single constrained problem; the E-step is the
/// weighted K-means under that one vector replicated across pairs.
pub fn sparse_kmeans(x: &DataMatrix, cfg: &Config) -> Result<SparseKmeansResult> {
    cfg.validate_for(x)?;
    let runs: Vec<Result<SparseKmeansResult>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(cfg.seed, r as u64);
            sparse_kmeans_once(x, cfg, &mut rng, r)
        })
        .collect();
    let mut best: Option<SparseKmeansResult> = None;
    for run in runs {
        let run = run?;
        match &best {
            Some(current) if run.clustering.objective() <= current.clustering.objective() => {}
            _ => best = Some(run),
        }
    }
    Ok(best.expect("restarts >= 1 was validated"))
}

fn sparse_kmeans_once(
    x: &DataMatrix,
    cfg: &Config,
    rng: &mut RandomSource,
    restart_index: usize,
) -> Result<SparseKmeansResult> {
    let mut z = init_assignment(x, cfg.n_clusters, cfg.init_method, rng)?;
    let (mut weights, mut f, mut degenerate) = global_m_step(x, &z, cfg)?;
    let mut trace = vec![f];
    let mut warnings = Vec::new();
    if degenerate {
        warnings.push("m-step: pooled stats are all zero; weights set to zero".to_string());
    }
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=cfg.max_outer_iters {
        iterations = iter;
        let tensor = WeightTensor::replicated(cfg.n_clusters, cfg.budget, &weights);
        let init = compute_centroids(x, &z, None).0;
        let inner = weighted_kmeans(x, &tensor, &init, cfg.max_inner_iters)?;
        z = inner.assignment;
        let previous = f;
        (weights, f, degenerate) = global_m_step(x, &z, cfg)?;
        trace.push(f);
        if degenerate {
            let msg = "m-step: pooled stats are all zero; weights set to zero".to_string();
            if !warnings.contains(&msg) {
                warnings.push(msg);
            }
        }
        if (f - previous).abs() <= cfg.rel_tol * previous.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let clustering = ClusteringResult {
        assignment: z,
        weights: WeightTensor::replicated(cfg.n_clusters, cfg.budget, &weights),
        objective_trace: trace,
        converged,
        iterations,
        restart_index,
        seed_used: cfg.seed,
        warnings,
    };
    Ok(SparseKmeansResult {
        clustering,
        global_weights: weights,
    })
}

/// Pooled stats over all pairs, then one solver call. Returns the global
/// weight vector, the objective value under it, and a degeneracy flag.
fn global_m_step(x: &DataMatrix, z: &Assignment, cfg: &Config) -> Result<(Vec<f64>, f64, bool)> {
    let p = x.n_features();
    let mut pooled = vec![0.0; p];
    for (a, b) in pairs(z.n_clusters()) {
        let stats = pair_sufficient_stats(x, z, a, b)?;
        for (acc, s) in pooled.iter_mut().zip(&stats) {
            *acc += s;
        }
    }
    if pooled.iter().all(|&s| s == 0.0) {
        return Ok((vec![0.0; p], 0.0, true));
    }
    let sol = solve_pair_weights(&pooled, cfg.budget, cfg.delta_search_iters)?;
    Ok((sol.weights, sol.objective_contribution, false))
}
