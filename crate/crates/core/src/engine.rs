//! The outer EM driver: initialization, E/M alternation, convergence
//! detection, and multi-restart orchestration.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estep::{compute_centroids, squared_distance, weighted_kmeans};
use crate::mstep::m_step;
use crate::rng::{seeded_rng, RandomSource};
use crate::types::{Assignment, Centroids, ClusteringResult, Config, DataMatrix, InitMethod};

/// Candidate pool size per center for greedy k-means++ seeding.
fn pp_candidates() -> usize {
    std::env::var("PP_CAND").ok().and_then(|v| v.parse().ok()).unwrap_or(8)
}

/// Draw initial centers and assign every sample to the nearest one in plain
/// squared L2 distance (lowest cluster index on ties). Every cluster in the
/// returned assignment is guaranteed non-empty.
pub fn init_assignment(
    x: &DataMatrix,
    n_clusters: usize,
    method: InitMethod,
    rng: &mut RandomSource,
) -> Result<Assignment> {
    let n = x.n_samples();
    if n_clusters < 2 {
        return Err(Error::invalid("cluster count must be at least 2"));
    }
    if n_clusters > n {
        return Err(Error::invalid(format!(
            "cluster count {n_clusters} exceeds sample count {n}"
        )));
    }
    let centers = match method {
        InitMethod::RandomPoints => sample_distinct(n, n_clusters, rng),
        InitMethod::KmeansPp => kmeans_pp_centers(x, n_clusters, rng),
    };
    let mut labels: Vec<usize> = (0..n)
        .map(|i| {
            let mut best = 0;
            let mut best_dist = f64::INFINITY;
            for (c, &center) in centers.iter().enumerate() {
                let d = squared_distance(x.row(i), x.row(center));
                if d < best_dist {
                    best_dist = d;
                    best = c;
                }
            }
            best
        })
        .collect();
    repair_empty_clusters(x, &mut labels, &centers, n_clusters);
    Assignment::new(labels, n_clusters)
}

fn sample_distinct(n: usize, k: usize, rng: &mut RandomSource) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(k);
    while chosen.len() < k {
        let idx = rng.random_range(0..n);
        if !chosen.contains(&idx) {
            chosen.push(idx);
        }
    }
    chosen
}

/// Greedy k-means++: each new center is the best of a small pool of
/// distance-squared weighted candidates (the one minimizing the resulting
/// potential), which markedly reduces bad seedings.
fn kmeans_pp_centers(x: &DataMatrix, k: usize, rng: &mut RandomSource) -> Vec<usize> {
    let n = x.n_samples();
    let first = rng.random_range(0..n);
    let mut centers = vec![first];
    let mut min_d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), x.row(first)))
        .collect();
    while centers.len() < k {
        let total: f64 = min_d2.iter().sum();
        let mut best_center = None;
        let mut best_potential = f64::INFINITY;
        for _ in 0..pp_candidates() {
            let candidate = if total > 0.0 {
                weighted_pick(&min_d2, total, rng)
            } else {
                // all remaining points coincide with existing centers
                (0..n).find(|i| !centers.contains(i)).unwrap_or(0)
            };
            let potential: f64 = (0..n)
                .map(|i| min_d2[i].min(squared_distance(x.row(i), x.row(candidate))))
                .sum();
            if potential < best_potential {
                best_potential = potential;
                best_center = Some(candidate);
            }
        }
        let chosen = best_center.expect("candidate pool is non-empty");
        centers.push(chosen);
        for (i, entry) in min_d2.iter_mut().enumerate() {
            let d = squared_distance(x.row(i), x.row(chosen));
            if d < *entry {
                *entry = d;
            }
        }
    }
    centers
}

fn weighted_pick(weights: &[f64], total: f64, rng: &mut RandomSource) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Move donor samples (from clusters of size >= 2, farthest from the empty
/// cluster's center, lowest index on ties) until every cluster is populated.
fn repair_empty_clusters(
    x: &DataMatrix,
    labels: &mut [usize],
    centers: &[usize],
    n_clusters: usize,
) {
    loop {
        let mut sizes = vec![0usize; n_clusters];
        for &c in labels.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = (0..n_clusters).find(|&c| sizes[c] == 0) else {
            return;
        };
        let center_row = x.row(centers[empty]);
        let mut donor = None;
        let mut donor_dist = -1.0;
        for i in 0..labels.len() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = squared_distance(x.row(i), center_row);
            if d > donor_dist {
                donor_dist = d;
                donor = Some(i);
            }
        }
        let donor = donor.expect("a cluster of size >= 2 exists while another is empty");
        labels[donor] = empty;
    }
}

/// One full CSSKM run from a single initialization.
///
/// Alternates the weighted E-step and the per-pair M-step until the relative
/// objective change falls below `cfg.rel_tol` or `cfg.max_outer_iters` is hit.
pub fn csskm_once(
    x: &DataMatrix,
    cfg: &Config,
    rng: &mut RandomSource,
) -> Result<ClusteringResult> {
    cfg.validate_for(x)?;
    run_once(x, cfg, rng, 0)
}

fn run_once(
    x: &DataMatrix,
    cfg: &Config,
    rng: &mut RandomSource,
    restart_index: usize,
) -> Result<ClusteringResult> {
    let mut z = init_assignment(x, cfg.n_clusters, cfg.init_method, rng)?;
    let mut step = m_step(x, &z, cfg.budget, cfg.delta_search_iters)?;
    let mut trace = vec![step.objective];
    let mut warnings = WarningSet::default();
    warnings.degenerate(&step.degenerate_pairs);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=cfg.max_outer_iters {
        iterations = iter;
        let init_centroids = if cfg.warm_start {
            compute_centroids(x, &z, None).0
        } else {
            random_centroids(x, cfg.n_clusters, rng)
        };
        let inner = weighted_kmeans(x, &step.weights, &init_centroids, cfg.max_inner_iters)?;
        if !inner.converged {
            warnings.push(format!(
                "e-step hit the inner iteration cap ({}) at outer iteration {iter}",
                cfg.max_inner_iters
            ));
        }
        if inner.repairs > 0 {
            warnings.push(format!(
                "e-step repaired {} empty cluster(s) at outer iteration {iter}",
                inner.repairs
            ));
        }
        z = inner.assignment;
        let previous = *trace.last().expect("trace is non-empty");
        step = m_step(x, &z, cfg.budget, cfg.delta_search_iters)?;
        warnings.degenerate(&step.degenerate_pairs);
        trace.push(step.objective);
        if (step.objective - previous).abs() <= cfg.rel_tol * previous.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    Ok(ClusteringResult {
        assignment: z,
        weights: step.weights,
        objective_trace: trace,
        converged,
        iterations,
        restart_index,
        seed_used: cfg.seed,
        warnings: warnings.into_vec(),
    })
}

fn random_centroids(x: &DataMatrix, n_clusters: usize, rng: &mut RandomSource) -> Centroids {
    let idx = sample_distinct(x.n_samples(), n_clusters, rng);
    let mut values = Vec::with_capacity(n_clusters * x.n_features());
    for &i in &idx {
        values.extend_from_slice(x.row(i));
    }
    Centroids::new(values, n_clusters, x.n_features()).expect("rows of a finite matrix")
}

/// Multi-restart CSSKM: run `cfg.restarts` independent streams and keep the
/// result with the highest final objective (lowest restart index on ties).
///
/// Restarts may execute in parallel; the winner does not depend on scheduling.
pub fn csskm(x: &DataMatrix, cfg: &Config) -> Result<ClusteringResult> {
    cfg.validate_for(x)?;
    let runs: Vec<Result<ClusteringResult>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(cfg.seed, r as u64);
            run_once(x, cfg, &mut rng, r)
        })
        .collect();
    pick_best(runs)
}

pub(crate) fn pick_best(runs: Vec<Result<ClusteringResult>>) -> Result<ClusteringResult> {
    let mut best: Option<ClusteringResult> = None;
    for run in runs {
        let run = run?;
        match &best {
            Some(current) if run.objective() <= current.objective() => {}
            _ => best = Some(run),
        }
    }
    best.ok_or_else(|| Error::invalid("no restarts were run"))
}

/// Deduplicated, order-preserving warning collector.
#[derive(Default)]
struct WarningSet {
    seen: std::collections::HashSet<String>,
    list: Vec<String>,
}

impl WarningSet {
    fn push(&mut self, msg: String) {
        if self.seen.insert(msg.clone()) {
            self.list.push(msg);
        }
    }

    fn degenerate(&mut self, pairs: &[(usize, usize)]) {
        for &(a, b) in pairs {
            self.push(format!(
                "m-step: cluster pair ({a},{b}) has no cross-cluster separation; weights set to zero"
            ));
        }
    }

    fn into_vec(self) -> Vec<String> {
        self.list
    }
}
