//! The assignment update: a modified K-means that places each point in the
//! cluster maximizing its weighted distance to all OTHER clusters' centroids.
//!
//! With a single shared weight vector this reduces exactly to nearest-centroid
//! assignment (the complement of a constant sum), which is the sense in which
//! it extends plain K-means.

use crate::error::Result;
use crate::types::{Assignment, Centroids, DataMatrix};
use crate::weights::WeightTensor;

/// Outcome of one inner weighted K-means run.
#[derive(Debug, Clone)]
pub struct InnerResult {
    pub assignment: Assignment,
    pub converged: bool,
    pub iterations: usize,
    /// Number of empty-cluster repairs performed across all iterations.
    pub repairs: usize,
}

/// Per-cluster means of the assigned samples.
///
/// An empty cluster is repaired, never left as NaN: its centroid is reseeded
/// with the sample farthest (plain squared distance) from `prev`'s centroid
/// for that cluster, or from the global mean when no previous centroids exist.
/// Returns the centroids and the number of repaired clusters.
pub fn compute_centroids(
    x: &DataMatrix,
    z: &Assignment,
    prev: Option<&Centroids>,
) -> (Centroids, usize) {
    let c = z.n_clusters();
    let p = x.n_features();
    let mut values = vec![0.0; c * p];
    let sizes = z.cluster_sizes();
    for i in 0..x.n_samples() {
        let row = x.row(i);
        let base = z.cluster_of(i) * p;
        for k in 0..p {
            values[base + k] += row[k];
        }
    }
    for cluster in 0..c {
        if sizes[cluster] > 0 {
            let inv = 1.0 / sizes[cluster] as f64;
            for k in 0..p {
                values[cluster * p + k] *= inv;
            }
        }
    }
    let mut repairs = 0;
    for cluster in 0..c {
        if sizes[cluster] > 0 {
            continue;
        }
        repairs += 1;
        let far = match prev {
            Some(prev) => farthest_sample(x, prev.row(cluster)),
            None => farthest_sample(x, &column_means(x)),
        };
        values[cluster * p..(cluster + 1) * p].copy_from_slice(x.row(far));
    }
    let centroids = Centroids::new(values, c, p).expect("finite means of finite data");
    (centroids, repairs)
}

fn column_means(x: &DataMatrix) -> Vec<f64> {
    let p = x.n_features();
    let mut mean = vec![0.0; p];
    for i in 0..x.n_samples() {
        for (k, &v) in x.row(i).iter().enumerate() {
            mean[k] += v;
        }
    }
    let inv = 1.0 / x.n_samples() as f64;
    for m in &mut mean {
        *m *= inv;
    }
    mean
}

/// Index of the sample farthest from `reference` in squared distance,
/// lowest index on ties.
fn farthest_sample(x: &DataMatrix, reference: &[f64]) -> usize {
    let mut best = 0;
    let mut best_dist = -1.0;
    for i in 0..x.n_samples() {
        let d = squared_distance(x.row(i), reference);
        if d > best_dist {
            best_dist = d;
            best = i;
        }
    }
    best
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[inline]
fn weighted_squared_distance(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(w)
        .map(|((x, y), wk)| {
            let d = x - y;
            wk * d * d
        })
        .sum()
}

/// Cluster index maximizing the summed weighted distance to the other
/// clusters' centroids; ties broken by lowest cluster index.
pub fn assign_point(point: &[f64], centroids: &Centroids, w: &WeightTensor) -> usize {
    let c = centroids.n_clusters();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for candidate in 0..c {
        let mut score = 0.0;
        for other in 0..c {
            if other == candidate {
                continue;
            }
            score += weighted_squared_distance(
                point,
                centroids.row(other),
                w.pair(candidate, other),
            );
        }
        if score > best_score {
            best_score = score;
            best = candidate;
        }
    }
    best
}

fn assign_all(x: &DataMatrix, centroids: &Centroids, w: &WeightTensor) -> Vec<usize> {
    (0..x.n_samples())
        .map(|i| assign_point(x.row(i), centroids, w))
        .collect()
}

/// Alternate weighted assignment and centroid recomputation from `init` until
/// the assignment stops changing or `max_inner_iters` is reached.
pub fn weighted_kmeans(
    x: &DataMatrix,
    w: &WeightTensor,
    init: &Centroids,
    max_inner_iters: usize,
) -> Result<InnerResult> {
    let c = init.n_clusters();
    let mut centroids = init.clone();
    let mut labels = assign_all(x, &centroids, w);
    let mut converged = false;
    let mut iterations = 0;
    let mut repairs = 0;
    for iter in 1..=max_inner_iters {
        iterations = iter;
        let z = Assignment::new(labels.clone(), c)?;
        let (updated, n_rep) = compute_centroids(x, &z, Some(&centroids));
        repairs += n_rep;
        centroids = updated;
        let next = assign_all(x, &centroids, w);
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
