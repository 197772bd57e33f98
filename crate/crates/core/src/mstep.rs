//! The weight update: for a fixed assignment, solve every cluster pair's
//! constrained maximization
//!
//! ```text
//! max s.w   s.t.  ||w||_1 <= t,  ||w||_2 <= 1,  w >= 0
//! ```
//!
//! The solution is a normalized soft-threshold `w = S(s, delta) / ||S(s, delta)||_2`
//! with the smallest feasible `delta` found by bisection.

use crate::error::{Error, Result};
use crate::types::{Assignment, DataMatrix};
use crate::weights::{pairs, WeightTensor};

/// Stopping width for the bisection, relative to max(s).
const DELTA_INTERVAL_TOL: f64 = 1e-12;

/// Solution of one pair's constrained weight problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSolution {
    pub weights: Vec<f64>,
    pub delta: f64,
    /// The achieved objective value s.w.
    pub objective_contribution: f64,
}

/// Cross-pair squared-difference sums between clusters `a` and `b`, one per feature.
///
/// Uses the sufficient-statistics identity
/// `s_k = |C_b| * sum_{i in C_a} x_ik^2 + |C_a| * sum_{j in C_b} x_jk^2
///        - 2 * (sum_{i in C_a} x_ik) * (sum_{j in C_b} x_jk)`
/// which is O(n * p) instead of the O(|C_a||C_b| * p) double loop. Tiny
/// negative rounding residue is clamped to zero.
pub fn pair_sufficient_stats(
    x: &DataMatrix,
    z: &Assignment,
    a: usize,
    b: usize,
) -> Result<Vec<f64>> {
    if a == b {
        return Err(Error::invalid("pair statistics need two distinct clusters"));
    }
    if z.len() != x.n_samples() {
        return Err(Error::DimensionMismatch {
            context: "assignment length",
            expected: x.n_samples(),
            got: z.len(),
        });
    }
    let p = x.n_features();
    let mut sum_a = vec![0.0; p];
    let mut sumsq_a = vec![0.0; p];
    let mut sum_b = vec![0.0; p];
    let mut sumsq_b = vec![0.0; p];
    let mut count_a = 0usize;
    let mut count_b = 0usize;
    for i in 0..x.n_samples() {
        let c = z.cluster_of(i);
        if c == a {
            count_a += 1;
            for (k, &v) in x.row(i).iter().enumerate() {
                sum_a[k] += v;
                sumsq_a[k] += v * v;
            }
        } else if c == b {
            count_b += 1;
            for (k, &v) in x.row(i).iter().enumerate() {
                sum_b[k] += v;
                sumsq_b[k] += v * v;
            }
        }
    }
    let na = count_a as f64;
    let nb = count_b as f64;
    let mut stats = vec![0.0; p];
    for k in 0..p {
        let s = nb * sumsq_a[k] + na * sumsq_b[k] - 2.0 * sum_a[k] * sum_b[k];
        stats[k] = s.max(0.0);
    }
    Ok(stats)
}

/// Elementwise soft threshold `max(x_i - delta, 0)`.
pub fn soft_threshold(x: &[f64], delta: f64) -> Vec<f64> {
    debug_assert!(delta >= 0.0);
    x.iter().map(|&v| (v - delta).max(0.0)).collect()
}

fn l1(v: &[f64]) -> f64 {
    v.iter().sum()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// L1 norm of the normalized soft-threshold at `delta`; non-increasing in `delta`.
fn normalized_l1(s: &[f64], delta: f64) -> f64 {
    let v = soft_threshold(s, delta);
    let norm = l2(&v);
    if norm > 0.0 {
        l1(&v) / norm
    } else {
        0.0
    }
}

/// Solve one pair's weight problem under the L1 budget `t`.
///
/// An all-zero `s` (identical or empty clusters) yields the all-zero vector.
/// Otherwise the result is `S(s, delta)` normalized to unit L2, with the
/// smallest `delta >= 0` for which the L1 norm fits the budget, located by
/// `search_iters` bisection steps over `[0, max(s) - eps]`.
pub fn solve_pair_weights(s: &[f64], t: f64, search_iters: usize) -> Result<ThresholdSolution> {
    let p = s.len();
    if p == 0 {
        return Err(Error::invalid("empty stats vector"));
    }
    let max_budget = (p as f64).sqrt();
    if !(t >= 1.0 && t <= max_budget + 1e-9) {
        return Err(Error::invalid(format!(
            "budget t = {t} outside the valid range [1, sqrt(p)] = [1, {max_budget}]"
        )));
    }
    if s.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::invalid("stats must be non-negative and finite"));
    }
    let max_s = s.iter().cloned().fold(0.0, f64::max);
    if max_s == 0.0 {
        return Ok(ThresholdSolution {
            weights: vec![0.0; p],
            delta: 0.0,
            objective_contribution: 0.0,
        });
    }

    // delta = 0 first: already feasible means no thresholding at all.
    let norm0 = l2(s);
    let w0: Vec<f64> = s.iter().map(|&v| v / norm0).collect();
    if l1(&w0) <= t {
        let objective_contribution = dot(s, &w0);
        return Ok(ThresholdSolution {
            weights: w0,
            delta: 0.0,
            objective_contribution,
        });
    }

    // Bisect on [0, max(s) - eps]; the right end keeps at least one positive entry.
    let hi_limit = max_s * (1.0 - DELTA_INTERVAL_TOL);
    if normalized_l1(s, hi_limit) > t {
        // Exactly tied maxima with sqrt(#ties) > t: no soft-threshold point is
        // feasible, so place mass directly on the tied coordinates with
        // ||w||_1 = t and ||w||_2 = 1 (one coordinate high, the rest equal).
        return Ok(tied_max_solution(s, t, hi_limit));
    }
    let mut lo = 0.0;
    let mut hi = hi_limit;
    for _ in 0..search_iters {
        if hi - lo < DELTA_INTERVAL_TOL * max_s {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if normalized_l1(s, mid) <= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let v = soft_threshold(s, hi);
    let norm = l2(&v);
    let weights: Vec<f64> = v.iter().map(|&x| x / norm).collect();
    let objective_contribution = dot(s, &weights);
    Ok(ThresholdSolution {
        weights,
        delta: hi,
        objective_contribution,
    })
}

/// Direct optimum when the maximal entries of `s` are exactly tied and the
/// normalized soft-threshold family cannot meet the budget: spend the whole
/// L1 budget on the tied coordinates. For m tied entries and 1 <= t < sqrt(m)
/// the two-level vector (alpha on the lowest tied index, beta on the rest)
/// achieves ||w||_1 = t, ||w||_2 = 1, and the optimal objective max(s) * t.
fn tied_max_solution(s: &[f64], t: f64, hi_limit: f64) -> ThresholdSolution {
    let tied: Vec<usize> = (0..s.len()).filter(|&k| s[k] > hi_limit).collect();
    let m = tied.len();
    debug_assert!(m >= 2);
    let q = (m - 1) as f64;
    let disc = (q * (q + 1.0 - t * t)).max(0.0);
    let beta = (t * q - disc.sqrt()) / (q * (q + 1.0));
    let alpha = t - q * beta;
    let mut weights = vec![0.0; s.len()];
    weights[tied[0]] = alpha;
    for &k in &tied[1..] {
        weights[k] = beta;
    }
    let objective_contribution = dot(s, &weights);
    ThresholdSolution {
        weights,
        delta: hi_limit,
        objective_contribution,
    }
}

/// Result of a full M-step over all cluster pairs.
#[derive(Debug, Clone)]
pub struct MStepResult {
    pub weights: WeightTensor,
    /// The objective F(w, z) = sum over pairs of s.w.
    pub objective: f64,
    /// Pairs whose stats were all zero (empty or identical clusters); their
    /// weights are all-zero.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

/// Optimal weight tensor for a fixed assignment, plus the objective value.
pub fn m_step(
    x: &DataMatrix,
    z: &Assignment,
    t: f64,
    search_iters: usize,
) -> Result<MStepResult> {
    let c = z.n_clusters();
    let mut weights = WeightTensor::zero(c, x.n_features(), t);
    let mut objective = 0.0;
    let mut degenerate_pairs = Vec::new();
    for (a, b) in pairs(c) {
        let stats = pair_sufficient_stats(x, z, a, b)?;
        if stats.iter().all(|&v| v == 0.0) {
            degenerate_pairs.push((a, b));
            continue;
        }
        let sol = solve_pair_weights(&stats, t, search_iters)?;
        objective += sol.objective_contribution;
        weights.set_pair(a, b, sol.weights);
    }
    Ok(MStepResult {
        weights,
        objective,
        degenerate_pairs,
    })
}
