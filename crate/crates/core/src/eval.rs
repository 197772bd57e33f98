//! Clustering evaluation: matched accuracy, confusion counts, adjusted Rand
//! index, feature-selection summaries, and hypergeometric enrichment.

use crate::error::{Error, Result};
use crate::types::Assignment;
use crate::weights::WeightTensor;

/// Largest cluster count accepted by the exhaustive matching search.
const MAX_MATCH_CLUSTERS: usize = 10;

/// Best-overlap accuracy after optimally mapping predicted clusters to true
/// labels.
///
/// Searches all injective cluster-to-label mappings (exhaustive for up to 10
/// clusters; larger inputs are rejected). Returns the fraction of samples
/// whose mapped cluster equals their label, and the mapping itself
/// (`mapping[c] = Some(l)`; `None` for clusters left unmatched when there are
/// more clusters than labels).
pub fn match_accuracy(
    pred: &Assignment,
    truth: &Assignment,
) -> Result<(f64, Vec<Option<usize>>)> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "assignment length",
            expected: truth.len(),
            got: pred.len(),
        });
    }
    let k = pred.n_clusters();
    let l = truth.n_clusters();
    if k > MAX_MATCH_CLUSTERS || l > MAX_MATCH_CLUSTERS {
        return Err(Error::invalid(format!(
            "matching supports at most {MAX_MATCH_CLUSTERS} clusters, got {k} x {l}"
        )));
    }
    let counts = contingency(pred, truth);
    let mut best: Option<(usize, Vec<Option<usize>>)> = None;
    let mut mapping = vec![None; k];
    let mut used = vec![false; l];
    search_mapping(&counts, 0, 0, &mut mapping, &mut used, &mut best);
    let (best_total, best_mapping) = best.expect("at least one mapping exists");
    let accuracy = best_total as f64 / pred.len() as f64;
    Ok((accuracy, best_mapping))
}

fn contingency(pred: &Assignment, truth: &Assignment) -> Vec<Vec<usize>> {
    let mut counts = vec![vec![0usize; truth.n_clusters()]; pred.n_clusters()];
    for (&c, &t) in pred.labels().iter().zip(truth.labels()) {
        counts[c][t] += 1;
    }
    counts
}

fn search_mapping(
    counts: &[Vec<usize>],
    cluster: usize,
    total: usize,
    mapping: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    best: &mut Option<(usize, Vec<Option<usize>>)>,
) {
    if cluster == counts.len() {
        if best.as_ref().is_none_or(|(t, _)| total > *t) {
            *best = Some((total, mapping.clone()));
        }
        return;
    }
    let n_labels = used.len();
    for label in 0..n_labels {
        if used[label] {
            continue;
        }
        used[label] = true;
        mapping[cluster] = Some(label);
        search_mapping(
            counts,
            cluster + 1,
            total + counts[cluster][label],
            mapping,
            used,
            best,
        );
        used[label] = false;
    }
    // leaving this cluster unmatched is only ever needed when clusters
    // outnumber labels
    if counts.len() > n_labels {
        mapping[cluster] = None;
        search_mapping(counts, cluster + 1, total, mapping, used, best);
    }
    mapping[cluster] = None;
}

/// Contingency counts with predicted-cluster rows ordered by their mapped
/// label (mapped clusters first, in label order; unmatched clusters after, in
/// cluster order), so agreement sits on the diagonal.
pub fn confusion_matrix(
    pred: &Assignment,
    truth: &Assignment,
    mapping: &[Option<usize>],
) -> Result<Vec<Vec<usize>>> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "assignment length",
            expected: truth.len(),
            got: pred.len(),
        });
    }
    if mapping.len() != pred.n_clusters() {
        return Err(Error::DimensionMismatch {
            context: "mapping length",
            expected: pred.n_clusters(),
            got: mapping.len(),
        });
    }
    let counts = contingency(pred, truth);
    let mut order: Vec<usize> = Vec::with_capacity(pred.n_clusters());
    let mut mapped: Vec<(usize, usize)> = mapping
        .iter()
        .enumerate()
        .filter_map(|(c, m)| m.map(|l| (l, c)))
        .collect();
    mapped.sort_unstable();
    order.extend(mapped.iter().map(|&(_, c)| c));
    order.extend(
        mapping
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_none())
            .map(|(c, _)| c),
    );
    Ok(order.into_iter().map(|c| counts[c].clone()).collect())
}

/// Adjusted Rand index from the contingency table; 1 for identical
/// partitions, ~0 for chance-level agreement.
pub fn adjusted_rand_index(pred: &Assignment, truth: &Assignment) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "assignment length",
            expected: truth.len(),
            got: pred.len(),
        });
    }
    let counts = contingency(pred, truth);
    let choose2 = |n: usize| (n * (n.saturating_sub(1))) as f64 / 2.0;
    let row_sums: Vec<usize> = counts.iter().map(|row| row.iter().sum()).collect();
    let mut col_sums = vec![0usize; truth.n_clusters()];
    for row in &counts {
        for (j, &v) in row.iter().enumerate() {
            col_sums[j] += v;
        }
    }
    let index: f64 = counts
        .iter()
        .flat_map(|row| row.iter())
        .map(|&v| choose2(v))
        .sum();
    let sum_rows: f64 = row_sums.iter().map(|&v| choose2(v)).sum();
    let sum_cols: f64 = col_sums.iter().map(|&v| choose2(v)).sum();
    let total_pairs = choose2(pred.len());
    let expected = sum_rows * sum_cols / total_pairs;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if max_index == expected {
        // both partitions trivial: perfect agreement by convention
        return Ok(1.0);
    }
    Ok((index - expected) / (max_index - expected))
}

/// Features selected by a weight tensor: the union over pairs plus the
/// per-pair support sets, all strictly above `threshold`, in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectedFeatures {
    pub union: Vec<usize>,
    /// Support per unordered pair, in canonical pair order.
    pub per_pair: Vec<Vec<usize>>,
}

pub fn selected_features(w: &WeightTensor, threshold: f64) -> SelectedFeatures {
    let mut union = std::collections::BTreeSet::new();
    let mut per_pair = Vec::new();
    for (_, weights) in w.iter() {
        let support: Vec<usize> = weights
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(k, _)| k)
            .collect();
        union.extend(support.iter().copied());
        per_pair.push(support);
    }
    SelectedFeatures {
        union: union.into_iter().collect(),
        per_pair,
    }
}

/// Upper-tail hypergeometric probability P[X >= observed] for X counting the
/// overlap of a size-`draws` sample with `successes` marked items out of
/// `population`.
///
/// Terms are built by the exact pmf ratio recurrence anchored at the mode
/// (log-gamma is only used for the anchor's magnitude, which cancels in the
/// normalization), so the tail is accurate to ~1e-12 relative even at
/// population sizes in the thousands.
pub fn hypergeometric_enrichment(
    population: u64,
    successes: u64,
    draws: u64,
    observed: u64,
) -> Result<f64> {
    if successes > population || draws > population {
        return Err(Error::invalid(
            "successes and draws must not exceed the population",
        ));
    }
    let support_hi = successes.min(draws);
    if observed > support_hi {
        return Err(Error::invalid(format!(
            "observed overlap {observed} exceeds min(successes, draws) = {support_hi}"
        )));
    }
    let terms = hypergeometric_terms(population, successes, draws);
    let support_lo = (successes + draws).saturating_sub(population);
    if observed <= support_lo {
        return Ok(1.0);
    }
    let total: f64 = terms.iter().sum();
    // tail summed small-to-large from the far end for accuracy
    let start = (observed - support_lo) as usize;
    let tail: f64 = terms[start..].iter().rev().sum();
    Ok((tail / total).min(1.0))
}

/// Point probability P[X = k]; see [`hypergeometric_enrichment`].
pub fn hypergeometric_pmf(
    population: u64,
    successes: u64,
    draws: u64,
    k: u64,
) -> Result<f64> {
    if successes > population || draws > population {
        return Err(Error::invalid(
            "successes and draws must not exceed the population",
        ));
    }
    let support_lo = (successes + draws).saturating_sub(population);
    let support_hi = successes.min(draws);
    if k < support_lo || k > support_hi {
        return Ok(0.0);
    }
    let terms = hypergeometric_terms(population, successes, draws);
    let total: f64 = terms.iter().sum();
    Ok(terms[(k - support_lo) as usize] / total)
}

/// Unnormalized pmf over the support, anchored at 1 at the mode and extended
/// by the exact term ratio
/// `pmf(j+1)/pmf(j) = (K-j)(n-j) / ((j+1)(N-K-n+j+1))`.
fn hypergeometric_terms(population: u64, successes: u64, draws: u64) -> Vec<f64> {
    let n = population as f64;
    let k_marked = successes as f64;
    let n_draws = draws as f64;
    let support_lo = (successes + draws).saturating_sub(population);
    let support_hi = successes.min(draws);
    let len = (support_hi - support_lo + 1) as usize;
    // mode of the hypergeometric pmf
    let mode_est = ((n_draws + 1.0) * (k_marked + 1.0) / (n + 2.0)).floor() as u64;
    let mode = mode_est.clamp(support_lo, support_hi);
    let mut terms = vec![0.0; len];
    let idx = |j: u64| (j - support_lo) as usize;
    terms[idx(mode)] = 1.0;
    let up_ratio = |j: f64| ((k_marked - j) * (n_draws - j)) / ((j + 1.0) * (n - k_marked - n_draws + j + 1.0));
    let mut value = 1.0;
    for j in mode..support_hi {
        value *= up_ratio(j as f64);
        terms[idx(j + 1)] = value;
    }
    value = 1.0;
    for j in (support_lo + 1..=mode).rev() {
        value /= up_ratio(j as f64 - 1.0);
        terms[idx(j - 1)] = value;
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignment(labels: &[usize], c: usize) -> Assignment {
        Assignment::new(labels.to_vec(), c).unwrap()
    }

    #[test]
    fn identical_assignments_score_one() {
        let a = assignment(&[0, 1, 2, 0, 1, 2], 3);
        let (acc, mapping) = match_accuracy(&a, &a).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(mapping, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn label_permutation_scores_one() {
        let truth = assignment(&[0, 0, 1, 1, 2, 2], 3);
        let pred = assignment(&[2, 2, 0, 0, 1, 1], 3);
        let (acc, mapping) = match_accuracy(&pred, &truth).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(mapping, vec![Some(1), Some(2), Some(0)]);
    }

    #[test]
    fn one_flip_out_of_sixty() {
        let mut labels: Vec<usize> = (0..60).map(|i| i / 20).collect();
        let truth = assignment(&labels, 3);
        labels[0] = 1;
        let pred = assignment(&labels, 3);
        let (acc, _) = match_accuracy(&pred, &truth).unwrap();
        assert!((acc - 59.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn matching_rejects_mismatch_and_excess_clusters() {
        let a = assignment(&[0, 1], 2);
        let b = assignment(&[0, 1, 0], 2);
        assert!(match_accuracy(&a, &b).is_err());
        let big = assignment(&(0..11).collect::<Vec<_>>(), 11);
        assert!(match_accuracy(&big, &big).is_err());
    }

    #[test]
    fn more_clusters_than_labels_leaves_some_unmatched() {
        let truth = assignment(&[0, 0, 1, 1], 2);
        let pred = assignment(&[0, 1, 2, 2], 3);
        let (acc, mapping) = match_accuracy(&pred, &truth).unwrap();
        assert!((acc - 0.75).abs() < 1e-12);
        assert_eq!(mapping.iter().filter(|m| m.is_none()).count(), 1);
    }

    #[test]
    fn confusion_identical_is_diagonal() {
        let a = assignment(&[0, 1, 2, 0, 1, 2], 3);
        let (_, mapping) = match_accuracy(&a, &a).unwrap();
        let m = confusion_matrix(&a, &a, &mapping).unwrap();
        assert_eq!(m, vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]);
    }

    #[test]
    fn confusion_single_cluster_pred() {
        let truth = assignment(&[0, 1, 2, 0], 3);
        let pred = assignment(&[0, 0, 0, 0], 2);
        let (_, mapping) = match_accuracy(&pred, &truth).unwrap();
        let m = confusion_matrix(&pred, &truth, &mapping).unwrap();
        let nonzero_rows = m.iter().filter(|row| row.iter().any(|&v| v > 0)).count();
        assert_eq!(nonzero_rows, 1);
        let total: usize = m.iter().flatten().sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn ari_identical_is_one() {
        let a = assignment(&[0, 1, 0, 1, 2], 3);
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn ari_constant_prediction_is_zero() {
        let truth = assignment(&[0, 0, 1, 1, 2, 2], 3);
        let pred = assignment(&[0, 0, 0, 0, 0, 0], 2);
        let ari = adjusted_rand_index(&pred, &truth).unwrap();
        assert!(ari.abs() < 1e-12, "ari = {ari}");
    }

    #[test]
    fn selected_features_union_and_pairs() {
        let mut w = WeightTensor::zero(3, 4, 1.5);
        assert!(selected_features(&w, 0.0).union.is_empty());
        w.set_pair(0, 1, vec![0.0, 0.9, 0.0, 0.0]);
        let sel = selected_features(&w, 0.0);
        assert_eq!(sel.union, vec![1]);
        assert_eq!(sel.per_pair[0], vec![1]);
        assert!(sel.per_pair[1].is_empty());
        w.set_pair(1, 2, vec![0.5, 0.0, 0.5, 0.0]);
        let sel = selected_features(&w, 0.0);
        assert_eq!(sel.union, vec![0, 1, 2]);
        // threshold excludes weights at or below it
        let sel = selected_features(&w, 0.5);
        assert_eq!(sel.union, vec![1]);
    }

    #[test]
    fn enrichment_tail_from_zero_is_one() {
        assert_eq!(hypergeometric_enrichment(100, 10, 20, 0).unwrap(), 1.0);
    }

    #[test]
    fn enrichment_rejects_invalid() {
        assert!(hypergeometric_enrichment(10, 11, 5, 0).is_err());
        assert!(hypergeometric_enrichment(10, 5, 11, 0).is_err());
        assert!(hypergeometric_enrichment(10, 5, 5, 6).is_err());
    }

    #[test]
    fn enrichment_monotone_in_observed() {
        let mut last = 1.1;
        for k in 0..=11 {
            let p = hypergeometric_enrichment(5135, 11, 99, k).unwrap();
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn small_case_against_direct_arithmetic() {
        // N=5, K=2, n=2: P[X>=1] = 1 - C(3,2)/C(5,2) = 1 - 3/10 = 0.7
        let p = hypergeometric_enrichment(5, 2, 2, 1).unwrap();
        assert!((p - 0.7).abs() < 1e-14);
        // P[X>=2] = C(2,2)/C(5,2) = 1/10
        let p = hypergeometric_enrichment(5, 2, 2, 2).unwrap();
        assert!((p - 0.1).abs() < 1e-14);
    }
}
