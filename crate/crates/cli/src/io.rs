//! File formats: numeric CSV matrices, label sidecars, long-format weight
//! tables, and the JSON run report.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use csskm_core::{Assignment, ClusteringResult, Config, DataMatrix, WeightTensor};

/// Read a samples-by-features CSV matrix.
///
/// `has_header` consumes the first line as feature names; `has_row_ids`
/// consumes the first column as sample ids. Parse failures name the offending
/// 1-based row and column.
pub fn read_matrix_csv(path: &Path, has_header: bool, has_row_ids: bool) -> Result<DataMatrix> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read matrix file {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let mut feature_names: Option<Vec<String>> = None;
    if has_header {
        let Some((_, header)) = lines.next() else {
            bail!("{}: empty file", path.display());
        };
        let mut cells: Vec<&str> = header.split(',').collect();
        if has_row_ids && !cells.is_empty() {
            cells.remove(0);
        }
        feature_names = Some(cells.iter().map(|s| s.trim().to_string()).collect());
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut sample_ids: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    for (line_idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells: Vec<&str> = line.split(',').collect();
        if has_row_ids {
            sample_ids.push(cells.remove(0).trim().to_string());
        }
        if let Some(w) = width {
            if cells.len() != w {
                bail!(
                    "{}: ragged row {}: expected {} value columns, got {}",
                    path.display(),
                    line_idx + 1,
                    w,
                    cells.len()
                );
            }
        } else {
            width = Some(cells.len());
        }
        let mut row = Vec::with_capacity(cells.len());
        for (col_idx, cell) in cells.iter().enumerate() {
            let value: f64 = cell.trim().parse().with_context(|| {
                format!(
                    "{}: row {}, column {}: not a number: {cell:?}",
                    path.display(),
                    line_idx + 1,
                    col_idx + 1
                )
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let mut matrix = DataMatrix::from_rows(rows)?;
    if has_row_ids {
        matrix = matrix.with_sample_ids(sample_ids)?;
    }
    if let Some(names) = feature_names {
        if names.len() != matrix.n_features() {
            bail!(
                "{}: header has {} feature names for {} columns",
                path.display(),
                names.len(),
                matrix.n_features()
            );
        }
        matrix = matrix.with_feature_names(names)?;
    }
    Ok(matrix)
}

/// Write a matrix with its names (when present) at full round-trip precision.
pub fn write_matrix_csv(x: &DataMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    if let Some(names) = x.feature_names() {
        if x.sample_ids().is_some() {
            out.push_str("id,");
        }
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for i in 0..x.n_samples() {
        if let Some(ids) = x.sample_ids() {
            let _ = write!(out, "{},", ids[i]);
        }
        let row = x.row(i);
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Labels sidecar: one cluster index per line, aligned with matrix rows.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read labels file {}", path.display()))?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: usize = line.trim().parse().with_context(|| {
            format!("{}: line {}: not a cluster index", path.display(), idx + 1)
        })?;
        labels.push(value);
    }
    if labels.is_empty() {
        bail!("{}: no labels", path.display());
    }
    Ok(labels)
}

pub fn write_labels(labels: &[usize], path: &Path) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Labels as an assignment; the cluster count is the largest label + 1
/// (at least 2).
pub fn labels_to_assignment(labels: Vec<usize>) -> Result<Assignment> {
    let c = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
    Ok(Assignment::new(labels, c)?)
}

/// Write the weight tensor in long format: `feature,cluster_a,cluster_b,weight`,
/// pair-major rows, features ascending within a pair. Sparse mode keeps only
/// strictly positive weights; dense mode emits every row.
pub fn write_weights_csv(
    w: &WeightTensor,
    feature_names: Option<&[String]>,
    path: &Path,
    dense: bool,
) -> Result<()> {
    let mut out = String::from("feature,cluster_a,cluster_b,weight\n");
    for ((a, b), weights) in w.iter() {
        for (k, &value) in weights.iter().enumerate() {
            if !dense && value <= 0.0 {
                continue;
            }
            match feature_names {
                Some(names) => {
                    let _ = writeln!(out, "{},{a},{b},{value}", names[k]);
                }
                None => {
                    let _ = writeln!(out, "{k},{a},{b},{value}");
                }
            }
        }
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Read back a long-format weight table into per-pair vectors (canonical pair
/// order). Rows may be sparse; missing entries are zero.
pub fn read_weights_csv(
    path: &Path,
    n_clusters: usize,
    n_features: usize,
    feature_names: Option<&[String]>,
) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read weights file {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != "feature,cluster_a,cluster_b,weight" {
        bail!("{}: unexpected weights header {header:?}", path.display());
    }
    let mut result = vec![vec![0.0; n_features]; csskm_core::pair_count(n_clusters)];
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            bail!("{}: line {}: expected 4 columns", path.display(), idx + 2);
        }
        let feature = match feature_names {
            Some(names) => names
                .iter()
                .position(|n| n == cells[0].trim())
                .with_context(|| {
                    format!("{}: line {}: unknown feature {:?}", path.display(), idx + 2, cells[0])
                })?,
            None => cells[0].trim().parse().with_context(|| {
                format!("{}: line {}: bad feature index", path.display(), idx + 2)
            })?,
        };
        let a: usize = cells[1].trim().parse()?;
        let b: usize = cells[2].trim().parse()?;
        let value: f64 = cells[3].trim().parse()?;
        if feature >= n_features || a >= n_clusters || b >= n_clusters || a == b {
            bail!("{}: line {}: out-of-range row", path.display(), idx + 2);
        }
        result[csskm_core::pair_index(a, b, n_clusters)][feature] = value;
    }
    Ok(result)
}

/// Per-pair summary embedded in the run report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PairSummary {
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub support_size: usize,
    /// Highest-weight features for the pair, descending weight.
    pub top_features: Vec<FeatureWeight>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FeatureWeight {
    pub feature: String,
    pub weight: f64,
}

/// Evaluation block, present when ground-truth labels were supplied.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalSummary {
    pub accuracy: f64,
    pub adjusted_rand_index: f64,
    /// Predicted cluster -> truth label, None for unmatched clusters.
    pub mapping: Vec<Option<usize>>,
    pub confusion: Vec<Vec<usize>>,
}

/// The JSON report written next to every clustering run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub algo: String,
    pub input: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub config: Config,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub winning_restart: usize,
    pub warnings: Vec<String>,
    pub selected_union_size: usize,
    pub pair_summaries: Vec<PairSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global_weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvalSummary>,
}

/// Number of per-pair top features recorded in reports.
pub const REPORT_TOP_FEATURES: usize = 10;

pub fn build_report(
    algo: &str,
    input: &str,
    x: &DataMatrix,
    cfg: &Config,
    result: &ClusteringResult,
    global_weights: Option<Vec<f64>>,
    evaluation: Option<EvalSummary>,
) -> RunReport {
    let selected = csskm_core::selected_features(&result.weights, 0.0);
    let mut pair_summaries = Vec::new();
    for ((a, b), weights) in result.weights.iter() {
        let mut ranked: Vec<(usize, f64)> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(k, &w)| (k, w))
            .collect();
        ranked.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
        let top_features = ranked
            .iter()
            .take(REPORT_TOP_FEATURES)
            .map(|&(k, weight)| FeatureWeight {
                feature: feature_label(x, k),
                weight,
            })
            .collect();
        pair_summaries.push(PairSummary {
            cluster_a: a,
            cluster_b: b,
            support_size: selected.per_pair[pair_index_of(a, b, result)].len(),
            top_features,
        });
    }
    RunReport {
        algo: algo.to_string(),
        input: input.to_string(),
        n_samples: x.n_samples(),
        n_features: x.n_features(),
        config: cfg.clone(),
        objective: result.objective(),
        objective_trace: result.objective_trace.clone(),
        converged: result.converged,
        iterations: result.iterations,
        winning_restart: result.restart_index,
        warnings: result.warnings.clone(),
        selected_union_size: selected.union.len(),
        pair_summaries,
        global_weights,
        evaluation,
    }
}

fn pair_index_of(a: usize, b: usize, result: &ClusteringResult) -> usize {
    csskm_core::pair_index(a, b, result.weights.n_clusters())
}

pub fn feature_label(x: &DataMatrix, k: usize) -> String {
    match x.feature_names() {
        Some(names) => names[k].clone(),
        None => k.to_string(),
    }
}

/// Sanity helper used by the sweep: union support size of a tensor.
pub fn union_support_size(w: &WeightTensor) -> usize {
    csskm_core::selected_features(w, 0.0).union.len()
}

/// Per-pair support sets of a tensor in canonical order (sweep nesting checks).
pub fn pair_supports(w: &WeightTensor) -> Vec<Vec<usize>> {
    csskm_core::selected_features(w, 0.0).per_pair
}
