use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationKind {
    Spearman,
    Kendall,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorrelationError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("correlation undefined: one side has no rank variance")]
    Undefined,
}

/// Spearman (Pearson on average ranks) or Kendall tau-b.
pub fn rank_correlation(
    xs: &[f64],
    ys: &[f64],
    kind: CorrelationKind,
) -> Result<f64, CorrelationError> {
    if xs.len() != ys.len() {
        return Err(CorrelationError::InvalidInput(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(CorrelationError::InvalidInput(
            "need at least 2 samples".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(CorrelationError::InvalidInput("non-finite value".into()));
    }
    let r = match kind {
        CorrelationKind::Spearman => spearman(xs, ys)?,
        CorrelationKind::Kendall => kendall_tau_b(xs, ys)?,
    };
    Ok(r.clamp(-1.0, 1.0))
}

/// Symmetric matrix of pairwise correlations with an exact unit diagonal.
pub fn correlation_matrix(
    series: &[Vec<f64>],
    kind: CorrelationKind,
) -> Result<Vec<Vec<f64>>, CorrelationError> {
    let k = series.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        m[i][i] = 1.0;
        for j in i + 1..k {
            let r = rank_correlation(&series[i], &series[j], kind)?;
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    if k == 1 {
        rank_correlation(&series[0], &series[0], kind)?;
    }
    Ok(m)
}

/// Average (fractional) ranks, 1-based.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, CorrelationError> {
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::Undefined);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn tie_pairs(sorted: &[f64]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Knight's O(n log n) tau-b: sort by (x, y), count joint ties, then count
/// discordant pairs as merge-sort swaps on y.
fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> Result<f64, CorrelationError> {
    let n = xs.len() as u64;
    let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let total = n * (n - 1) / 2;
    let mut x_ties = 0u64;
    let mut joint_ties = 0u64;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i + 1;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        let run = (j - i) as u64;
        x_ties += run * (run - 1) / 2;
        let ys_in_run: Vec<f64> = pairs[i..j].iter().map(|p| p.1).collect();
        joint_ties += tie_pairs(&ys_in_run);
        i = j;
    }

    let mut y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; y.len()];
    let swaps = merge_count(&mut y, &mut buf);
    let y_ties = tie_pairs(&y);

    if x_ties == total || y_ties == total {
        return Err(CorrelationError::Undefined);
    }
    let numerator =
        total as f64 - x_ties as f64 - y_ties as f64 + joint_ties as f64 - 2.0 * swaps as f64;
    let denom = ((total - x_ties) as f64 * (total - y_ties) as f64).sqrt();
    Ok(numerator / denom)
}

/// Sorts `v` ascending and returns the number of strictly inverted pairs.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (lb, rb) = buf.split_at_mut(mid);
        merge_count(left, lb) + merge_count(right, rb)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j].total_cmp(&v[i]) == Ordering::Less {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}
