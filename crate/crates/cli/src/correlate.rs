//! Rank correlation between the final rewards a set of responses receives
//! under different reward modes.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use timt_core::reward::{correlation_matrix, CorrelationError};
use timt_core::{CorrelationKind, RewardBreakdown, RewardMode};

#[derive(Debug, thiserror::Error)]
pub enum CorrelateError {
    #[error("need at least 2 reward modes, got {0}")]
    TooFewModes(usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("{0}")]
    Correlation(#[from] CorrelationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub modes: Vec<String>,
    pub n: usize,
    pub spearman: Vec<Vec<f64>>,
    pub kendall: Vec<Vec<f64>>,
}

/// Per-mode final rewards, one series per mode.
///
/// Each non-blank line is either a scored breakdown as written by `timt
/// score` (the final reward is recomputed under each mode from its
/// components) or an object mapping mode names to final rewards. Summary
/// lines (`{"summary": ...}`) are skipped.
pub fn mode_series(text: &str, modes: &[RewardMode]) -> Result<Vec<Vec<f64>>, CorrelateError> {
    let mut series = vec![Vec::new(); modes.len()];
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = i + 1;
        let bad = |reason: String| CorrelateError::BadLine { line, reason };
        let mut value: Value = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| bad("expected a JSON object".into()))?;
        obj.remove("record_id");
        if obj.contains_key("summary") {
            continue;
        }
        if obj.contains_key("format") {
            let b: RewardBreakdown = serde_json::from_value(Value::Object(obj.clone()))
                .map_err(|e| bad(e.to_string()))?;
            for (s, mode) in series.iter_mut().zip(modes) {
                s.push(
                    b.final_under(mode)
                        .ok_or_else(|| bad(format!("no components for mode `{mode}`")))?,
                );
            }
        } else {
            for (s, mode) in series.iter_mut().zip(modes) {
                let v = obj
                    .get(&mode.name())
                    .and_then(Value::as_f64)
                    .ok_or_else(|| bad(format!("missing numeric `{mode}`")))?;
                s.push(v);
            }
        }
    }
    Ok(series)
}

pub fn correlate(
    series: &[Vec<f64>],
    modes: &[RewardMode],
) -> Result<CorrelationReport, CorrelateError> {
    if modes.len() < 2 {
        return Err(CorrelateError::TooFewModes(modes.len()));
    }
    let n = series.first().map_or(0, Vec::len);
    if n < 2 {
        return Err(CorrelateError::TooFewSamples(n));
    }
    Ok(CorrelationReport {
        modes: modes.iter().map(RewardMode::name).collect(),
        n,
        spearman: correlation_matrix(series, CorrelationKind::Spearman)?,
        kendall: correlation_matrix(series, CorrelationKind::Kendall)?,
    })
}

/// Both matrices as aligned text.
pub fn render_table(report: &CorrelationReport) -> String {
    let width = report
        .modes
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(7);
    let mut out = String::new();
    for (title, m) in [("spearman", &report.spearman), ("kendall", &report.kendall)] {
        out.push_str(&format!("{title} (n={})\n{:width$}", report.n, ""));
        for name in &report.modes {
            out.push_str(&format!(" {name:>width$}"));
        }
        out.push('\n');
        for (name, row) in report.modes.iter().zip(m) {
            out.push_str(&format!("{name:width$}"));
            for v in row {
                out.push_str(&format!(" {v:>width$.4}"));
            }
            out.push('\n');
        }
    }
    out
}
