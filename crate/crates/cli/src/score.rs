//! Batch scoring of `{"record_id", "response"}` lines against a dataset.

use serde::{Deserialize, Serialize};
use timt_core::{
    final_reward, parse_response, RewardBreakdown, RewardError, RewardMode, TaskLayout,
};

use crate::Dataset;

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("unknown record_id `{id}`")]
    UnknownRecord { index: usize, id: String },
    #[error("scoring `{id}` failed: {source}")]
    Reward {
        id: String,
        #[source]
        source: RewardError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseLine {
    pub record_id: String,
    pub response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredResponse {
    pub record_id: String,
    #[serde(flatten)]
    pub breakdown: RewardBreakdown,
}

/// Means over all scored responses. A missing recognition or translation
/// reward counts as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub n: usize,
    pub mean_final: Option<f64>,
    pub mean_format: Option<f64>,
    pub mean_recognition: Option<f64>,
    pub mean_translation: Option<f64>,
}

impl ScoreSummary {
    pub fn of(breakdowns: &[&RewardBreakdown]) -> Self {
        let n = breakdowns.len();
        let mean = |f: &dyn Fn(&RewardBreakdown) -> f64| {
            (n > 0).then(|| breakdowns.iter().map(|b| f(b)).sum::<f64>() / n as f64)
        };
        ScoreSummary {
            n,
            mean_final: mean(&|b| b.final_reward),
            mean_format: mean(&|b| b.format),
            mean_recognition: mean(&|b| b.recognition.unwrap_or(0.0)),
            mean_translation: mean(&|b| b.translation.unwrap_or(0.0)),
        }
    }

    /// One-line human-readable form.
    pub fn describe(&self) -> String {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        format!(
            "n={} final={} format={} recognition={} translation={}",
            self.n,
            f(self.mean_final),
            f(self.mean_format),
            f(self.mean_recognition),
            f(self.mean_translation)
        )
    }
}

/// Trailing line of `timt score` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub summary: ScoreSummary,
}

/// Parses responses JSONL; blank lines are skipped.
pub fn parse_responses(text: &str) -> Result<Vec<ResponseLine>, ScoreError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| ScoreError::Parse {
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn score_one(
    dataset: &Dataset,
    index: usize,
    record_id: &str,
    response: &str,
    layout: TaskLayout,
    mode: &RewardMode,
) -> Result<RewardBreakdown, ScoreError> {
    let record = dataset
        .get(record_id)
        .ok_or_else(|| ScoreError::UnknownRecord {
            index,
            id: record_id.to_string(),
        })?;
    final_reward(&parse_response(response, layout), record, mode).map_err(|source| {
        ScoreError::Reward {
            id: record_id.to_string(),
            source,
        }
    })
}

/// Scores every line in order. Fails on the first unknown id, before any
/// scoring happens.
pub fn score_all(
    dataset: &Dataset,
    lines: &[ResponseLine],
    layout: TaskLayout,
    mode: &RewardMode,
) -> Result<Vec<ScoredResponse>, ScoreError> {
    if let Some((index, l)) = lines
        .iter()
        .enumerate()
        .find(|(_, l)| dataset.get(&l.record_id).is_none())
    {
        return Err(ScoreError::UnknownRecord {
            index,
            id: l.record_id.clone(),
        });
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| {
            Ok(ScoredResponse {
                record_id: l.record_id.clone(),
                breakdown: score_one(dataset, i, &l.record_id, &l.response, layout, mode)?,
            })
        })
        .collect()
}
