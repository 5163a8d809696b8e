//! Multi-mixed reward: format gate plus averaged recognition and translation
//! metric scores.
//!
//! ```text
//! r = 1 + R_rec + R_trans   when the response is well formed
//! r = -3                    otherwise
//! R_trans = mean of the selected translation metrics (BLEU, chrF++, METEOR)
//! R_rec   = (BLEU + METEOR + F1 + clamp(1 - EditDist) + clamp(1 - CER)) / 5
//! ```
//!
//! The reasoning block is never scored directly.

mod correlation;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use correlation::{correlation_matrix, rank_correlation, CorrelationError, CorrelationKind};

use crate::corpus::TimtRecord;
use crate::format::{format_reward, ParsedResponse, FORMAT_BROKEN_REWARD};
use crate::textmetrics::{
    bleu_tokens, cer, chrf_pp, edit_distance_norm_tokens, meteor_tokens, token_f1_tokens, tokenize,
    Metric, MetricError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewardError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("unknown reward mode `{0}` (expected mixed, bleu, chrf_pp or meteor)")]
    UnknownMode(String),
    #[error("reward mode needs at least one translation metric")]
    EmptyMode,
    #[error("translation metric must be BLEU, chrF++ or METEOR, got {0}")]
    UnsupportedMetric(Metric),
}

/// Metrics that may make up the translation reward.
pub const TRANSLATION_METRICS: [Metric; 3] = [Metric::Bleu, Metric::ChrFpp, Metric::Meteor];

/// Metrics averaged into the recognition reward.
pub const RECOGNITION_METRICS: [Metric; 5] = [
    Metric::Bleu,
    Metric::Meteor,
    Metric::TokenF1,
    Metric::EditDistanceNorm,
    Metric::Cer,
];

/// Which translation metrics are averaged into `R_trans`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RewardMode {
    components: Vec<Metric>,
}

impl RewardMode {
    pub fn new(components: impl IntoIterator<Item = Metric>) -> Result<Self, RewardError> {
        let mut list: Vec<Metric> = Vec::new();
        for m in components {
            if !TRANSLATION_METRICS.contains(&m) {
                return Err(RewardError::UnsupportedMetric(m));
            }
            if !list.contains(&m) {
                list.push(m);
            }
        }
        if list.is_empty() {
            return Err(RewardError::EmptyMode);
        }
        list.sort();
        Ok(RewardMode { components: list })
    }

    /// All three translation metrics.
    pub fn mixed() -> Self {
        RewardMode {
            components: TRANSLATION_METRICS.to_vec(),
        }
    }

    pub fn single(metric: Metric) -> Result<Self, RewardError> {
        Self::new([metric])
    }

    /// The mixed mode followed by the three single-metric modes.
    pub fn standard_modes() -> [RewardMode; 4] {
        [
            RewardMode::mixed(),
            RewardMode {
                components: vec![Metric::Bleu],
            },
            RewardMode {
                components: vec![Metric::ChrFpp],
            },
            RewardMode {
                components: vec![Metric::Meteor],
            },
        ]
    }

    pub fn components(&self) -> &[Metric] {
        &self.components
    }

    pub fn is_mixed(&self) -> bool {
        self.components.len() == TRANSLATION_METRICS.len()
    }

    pub fn name(&self) -> String {
        if self.is_mixed() {
            "mixed".to_string()
        } else {
            self.components
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join("+")
        }
    }

    /// Mean of this mode's metrics taken from `[bleu, chrf_pp, meteor]`.
    fn mean_of(&self, scores: &TranslationScores) -> f64 {
        let sum: f64 = self.components.iter().map(|m| scores.get(*m)).sum();
        sum / self.components.len() as f64
    }
}

impl Default for RewardMode {
    fn default() -> Self {
        RewardMode::mixed()
    }
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for RewardMode {
    type Err = RewardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        if key == "mixed" {
            return Ok(RewardMode::mixed());
        }
        let metrics = key
            .split('+')
            .map(|part| match part.trim() {
                "bleu" => Ok(Metric::Bleu),
                "chrf" | "chrf++" | "chrf_pp" | "chrfpp" => Ok(Metric::ChrFpp),
                "meteor" => Ok(Metric::Meteor),
                _ => Err(RewardError::UnknownMode(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        RewardMode::new(metrics)
    }
}

impl Serialize for RewardMode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for RewardMode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TranslationScores {
    bleu: f64,
    chrf_pp: f64,
    meteor: f64,
}

impl TranslationScores {
    fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Bleu => self.bleu,
            Metric::ChrFpp => self.chrf_pp,
            Metric::Meteor => self.meteor,
            _ => unreachable!("RewardMode only holds translation metrics"),
        }
    }
}

fn translation_scores(segment: &str, record: &TimtRecord) -> TranslationScores {
    let hyp = tokenize(segment, &record.tgt_lang);
    let reference = tokenize(&record.reference_translation, &record.tgt_lang);
    TranslationScores {
        bleu: bleu_tokens(&hyp.tokens, &reference.tokens),
        chrf_pp: chrf_pp(segment, &record.reference_translation),
        meteor: meteor_tokens(&hyp.tokens, &reference.tokens),
    }
}

/// `R_trans`: mean of the mode's metrics against the reference translation,
/// tokenized for the target language.
pub fn translation_reward(segment: &str, record: &TimtRecord, mode: &RewardMode) -> f64 {
    mode.mean_of(&translation_scores(segment, record))
}

/// Raw recognition components, error rates unclamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecognitionScores {
    pub bleu: f64,
    pub meteor: f64,
    pub token_f1: f64,
    pub edit_distance: f64,
    pub cer: f64,
}

impl RecognitionScores {
    pub fn reward(&self) -> f64 {
        let clamp = |x: f64| (1.0 - x).clamp(0.0, 1.0);
        (self.bleu + self.meteor + self.token_f1 + clamp(self.edit_distance) + clamp(self.cer))
            / 5.0
    }
}

pub fn recognition_scores(
    segment: &str,
    record: &TimtRecord,
) -> Result<RecognitionScores, RewardError> {
    let hyp = tokenize(segment, &record.src_lang);
    let reference = tokenize(&record.source_text, &record.src_lang);
    Ok(RecognitionScores {
        bleu: bleu_tokens(&hyp.tokens, &reference.tokens),
        meteor: meteor_tokens(&hyp.tokens, &reference.tokens),
        token_f1: token_f1_tokens(&hyp.tokens, &reference.tokens),
        edit_distance: edit_distance_norm_tokens(&hyp.tokens, &reference.tokens)?,
        cer: cer(segment, &record.source_text)?,
    })
}

/// `R_rec`: five-term mean against the ground-truth transcription.
pub fn recognition_reward(segment: &str, record: &TimtRecord) -> Result<f64, RewardError> {
    Ok(recognition_scores(segment, record)?.reward())
}

/// Final reward with every constituent score. Serializes to a flat JSON
/// object: `format`, `recognition`, `translation`, `final`, then one key per
/// component metric (`rec_*`, `trans_*`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub format: f64,
    pub recognition: Option<f64>,
    pub translation: Option<f64>,
    #[serde(rename = "final")]
    pub final_reward: f64,
    #[serde(flatten)]
    pub components: BTreeMap<String, f64>,
}

fn rec_key(metric: Metric) -> String {
    format!("rec_{}", metric.name())
}

fn trans_key(metric: Metric) -> String {
    format!("trans_{}", metric.name())
}

impl RewardBreakdown {
    pub fn is_format_ok(&self) -> bool {
        self.format > 0.0
    }

    pub fn component(&self, key: &str) -> Option<f64> {
        self.components.get(key).copied()
    }

    /// Final reward this response would have received under `mode`, using
    /// the recorded translation components. `None` if a needed component was
    /// not recorded.
    pub fn final_under(&self, mode: &RewardMode) -> Option<f64> {
        if !self.is_format_ok() {
            return Some(FORMAT_BROKEN_REWARD);
        }
        let mut sum = 0.0;
        for m in mode.components() {
            sum += self.component(&trans_key(*m))?;
        }
        let translation = sum / mode.components().len() as f64;
        Some(self.format + self.recognition.unwrap_or(0.0) + translation)
    }
}

/// Scores a parsed response against its record.
///
/// A malformed response gets `-3` and no task rewards. Otherwise the result
/// is `1 + R_rec + R_trans`, where `R_rec` is 0 for layouts without a
/// recognition block.
pub fn final_reward(
    parsed: &ParsedResponse,
    record: &TimtRecord,
    mode: &RewardMode,
) -> Result<RewardBreakdown, RewardError> {
    let format = format_reward(parsed);
    if !parsed.format_ok {
        return Ok(RewardBreakdown {
            format,
            recognition: None,
            translation: None,
            final_reward: FORMAT_BROKEN_REWARD,
            components: BTreeMap::new(),
        });
    }
    let mut components = BTreeMap::new();

    let recognition = match parsed.recognize.as_deref() {
        Some(segment) => {
            let s = recognition_scores(segment, record)?;
            components.insert(rec_key(Metric::Bleu), s.bleu);
            components.insert(rec_key(Metric::Meteor), s.meteor);
            components.insert(rec_key(Metric::TokenF1), s.token_f1);
            components.insert(rec_key(Metric::EditDistanceNorm), s.edit_distance);
            components.insert(rec_key(Metric::Cer), s.cer);
            Some(s.reward())
        }
        None => None,
    };

    let segment = parsed.translate.as_deref().unwrap_or("");
    let t = translation_scores(segment, record);
    for m in TRANSLATION_METRICS {
        components.insert(trans_key(m), t.get(m));
    }
    let translation = mode.mean_of(&t);

    Ok(RewardBreakdown {
        format,
        recognition,
        translation: Some(translation),
        final_reward: format + recognition.unwrap_or(0.0) + translation,
        components,
    })
}
