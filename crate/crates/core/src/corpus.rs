//! Dataset records, difficulty classes and curriculum ordering.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::textmetrics::{tokenize, Lang};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read dataset {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed JSON: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: field `{field}`: {reason}")]
    Schema {
        line: usize,
        field: &'static str,
        reason: String,
    },
    #[error("line {line}: duplicate record id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("dataset is empty")]
    EmptyDataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];
}

/// Easy: at most 2 boxes and at most 16 tokens. Hard: more than 5 boxes or
/// more than 25 tokens. Medium: everything else.
pub fn classify_difficulty(bbox_count: u32, token_length: u32) -> Difficulty {
    if bbox_count <= 2 && token_length <= 16 {
        Difficulty::Easy
    } else if bbox_count > 5 || token_length > 25 {
        Difficulty::Hard
    } else {
        Difficulty::Medium
    }
}

/// One sample: ground-truth transcription plus reference translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimtRecord {
    pub id: String,
    pub src_lang: Lang,
    pub tgt_lang: Lang,
    /// Text regions joined by newlines in reading order.
    pub source_text: String,
    pub reference_translation: String,
    pub bbox_count: u32,
    pub token_length: u32,
    pub difficulty: Difficulty,
}

impl TimtRecord {
    /// Builds a record, computing `token_length` with the shared tokenizer
    /// when absent and deriving the difficulty.
    pub fn new(
        id: impl Into<String>,
        src_lang: impl Into<Lang>,
        tgt_lang: impl Into<Lang>,
        source_text: impl Into<String>,
        reference_translation: impl Into<String>,
        bbox_count: u32,
        token_length: Option<u32>,
    ) -> Self {
        let src_lang = src_lang.into();
        let source_text = source_text.into();
        let token_length =
            token_length.unwrap_or_else(|| tokenize(&source_text, &src_lang).len() as u32);
        TimtRecord {
            id: id.into(),
            src_lang,
            tgt_lang: tgt_lang.into(),
            source_text,
            reference_translation: reference_translation.into(),
            bbox_count,
            token_length,
            difficulty: classify_difficulty(bbox_count, token_length),
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    src_lang: Option<String>,
    tgt_lang: Option<String>,
    source_text: Option<String>,
    reference_translation: Option<String>,
    bbox_count: Option<i64>,
    token_length: Option<i64>,
    difficulty: Option<Difficulty>,
}

fn required<T>(value: Option<T>, line: usize, field: &'static str) -> Result<T, CorpusError> {
    value.ok_or(CorpusError::Schema {
        line,
        field,
        reason: "missing required field".into(),
    })
}

fn non_negative(
    value: Option<i64>,
    line: usize,
    field: &'static str,
) -> Result<Option<u32>, CorpusError> {
    value
        .map(|v| {
            u32::try_from(v).map_err(|_| CorpusError::Schema {
                line,
                field,
                reason: format!("expected a non-negative integer, got {v}"),
            })
        })
        .transpose()
}

fn non_blank(value: String, line: usize, field: &'static str) -> Result<String, CorpusError> {
    if value.trim().is_empty() {
        return Err(CorpusError::Schema {
            line,
            field,
            reason: "must not be blank".into(),
        });
    }
    Ok(value)
}

/// Parses one JSONL line (1-based `line` for diagnostics).
pub fn parse_record(text: &str, line: usize) -> Result<TimtRecord, CorpusError> {
    let raw: RawRecord =
        serde_json::from_str(text).map_err(|source| CorpusError::Parse { line, source })?;
    let src_lang = required(raw.src_lang, line, "src_lang")?;
    let tgt_lang = required(raw.tgt_lang, line, "tgt_lang")?;
    let source_text = non_blank(
        required(raw.source_text, line, "source_text")?,
        line,
        "source_text",
    )?;
    let reference = non_blank(
        required(raw.reference_translation, line, "reference_translation")?,
        line,
        "reference_translation",
    )?;
    // Datasets without box annotations count as a single text region.
    let bbox_count = non_negative(raw.bbox_count, line, "bbox_count")?.unwrap_or(1);
    let token_length = non_negative(raw.token_length, line, "token_length")?;
    let id = raw.id.unwrap_or_else(|| format!("line-{line}"));

    let record = TimtRecord::new(
        id,
        src_lang,
        tgt_lang,
        source_text,
        reference,
        bbox_count,
        token_length,
    );
    if let Some(stated) = raw.difficulty {
        if stated != record.difficulty {
            return Err(CorpusError::Schema {
                line,
                field: "difficulty",
                reason: format!(
                    "stated {stated:?} but bbox_count={} token_length={} gives {:?}",
                    record.bbox_count, record.token_length, record.difficulty
                ),
            });
        }
    }
    Ok(record)
}

/// Reads a JSONL dataset. Blank lines are skipped; ids must be unique.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<TimtRecord>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    parse_dataset(&text)
}

pub fn parse_dataset(text: &str) -> Result<Vec<TimtRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(line, idx + 1)?;
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: idx + 1,
                id: record.id,
            });
        }
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurriculumStrategy {
    #[default]
    Shuffle,
    Ascend,
    Descend,
}

impl CurriculumStrategy {
    pub const ALL: [CurriculumStrategy; 3] = [
        CurriculumStrategy::Shuffle,
        CurriculumStrategy::Ascend,
        CurriculumStrategy::Descend,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurriculumStrategy::Shuffle => "shuffle",
            CurriculumStrategy::Ascend => "ascend",
            CurriculumStrategy::Descend => "descend",
        }
    }
}

impl fmt::Display for CurriculumStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurriculumStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shuffle" | "random" => Ok(CurriculumStrategy::Shuffle),
            "ascend" | "easy-to-hard" => Ok(CurriculumStrategy::Ascend),
            "descend" | "hard-to-easy" => Ok(CurriculumStrategy::Descend),
            other => Err(format!("unknown curriculum strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurriculumPlan {
    pub strategy: CurriculumStrategy,
    pub seed: u64,
    /// Record ids in presentation order.
    pub order: Vec<String>,
}

/// Orders `records` for training.
///
/// Ascend and Descend shuffle inside each difficulty band with the seeded
/// generator, then lay the bands out easy-to-hard or hard-to-easy. Both use
/// the same within-band orders for a given seed.
pub fn build_curriculum(
    records: &[TimtRecord],
    strategy: CurriculumStrategy,
    seed: u64,
) -> Result<CurriculumPlan, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = match strategy {
        CurriculumStrategy::Shuffle => {
            let mut ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
            ids.shuffle(&mut rng);
            ids
        }
        CurriculumStrategy::Ascend | CurriculumStrategy::Descend => {
            let mut bands: Vec<Vec<String>> = Difficulty::ALL
                .iter()
                .map(|level| {
                    let mut band: Vec<String> = records
                        .iter()
                        .filter(|r| r.difficulty == *level)
                        .map(|r| r.id.clone())
                        .collect();
                    band.shuffle(&mut rng);
                    band
                })
                .collect();
            if strategy == CurriculumStrategy::Descend {
                bands.reverse();
            }
            bands.concat()
        }
    };
    Ok(CurriculumPlan {
        strategy,
        seed,
        order,
    })
}
