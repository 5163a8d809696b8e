//! Tokenization and scalar quality metrics.
//!
//! Overlap metrics (BLEU, chrF++, METEOR, token F1) return values in
//! `[0, 1]`. Error rates (normalized edit distance, CER) are raw ratios and
//! can exceed 1; callers clamp them.

mod bleu;
mod chrf;
mod edit;
mod meteor;

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

pub use bleu::{bleu, bleu_tokens};
pub use chrf::chrf_pp;
pub use edit::{cer, edit_distance_norm, edit_distance_norm_tokens, levenshtein};
pub use meteor::{align, meteor, meteor_tokens, Alignment};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("cannot normalize {metric} by an empty reference")]
    EmptyReference { metric: Metric },
}

/// Language code such as `en`, `zh` or `zh-CN`. Stored lowercased.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct Lang(String);

impl Lang {
    pub fn new(code: impl AsRef<str>) -> Self {
        Lang(code.as_ref().trim().to_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Scripts written without spaces between words get per-character
    /// tokenization. Only Chinese is recognised.
    pub fn is_unsegmented(&self) -> bool {
        let primary = self.0.split(['-', '_']).next().unwrap_or("");
        primary == "zh"
    }

    pub fn scheme(&self) -> TokenScheme {
        if self.is_unsegmented() {
            TokenScheme::PerCharacter
        } else {
            TokenScheme::WordLike
        }
    }
}

impl From<String> for Lang {
    fn from(s: String) -> Self {
        Lang::new(s)
    }
}

impl From<&str> for Lang {
    fn from(s: &str) -> Self {
        Lang::new(s)
    }
}

impl From<Lang> for String {
    fn from(l: Lang) -> Self {
        l.0
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenScheme {
    WordLike,
    PerCharacter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub tokens: Vec<String>,
    pub language: Lang,
    pub scheme: TokenScheme,
}

impl TokenizedText {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces; tokenizing the result again yields
    /// the same tokens.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Punctuation that is split off into standalone tokens.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c,
            '\u{00A1}' | '\u{00A7}' | '\u{00AB}' | '\u{00B6}' | '\u{00B7}' | '\u{00BB}' | '\u{00BF}'
            | '\u{2010}'..='\u{2027}'
            | '\u{2030}'..='\u{205E}'
            | '\u{3001}'..='\u{3003}'
            | '\u{3008}'..='\u{3011}'
            | '\u{3014}'..='\u{301F}'
            | '\u{FF01}'..='\u{FF0F}'
            | '\u{FF1A}'..='\u{FF20}'
            | '\u{FF3B}'..='\u{FF40}'
            | '\u{FF5B}'..='\u{FF65}')
}

/// Language-aware tokenizer shared by every metric and by difficulty
/// classification.
///
/// Chinese: every non-whitespace character is a token. Everything else:
/// lowercased, split on whitespace, punctuation characters split out as
/// their own tokens.
pub fn tokenize(text: &str, language: &Lang) -> TokenizedText {
    let scheme = language.scheme();
    let tokens = match scheme {
        TokenScheme::PerCharacter => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect(),
        TokenScheme::WordLike => {
            let lowered = text.to_lowercase();
            let mut out = Vec::new();
            for word in lowered.split_whitespace() {
                let mut current = String::new();
                for c in word.chars() {
                    if is_punctuation(c) {
                        if !current.is_empty() {
                            out.push(std::mem::take(&mut current));
                        }
                        out.push(c.to_string());
                    } else {
                        current.push(c);
                    }
                }
                if !current.is_empty() {
                    out.push(current);
                }
            }
            out
        }
    };
    TokenizedText {
        tokens,
        language: language.clone(),
        scheme,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    Bleu,
    ChrFpp,
    Meteor,
    TokenF1,
    EditDistanceNorm,
    Cer,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Bleu => "bleu",
            Metric::ChrFpp => "chrf_pp",
            Metric::Meteor => "meteor",
            Metric::TokenF1 => "token_f1",
            Metric::EditDistanceNorm => "edit_distance",
            Metric::Cer => "cer",
        }
    }

    /// Error rates are lower-is-better and unbounded above.
    pub fn is_error_rate(self) -> bool {
        matches!(self, Metric::EditDistanceNorm | Metric::Cer)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricScore {
    pub metric: Metric,
    pub value: f64,
}

/// Bag-of-tokens F1 between two strings.
pub fn token_f1(hypothesis: &str, reference: &str, language: &Lang) -> f64 {
    let hyp = tokenize(hypothesis, language);
    let reference = tokenize(reference, language);
    token_f1_tokens(&hyp.tokens, &reference.tokens)
}

pub fn token_f1_tokens(hyp: &[String], reference: &[String]) -> f64 {
    if hyp.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let ref_counts = counts(reference.iter());
    let overlap: usize = counts(hyp.iter())
        .into_iter()
        .map(|(t, c)| c.min(ref_counts.get(t).copied().unwrap_or(0)))
        .sum();
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / hyp.len() as f64;
    let r = overlap as f64 / reference.len() as f64;
    2.0 * p * r / (p + r)
}

pub(crate) fn counts<K: Eq + Hash>(items: impl Iterator<Item = K>) -> HashMap<K, usize> {
    let mut map = HashMap::new();
    for k in items {
        *map.entry(k).or_insert(0) += 1;
    }
    map
}

/// Sum of `min(count_a, count_b)` over all keys.
pub(crate) fn clipped_overlap<K: Eq + Hash>(a: &HashMap<K, usize>, b: &HashMap<K, usize>) -> usize {
    a.iter()
        .map(|(k, &c)| c.min(b.get(k).copied().unwrap_or(0)))
        .sum()
}
