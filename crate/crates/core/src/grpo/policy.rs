use std::collections::HashMap;
use std::ops::Range;

use crate::corpus::TimtRecord;
use crate::format::{Tag, TaskLayout};

/// The finite set of responses the toy policy can emit for one question.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionVocab {
    pub question_id: String,
    pub responses: Vec<String>,
}

impl QuestionVocab {
    pub fn new(question_id: impl Into<String>, responses: Vec<String>) -> Self {
        QuestionVocab {
            question_id: question_id.into(),
            responses,
        }
    }
}

/// Per-question softmax policy over a fixed response vocabulary.
///
/// Holds three parameter snapshots: the trainable current policy, the
/// behavior policy that sampled the latest rollouts, and a frozen reference.
#[derive(Debug, Clone)]
pub struct ToyPolicy {
    questions: Vec<QuestionVocab>,
    index: HashMap<String, usize>,
    offsets: Vec<usize>,
    current: Vec<f64>,
    behavior: Vec<f64>,
    reference: Vec<f64>,
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - lse).collect()
}

impl ToyPolicy {
    /// Uniform initial policy; the reference equals the initial parameters.
    pub fn uniform(questions: Vec<QuestionVocab>) -> Self {
        let logits = questions
            .iter()
            .map(|q| vec![0.0; q.responses.len()])
            .collect();
        Self::from_logits(questions, logits)
    }

    /// Panics if `logits` does not match the vocabulary shapes.
    pub fn from_logits(questions: Vec<QuestionVocab>, logits: Vec<Vec<f64>>) -> Self {
        assert_eq!(
            questions.len(),
            logits.len(),
            "one logit vector per question"
        );
        let mut offsets = vec![0];
        let mut flat = Vec::new();
        for (q, l) in questions.iter().zip(&logits) {
            assert_eq!(q.responses.len(), l.len(), "logits for `{}`", q.question_id);
            assert!(
                !l.is_empty(),
                "question `{}` has no responses",
                q.question_id
            );
            flat.extend_from_slice(l);
            offsets.push(flat.len());
        }
        let index = questions
            .iter()
            .enumerate()
            .map(|(i, q)| (q.question_id.clone(), i))
            .collect();
        ToyPolicy {
            questions,
            index,
            offsets,
            behavior: flat.clone(),
            reference: flat.clone(),
            current: flat,
        }
    }

    /// One vocabulary per record, built for `layout`.
    pub fn for_records(records: &[TimtRecord], layout: TaskLayout) -> Self {
        Self::uniform(
            records
                .iter()
                .map(|r| QuestionVocab::new(r.id.clone(), build_vocabulary(r, layout)))
                .collect(),
        )
    }

    pub fn num_questions(&self) -> usize {
        self.questions.len()
    }

    pub fn num_params(&self) -> usize {
        self.current.len()
    }

    pub fn question_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn question(&self, q: usize) -> &QuestionVocab {
        &self.questions[q]
    }

    pub fn param_range(&self, q: usize) -> Range<usize> {
        self.offsets[q]..self.offsets[q + 1]
    }

    pub fn params(&self) -> &[f64] {
        &self.current
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.current.len());
        self.current.copy_from_slice(params);
    }

    /// `theta += step * direction`.
    pub fn ascend(&mut self, direction: &[f64], step: f64) {
        for (t, d) in self.current.iter_mut().zip(direction) {
            *t += step * d;
        }
    }

    /// Overwrites the behavior snapshot with the current parameters.
    pub fn sync_behavior(&mut self) {
        self.behavior.copy_from_slice(&self.current);
    }

    /// Overwrites the behavior snapshot; used to build off-policy test cases.
    pub fn set_behavior(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.behavior.len());
        self.behavior.copy_from_slice(params);
    }

    pub fn log_probs(&self, q: usize) -> Vec<f64> {
        log_softmax(&self.current[self.param_range(q)])
    }

    pub fn probs(&self, q: usize) -> Vec<f64> {
        self.log_probs(q).into_iter().map(f64::exp).collect()
    }

    pub fn behavior_log_probs(&self, q: usize) -> Vec<f64> {
        log_softmax(&self.behavior[self.param_range(q)])
    }

    pub fn reference_log_probs(&self, q: usize) -> Vec<f64> {
        log_softmax(&self.reference[self.param_range(q)])
    }

    pub fn behavior_log_prob(&self, q: usize, action: usize) -> f64 {
        self.behavior_log_probs(q)[action]
    }

    pub fn reference_log_prob(&self, q: usize, action: usize) -> f64 {
        self.reference_log_probs(q)[action]
    }
}

/// Splits text into the units corruptions operate on: whitespace words when
/// present, characters otherwise.
fn units(text: &str) -> (Vec<String>, &'static str) {
    let words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if words.len() > 1 {
        (words, " ")
    } else {
        (text.trim().chars().map(String::from).collect(), "")
    }
}

fn drop_middle(text: &str) -> String {
    let (u, sep) = units(text);
    if u.len() < 2 {
        return String::new();
    }
    let mut v = u.clone();
    v.remove(u.len() / 2);
    v.join(sep)
}

fn first_half(text: &str) -> String {
    let (u, sep) = units(text);
    u[..u.len().div_ceil(2)].join(sep)
}

fn drop_every_fourth(text: &str) -> String {
    let (u, sep) = units(text);
    if u.len() < 4 {
        return drop_middle(text);
    }
    u.iter()
        .enumerate()
        .filter(|(i, _)| i % 4 != 3)
        .map(|(_, s)| s.as_str())
        .collect::<Vec<_>>()
        .join(sep)
}

fn reversed(text: &str) -> String {
    let (mut u, sep) = units(text);
    u.reverse();
    u.join(sep)
}

const THINK: &str = "The image is a short notice; keep its layout and plain tone.";

/// Deterministic response vocabulary for one record: eight well-formed
/// responses of graded quality followed by five malformed ones.
pub fn build_vocabulary(record: &TimtRecord, layout: TaskLayout) -> Vec<String> {
    let src = record.source_text.trim();
    let reference = record.reference_translation.trim();
    let wrong = if record.tgt_lang.is_unsegmented() {
        "无法识别"
    } else {
        "unreadable text"
    };

    let rec = [src.to_string(), drop_middle(src), first_half(src)];
    let trans = [
        reference.to_string(),
        drop_every_fourth(reference),
        first_half(reference),
        reversed(reference),
        wrong.to_string(),
    ];
    let pairs = [
        (0, 0),
        (0, 1),
        (1, 0),
        (1, 2),
        (2, 3),
        (2, 4),
        (0, 2),
        (1, 3),
    ];

    let render = |r: &str, t: &str| layout.render(r, THINK, t);
    let mut out: Vec<String> = pairs
        .iter()
        .map(|&(r, t)| render(&rec[r], &trans[t]))
        .collect();

    let best = render(&rec[0], &trans[0]);
    let unclosed = best
        .trim_end()
        .strip_suffix(Tag::Translate.close())
        .unwrap_or(&best);
    out.push(unclosed.to_string());
    out.push(reference.to_string());
    out.push(format!("Sure! Here is the translation: {best}"));
    out.push(format!(
        "<translate>{reference}</translate>{}",
        render(&rec[0], &trans[1])
    ));
    out.push(render(&rec[0], &format!("<think>{reference}")));
    out
}
