use std::collections::HashMap;

use super::{clipped_overlap, tokenize, Lang};

const MAX_ORDER: usize = 4;

/// Sentence-level BLEU in `[0, 1]`.
///
/// Modified n-gram precisions for orders 1 to 4, combined by geometric mean.
/// Orders 2 to 4 use add-one smoothing on both numerator and denominator;
/// the unigram precision is unsmoothed, so a hypothesis sharing no tokens
/// with the reference scores exactly 0. Brevity penalty `exp(1 - r/h)`
/// applies when the hypothesis is shorter than the reference.
pub fn bleu(hypothesis: &str, reference: &str, language: &Lang) -> f64 {
    let hyp = tokenize(hypothesis, language);
    let reference = tokenize(reference, language);
    bleu_tokens(&hyp.tokens, &reference.tokens)
}

pub fn bleu_tokens(hyp: &[String], reference: &[String]) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let mut log_precision = 0.0;
    for n in 1..=MAX_ORDER {
        let h = ngram_counts(hyp, n);
        let r = ngram_counts(reference, n);
        let matched = clipped_overlap(&h, &r) as f64;
        let total = hyp.len().saturating_sub(n - 1) as f64;
        let precision = if n == 1 {
            matched / total
        } else {
            (matched + 1.0) / (total + 1.0)
        };
        if precision == 0.0 {
            return 0.0;
        }
        log_precision += precision.ln();
    }
    let hyp_len = hyp.len() as f64;
    let ref_len = reference.len() as f64;
    let brevity = if hyp_len < ref_len {
        (1.0 - ref_len / hyp_len).exp()
    } else {
        1.0
    };
    brevity * (log_precision / MAX_ORDER as f64).exp()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut map = HashMap::new();
    for w in tokens.windows(n) {
        *map.entry(w).or_insert(0) += 1;
    }
    map
}
