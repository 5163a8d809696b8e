use std::collections::HashMap;
use std::hash::Hash;

use super::clipped_overlap;

const CHAR_ORDER: usize = 6;
const WORD_ORDER: usize = 2;
const BETA: f64 = 2.0;

/// chrF++ in `[0, 1]`.
///
/// Character n-grams of orders 1 to 6 are taken after removing whitespace;
/// word n-grams of orders 1 and 2 are whitespace-delimited. Each order
/// yields an F-beta score with beta = 2 and the result is their arithmetic
/// mean. Orders where neither side has any n-gram are left out of the mean.
pub fn chrf_pp(hypothesis: &str, reference: &str) -> f64 {
    let hyp_chars: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    if hyp_chars.is_empty() {
        return 0.0;
    }
    let ref_chars: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let hyp_words: Vec<&str> = hypothesis.split_whitespace().collect();
    let ref_words: Vec<&str> = reference.split_whitespace().collect();

    let char_scores = (1..=CHAR_ORDER).filter_map(|n| order_f_score(&hyp_chars, &ref_chars, n));
    let word_scores = (1..=WORD_ORDER).filter_map(|n| order_f_score(&hyp_words, &ref_words, n));

    let (sum, used) = char_scores
        .chain(word_scores)
        .fold((0.0, 0usize), |(s, k), f| (s + f, k + 1));
    if used == 0 {
        0.0
    } else {
        sum / used as f64
    }
}

fn order_f_score<T: Eq + Hash>(hyp: &[T], reference: &[T], n: usize) -> Option<f64> {
    let h = windows(hyp, n);
    let r = windows(reference, n);
    let (h_total, r_total): (usize, usize) = (h.values().sum(), r.values().sum());
    if h_total == 0 && r_total == 0 {
        return None;
    }
    if h_total == 0 || r_total == 0 {
        return Some(0.0);
    }
    let matched = clipped_overlap(&h, &r) as f64;
    let precision = matched / h_total as f64;
    let recall = matched / r_total as f64;
    let b2 = BETA * BETA;
    let denom = b2 * precision + recall;
    Some(if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    })
}

fn windows<T: Eq + Hash>(seq: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut map = HashMap::new();
    if seq.len() >= n {
        for w in seq.windows(n) {
            *map.entry(w).or_insert(0) += 1;
        }
    }
    map
}
