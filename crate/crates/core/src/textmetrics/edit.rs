use super::{tokenize, Lang, Metric, MetricError};

/// Unit-cost Levenshtein distance, two-row formulation.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            cur[j + 1] = substitute.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Token-level edit distance divided by the reference token count.
pub fn edit_distance_norm(
    hypothesis: &str,
    reference: &str,
    language: &Lang,
) -> Result<f64, MetricError> {
    let hyp = tokenize(hypothesis, language);
    let reference = tokenize(reference, language);
    edit_distance_norm_tokens(&hyp.tokens, &reference.tokens)
}

pub fn edit_distance_norm_tokens(hyp: &[String], reference: &[String]) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference {
            metric: Metric::EditDistanceNorm,
        });
    }
    Ok(levenshtein(hyp, reference) as f64 / reference.len() as f64)
}

/// Character error rate over raw characters, whitespace included.
pub fn cer(hypothesis: &str, reference: &str) -> Result<f64, MetricError> {
    let r: Vec<char> = reference.chars().collect();
    if r.is_empty() {
        return Err(MetricError::EmptyReference {
            metric: Metric::Cer,
        });
    }
    let h: Vec<char> = hypothesis.chars().collect();
    Ok(levenshtein(&h, &r) as f64 / r.len() as f64)
}
