use std::collections::HashMap;

use super::{tokenize, Lang};

/// Search nodes explored before settling for the best alignment found so
/// far. Inputs with few repeated tokens finish far below this.
const SEARCH_BUDGET: usize = 250_000;

/// An exact-match unigram alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// `(hypothesis index, reference index)` pairs sorted by hypothesis index.
    pub pairs: Vec<(usize, usize)>,
    pub chunks: usize,
    /// `false` when the search budget ran out before the chunk count was
    /// proven minimal.
    pub exhaustive: bool,
}

impl Alignment {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }
}

/// METEOR with the exact-match module only (no stemming or synonyms).
///
/// `Fmean = 10PR / (R + 9P)`, `penalty = 0.5 * (chunks / matches)^3`,
/// score `Fmean * (1 - penalty)`.
pub fn meteor(hypothesis: &str, reference: &str, language: &Lang) -> f64 {
    let hyp = tokenize(hypothesis, language);
    let reference = tokenize(reference, language);
    meteor_tokens(&hyp.tokens, &reference.tokens)
}

pub fn meteor_tokens(hyp: &[String], reference: &[String]) -> f64 {
    let alignment = align(hyp, reference);
    let matches = alignment.matches();
    if matches == 0 {
        return 0.0;
    }
    let m = matches as f64;
    let precision = m / hyp.len() as f64;
    let recall = m / reference.len() as f64;
    let fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty = 0.5 * (alignment.chunks as f64 / m).powi(3);
    fmean * (1.0 - penalty)
}

/// Maximum-cardinality alignment of equal tokens with the fewest chunks.
///
/// A chunk is a maximal run of pairs adjacent in both sequences. Depth-first
/// branch and bound over hypothesis positions; the first descent prefers
/// extending the current chunk, which yields the greedy left-to-right
/// alignment as the initial bound.
pub fn align(hyp: &[String], reference: &[String]) -> Alignment {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut ref_ids = Vec::with_capacity(reference.len());
    for t in reference {
        let next = ids.len();
        ref_ids.push(*ids.entry(t.as_str()).or_insert(next));
    }
    let types = ids.len();
    // Hypothesis tokens absent from the reference can never match.
    let hyp_ids: Vec<Option<usize>> = hyp.iter().map(|t| ids.get(t.as_str()).copied()).collect();

    let mut ref_positions = vec![Vec::new(); types];
    for (j, &t) in ref_ids.iter().enumerate() {
        ref_positions[t].push(j);
    }
    let mut hyp_count = vec![0usize; types];
    for t in hyp_ids.iter().flatten() {
        hyp_count[*t] += 1;
    }
    let need: Vec<usize> = (0..types)
        .map(|t| hyp_count[t].min(ref_positions[t].len()))
        .collect();

    let mut search = Search {
        hyp_ids: &hyp_ids,
        ref_positions: &ref_positions,
        need,
        remaining: hyp_count,
        used: vec![false; reference.len()],
        assigned: vec![None; hyp.len()],
        best: None,
        nodes: 0,
    };
    search.descend(0, 0);
    let exhaustive = search.nodes <= SEARCH_BUDGET;
    let (chunks, assigned) = search.best.unwrap_or((0, Vec::new()));
    let pairs: Vec<(usize, usize)> = assigned
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect();
    Alignment {
        pairs,
        chunks,
        exhaustive,
    }
}

struct Search<'a> {
    hyp_ids: &'a [Option<usize>],
    ref_positions: &'a [Vec<usize>],
    /// Matches still required per token type.
    need: Vec<usize>,
    /// Hypothesis occurrences per type at or after the current position.
    remaining: Vec<usize>,
    used: Vec<bool>,
    assigned: Vec<Option<usize>>,
    best: Option<(usize, Vec<Option<usize>>)>,
    nodes: usize,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, chunks: usize) {
        self.nodes += 1;
        if let Some((best, _)) = &self.best {
            if chunks >= *best || self.nodes > SEARCH_BUDGET {
                return;
            }
        }
        if i == self.hyp_ids.len() {
            self.best = Some((chunks, self.assigned.clone()));
            return;
        }
        let Some(t) = self.hyp_ids[i] else {
            self.descend(i + 1, chunks);
            return;
        };
        self.remaining[t] -= 1;

        if self.need[t] > 0 {
            let continues = i
                .checked_sub(1)
                .and_then(|p| self.assigned[p])
                .map(|j| j + 1);
            // Try extending the current chunk first, then every other slot.
            let candidates: Vec<usize> = continues
                .into_iter()
                .filter(|j| self.ref_positions[t].contains(j))
                .chain(
                    self.ref_positions[t]
                        .iter()
                        .copied()
                        .filter(|j| Some(*j) != continues),
                )
                .collect();
            for j in candidates {
                if self.used[j] {
                    continue;
                }
                let cost = usize::from(Some(j) != continues);
                self.used[j] = true;
                self.assigned[i] = Some(j);
                self.need[t] -= 1;
                self.descend(i + 1, chunks + cost);
                self.need[t] += 1;
                self.assigned[i] = None;
                self.used[j] = false;
            }
        }
        // Leaving this occurrence unmatched is only allowed if later
        // occurrences can still supply every required match.
        if self.remaining[t] >= self.need[t] {
            self.descend(i + 1, chunks);
        }
        self.remaining[t] += 1;
    }
}
