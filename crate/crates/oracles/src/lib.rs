//! Slow, obviously-correct reference implementations.
//!
//! Everything here works by exhaustive enumeration or full dynamic-programming
//! tables. Nothing is shared with `timt-core`; tests compare the production
//! code against these functions.

/// All contiguous n-grams of `seq`, in order, duplicates kept.
pub fn ngrams<T: Clone>(seq: &[T], n: usize) -> Vec<Vec<T>> {
    if n == 0 || seq.len() < n {
        return Vec::new();
    }
    (0..=seq.len() - n)
        .map(|i| seq[i..i + n].to_vec())
        .collect()
}

fn count_in<T: PartialEq>(items: &[T], x: &T) -> usize {
    items.iter().filter(|y| *y == x).count()
}

/// Clipped overlap between two n-gram lists, counted by linear scans.
pub fn clipped_overlap<T: PartialEq>(hyp: &[T], reference: &[T]) -> usize {
    let mut seen: Vec<&T> = Vec::new();
    let mut total = 0;
    for g in hyp {
        if seen.contains(&g) {
            continue;
        }
        seen.push(g);
        total += count_in(hyp, g).min(count_in(reference, g));
    }
    total
}

/// Sentence BLEU on token sequences: orders 1..=4, add-one smoothing on
/// orders 2..=4, brevity penalty `exp(1 - r/h)` when `h < r`.
pub fn bleu(hyp: &[String], reference: &[String]) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let h = ngrams(hyp, n);
        let r = ngrams(reference, n);
        let matches = clipped_overlap(&h, &r) as f64;
        let total = h.len() as f64;
        let p = if n == 1 {
            matches / total
        } else {
            (matches + 1.0) / (total + 1.0)
        };
        if p == 0.0 {
            return 0.0;
        }
        log_sum += p.ln();
    }
    let geo = (log_sum / 4.0).exp();
    let (h, r) = (hyp.len() as f64, reference.len() as f64);
    let bp = if h < r { (1.0 - r / h).exp() } else { 1.0 };
    geo * bp
}

/// chrF++ with character orders 1..=6 (whitespace stripped), word orders
/// 1..=2 (whitespace-delimited), beta = 2, mean of per-order F scores over
/// orders where at least one side is non-empty.
pub fn chrf_pp(hyp: &str, reference: &str) -> f64 {
    if hyp.chars().all(char::is_whitespace) {
        return 0.0;
    }
    let hc: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let rc: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let hw: Vec<&str> = hyp.split_whitespace().collect();
    let rw: Vec<&str> = reference.split_whitespace().collect();

    let mut per_order = Vec::new();
    for n in 1..=6 {
        per_order.push(f_beta(&ngrams(&hc, n), &ngrams(&rc, n)));
    }
    for n in 1..=2 {
        per_order.push(f_beta(&ngrams(&hw, n), &ngrams(&rw, n)));
    }
    let kept: Vec<f64> = per_order.into_iter().flatten().collect();
    if kept.is_empty() {
        return 0.0;
    }
    kept.iter().sum::<f64>() / kept.len() as f64
}

fn f_beta<T: PartialEq>(h: &[T], r: &[T]) -> Option<f64> {
    if h.is_empty() && r.is_empty() {
        return None;
    }
    if h.is_empty() || r.is_empty() {
        return Some(0.0);
    }
    let m = clipped_overlap(h, r) as f64;
    let p = m / h.len() as f64;
    let rc = m / r.len() as f64;
    if p + rc == 0.0 {
        return Some(0.0);
    }
    Some(5.0 * p * rc / (4.0 * p + rc))
}

/// Every alignment of maximum cardinality between equal tokens, enumerated
/// exhaustively. Returns `(matches, minimum chunk count)`.
pub fn best_alignment(hyp: &[String], reference: &[String]) -> (usize, usize) {
    let mut best = (0usize, usize::MAX);
    let mut used = vec![false; reference.len()];
    let mut pairs = Vec::new();
    enumerate(hyp, reference, 0, &mut used, &mut pairs, &mut best);
    if best.0 == 0 {
        (0, 0)
    } else {
        best
    }
}

fn enumerate(
    hyp: &[String],
    reference: &[String],
    i: usize,
    used: &mut Vec<bool>,
    pairs: &mut Vec<(usize, usize)>,
    best: &mut (usize, usize),
) {
    if i == hyp.len() {
        let m = pairs.len();
        let chunks = count_chunks(pairs);
        if m > best.0 || (m == best.0 && chunks < best.1) {
            *best = (m, chunks);
        }
        return;
    }
    for j in 0..reference.len() {
        if !used[j] && reference[j] == hyp[i] {
            used[j] = true;
            pairs.push((i, j));
            enumerate(hyp, reference, i + 1, used, pairs, best);
            pairs.pop();
            used[j] = false;
        }
    }
    enumerate(hyp, reference, i + 1, used, pairs, best);
}

/// Number of runs of pairs that are adjacent in both sequences.
pub fn count_chunks(pairs: &[(usize, usize)]) -> usize {
    let mut sorted = pairs.to_vec();
    sorted.sort();
    let mut chunks = 0;
    for (k, &(i, j)) in sorted.iter().enumerate() {
        if k == 0 || sorted[k - 1] != (i - 1, j.wrapping_sub(1)) {
            chunks += 1;
        }
    }
    chunks
}

/// METEOR (exact-match module only) from the exhaustive alignment.
pub fn meteor(hyp: &[String], reference: &[String]) -> f64 {
    let (m, chunks) = best_alignment(hyp, reference);
    if m == 0 {
        return 0.0;
    }
    let m_f = m as f64;
    let p = m_f / hyp.len() as f64;
    let r = m_f / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * (chunks as f64 / m_f).powi(3);
    fmean * (1.0 - penalty)
}

/// Bag-of-tokens F1 counted by linear scans.
pub fn token_f1(hyp: &[String], reference: &[String]) -> f64 {
    if hyp.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let overlap = clipped_overlap(hyp, reference) as f64;
    if overlap == 0.0 {
        return 0.0;
    }
    let p = overlap / hyp.len() as f64;
    let r = overlap / reference.len() as f64;
    2.0 * p * r / (p + r)
}

/// Levenshtein distance from the full `(|a|+1) x (|b|+1)` table.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Kendall tau-b by enumerating all `n(n-1)/2` pairs.
pub fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            if dx == 0.0 {
                tie_x += 1;
            }
            if dy == 0.0 {
                tie_y += 1;
            }
            if dx != 0.0 && dy != 0.0 {
                if (dx > 0.0) == (dy > 0.0) {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - tie_x) * (n0 - tie_y)) as f64).sqrt();
    (concordant - discordant) as f64 / denom
}

/// Average rank of each value: `#less + (#equal + 1) / 2`.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let less = xs.iter().filter(|y| *y < x).count() as f64;
            let equal = xs.iter().filter(|y| *y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&average_ranks(xs), &average_ranks(ys))
}
