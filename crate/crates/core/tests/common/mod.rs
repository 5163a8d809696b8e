#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

pub const WORDS: [&str; 9] = ["the", "cat", "sat", "on", "mat", "a", "dog", "ran", ","];
pub const HANZI: [&str; 8] = ["老", "友", "记", "你", "好", "世", "界", "。"];

/// Space-joined random sentence of `0..=max_len` units drawn from `pool`.
pub fn sentence(rng: &mut impl Rng, pool: &[&str], max_len: usize) -> String {
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| *pool.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Random sentence from the word pool with at least one token.
pub fn nonempty(rng: &mut impl Rng, pool: &[&str], max_len: usize) -> String {
    loop {
        let s = sentence(rng, pool, max_len);
        if !s.is_empty() {
            return s;
        }
    }
}
