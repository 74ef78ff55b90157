//! Seeded fixture generators shared by the benchmarks.

use adaptkit::{PhraseTable, Sentence};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sentences of 1..=`max_len` words drawn from a Zipf-like distribution
/// over `vocab` words.
pub fn zipf_corpus(seed: u64, sentences: usize, vocab: usize, max_len: usize) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (1..=vocab).map(|r| 1.0 / r as f64).collect();
    let dist = WeightedIndex::new(&weights).expect("vocab is non-empty");
    (0..sentences)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            Sentence::from_tokens((0..len).map(|_| format!("w{}", dist.sample(&mut rng))))
        })
        .collect()
}

/// A phrase table with `rows` distinct pairs and `features` scores each.
pub fn phrase_table(seed: u64, rows: usize, features: usize) -> PhraseTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    for i in 0..rows {
        let src = format!("s{} s{}", rng.gen_range(0..rows / 4 + 1), i % 7);
        let scores: Vec<String> = (0..features).map(|_| format!("{:.6}", rng.gen_range(0.001..1.0))).collect();
        text.push_str(&format!("{src} ||| t{i} ||| {} ||| 0-0 ||| 3 2 1\n", scores.join(" ")));
    }
    PhraseTable::read(text.as_bytes()).expect("generated rows are well formed")
}

/// Integer lengths between 1 and `max`.
pub fn lengths(seed: u64, n: usize, max: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(1..=max)).collect()
}
