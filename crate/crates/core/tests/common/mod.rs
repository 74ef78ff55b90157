//! Test-only oracles and fixture generators. Nothing here calls into the
//! estimation code paths it is used to check.

#![allow(dead_code)]

pub mod kn_oracle;

use adaptkit::Sentence;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn corpus(lines: &[&str]) -> Vec<Sentence> {
    lines.iter().map(|l| Sentence::from_line(l)).collect()
}

/// Random sentences over `vocab` words with a skewed word distribution.
pub fn random_corpus(seed: u64, sentences: usize, vocab: usize, max_len: usize) -> Vec<Sentence> {
    prefixed_corpus(seed, sentences, vocab, max_len, "w")
}

/// Like [`random_corpus`] but with the frequency ranking rotated by
/// `shift`: same vocabulary, different genre.
pub fn shifted_corpus(seed: u64, sentences: usize, vocab: usize, max_len: usize, shift: usize) -> Vec<Sentence> {
    random_corpus(seed, sentences, vocab, max_len)
        .into_iter()
        .map(|s| {
            s.map_tokens(|w| {
                let i: usize = w[1..].parse().unwrap();
                format!("w{}", (i + shift) % vocab)
            })
        })
        .collect()
}

/// Like [`random_corpus`] with words spelled `{prefix}{i}`.
pub fn prefixed_corpus(seed: u64, sentences: usize, vocab: usize, max_len: usize, prefix: &str) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (1..=vocab).map(|r| 1.0 / r as f64).collect();
    let dist = rand::distributions::WeightedIndex::new(&weights).unwrap();
    (0..sentences)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            let words: Vec<String> = (0..len).map(|_| format!("{prefix}{}", dist.sample(&mut rng))).collect();
            Sentence::from_tokens(&words)
        })
        .collect()
}

/// Per-token log10 probabilities of a corpus under `score(history, word)`,
/// with `pad` leading `<s>` and a closing `</s>` per sentence.
pub fn token_logprobs(corpus: &[Sentence], pad: usize, mut score: impl FnMut(&[String], &str) -> f64) -> Vec<f64> {
    let mut out = Vec::new();
    for s in corpus {
        let mut hist: Vec<String> = vec!["<s>".to_string(); pad];
        for w in s.iter().chain(std::iter::once("</s>")) {
            out.push(score(&hist, w));
            hist.push(w.to_string());
        }
    }
    out
}

pub fn ppl_of(logprobs: &[f64]) -> f64 {
    10f64.powf(-logprobs.iter().sum::<f64>() / logprobs.len() as f64)
}

/// Log-likelihood (natural log) of a corpus under the maximum-likelihood
/// class bigram model, straight from the definition: each token w2
/// following w1 costs p(c2|c1)·p(w2|c2). Boundary symbols are their own
/// classes.
pub fn class_bigram_loglik(corpus: &[Sentence], class_of: impl Fn(&str) -> String) -> f64 {
    use std::collections::HashMap;
    let mut pair: HashMap<(String, String), f64> = HashMap::new();
    let mut cls_first: HashMap<String, f64> = HashMap::new();
    let mut cls_second: HashMap<String, f64> = HashMap::new();
    let mut word_second: HashMap<String, f64> = HashMap::new();
    let mut seq: Vec<(String, String)> = Vec::new();
    for s in corpus {
        let mut toks = vec!["<s>".to_string()];
        toks.extend(s.iter().map(str::to_string));
        toks.push("</s>".to_string());
        let cls = |w: &str| if w == "<s>" || w == "</s>" { w.to_string() } else { class_of(w) };
        for win in toks.windows(2) {
            let (c1, c2) = (cls(&win[0]), cls(&win[1]));
            *pair.entry((c1.clone(), c2.clone())).or_default() += 1.0;
            *cls_first.entry(c1.clone()).or_default() += 1.0;
            *cls_second.entry(c2.clone()).or_default() += 1.0;
            *word_second.entry(win[1].clone()).or_default() += 1.0;
            seq.push((c1, win[1].clone()));
        }
    }
    // sum of per-token log probabilities
    let mut ll = 0.0;
    for (c1, w2) in &seq {
        let c2 = if w2 == "</s>" { w2.clone() } else { class_of(w2) };
        let p_class = pair[&(c1.clone(), c2.clone())] / cls_first[c1];
        let p_word = word_second[w2] / cls_second[&c2];
        ll += (p_class * p_word).ln();
    }
    ll
}

/// Word bigram log-likelihood under maximum-likelihood estimates.
pub fn word_bigram_loglik(corpus: &[Sentence]) -> f64 {
    use std::collections::HashMap;
    let mut pair: HashMap<(String, String), f64> = HashMap::new();
    let mut first: HashMap<String, f64> = HashMap::new();
    for s in corpus {
        let mut toks = vec!["<s>".to_string()];
        toks.extend(s.iter().map(str::to_string));
        toks.push("</s>".to_string());
        for win in toks.windows(2) {
            *pair.entry((win[0].clone(), win[1].clone())).or_default() += 1.0;
            *first.entry(win[0].clone()).or_default() += 1.0;
        }
    }
    pair.iter().map(|((a, _), &n)| n * (n / first[a]).ln()).sum()
}
