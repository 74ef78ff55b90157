//! Seeded synthetic corpora for checking the miner.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Arabic letters used on the source side.
const SRC_ALPHABET: &str = "ابتثجحخدذرزسشصطعفقلم";
const TGT_ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz";

const DROP_PROB: f64 = 0.05;
const INSERT_PROB: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticPair {
    pub src: String,
    pub tgt: String,
    pub is_transliteration: bool,
}

fn word(rng: &mut ChaCha8Rng, alphabet: &[char]) -> String {
    let n = rng.gen_range(3..=8);
    (0..n).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// `n_tr` pairs produced by a random injective character mapping, with
/// occasional dropped or inserted target letters, plus `n_random` pairs
/// of unrelated words. The pairs come out shuffled.
pub fn synthetic_pairs(seed: u64, n_tr: usize, n_random: usize) -> Result<Vec<SyntheticPair>> {
    if n_tr + n_random == 0 {
        return Err(Error::arg("nothing to generate"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src: Vec<char> = SRC_ALPHABET.chars().collect();
    let mut tgt: Vec<char> = TGT_ALPHABET.chars().collect();
    tgt.shuffle(&mut rng);
    let mapping = |c: char| tgt[src.iter().position(|&s| s == c).unwrap()];

    let mut out = Vec::with_capacity(n_tr + n_random);
    for _ in 0..n_tr {
        let s = word(&mut rng, &src);
        let mut t = String::new();
        for c in s.chars() {
            let r: f64 = rng.gen();
            if r < DROP_PROB {
                continue;
            }
            t.push(mapping(c));
            if r > 1.0 - INSERT_PROB {
                t.push(*tgt.choose(&mut rng).unwrap());
            }
        }
        if t.is_empty() {
            t.push(mapping(s.chars().next().unwrap()));
        }
        out.push(SyntheticPair {
            src: s,
            tgt: t,
            is_transliteration: true,
        });
    }
    let letters: Vec<char> = TGT_ALPHABET.chars().collect();
    for _ in 0..n_random {
        out.push(SyntheticPair {
            src: word(&mut rng, &src),
            tgt: word(&mut rng, &letters),
            is_transliteration: false,
        });
    }
    out.shuffle(&mut rng);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_labelled() {
        let a = synthetic_pairs(3, 20, 10).unwrap();
        assert_eq!(a, synthetic_pairs(3, 20, 10).unwrap());
        assert_ne!(a, synthetic_pairs(4, 20, 10).unwrap());
        assert_eq!(a.iter().filter(|p| p.is_transliteration).count(), 20);
        assert!(a.iter().all(|p| !p.src.is_empty() && !p.tgt.is_empty()));
    }
}
