//! Direct, by-definition interpolated modified Kneser-Ney.
//!
//! Every quantity is recomputed by scanning the padded token sequences, so
//! the oracle shares no data structures with the estimator.

use std::collections::{BTreeMap, BTreeSet};

use adaptkit::Sentence;

pub struct KnOracle {
    order: usize,
    seqs: Vec<Vec<String>>,
    vocab: BTreeSet<String>,
}

impl KnOracle {
    pub fn new(corpus: &[Sentence], order: usize) -> Self {
        let pad = if order > 1 { order - 1 } else { 1 };
        let seqs: Vec<Vec<String>> = corpus
            .iter()
            .map(|s| {
                let mut v = vec!["<s>".to_string(); pad];
                v.extend(s.iter().map(str::to_string));
                v.push("</s>".to_string());
                v
            })
            .collect();
        let mut vocab: BTreeSet<String> = seqs.iter().flatten().filter(|w| *w != "<s>").cloned().collect();
        vocab.insert("<unk>".to_string());
        KnOracle { order, seqs, vocab }
    }

    pub fn vocab(&self) -> Vec<String> {
        self.vocab.iter().cloned().collect()
    }

    fn windows(&self, k: usize) -> impl Iterator<Item = &[String]> {
        self.seqs.iter().flat_map(move |s| s.windows(k))
    }

    fn raw(&self, gram: &[String]) -> u64 {
        self.windows(gram.len()).filter(|w| *w == gram).count() as u64
    }

    fn continuation(&self, gram: &[String]) -> u64 {
        let lefts: BTreeSet<&String> = self
            .windows(gram.len() + 1)
            .filter(|w| &w[1..] == gram)
            .map(|w| &w[0])
            .collect();
        lefts.len() as u64
    }

    fn count(&self, gram: &[String]) -> u64 {
        if gram.len() == self.order {
            self.raw(gram)
        } else {
            self.continuation(gram)
        }
    }

    /// Distinct k-grams not ending in `<s>`, with the count used at order k.
    fn level(&self, k: usize) -> BTreeMap<Vec<String>, u64> {
        let grams: BTreeSet<Vec<String>> = self
            .windows(k)
            .filter(|w| w[k - 1] != "<s>")
            .map(|w| w.to_vec())
            .collect();
        grams
            .into_iter()
            .map(|g| {
                let c = self.count(&g);
                (g, c)
            })
            .filter(|(_, c)| *c > 0)
            .collect()
    }

    /// (D1, D2, D3+) and whether the fallback was used.
    pub fn discounts(&self, k: usize) -> ([f64; 3], bool) {
        let mut n = [0f64; 4];
        for c in self.level(k).values() {
            if (1..=4).contains(c) {
                n[*c as usize - 1] += 1.0;
            }
        }
        if n.contains(&0.0) {
            return ([0.75; 3], true);
        }
        let y = n[0] / (n[0] + 2.0 * n[1]);
        let d = [
            1.0 - 2.0 * y * n[1] / n[0],
            2.0 - 3.0 * y * n[2] / n[1],
            3.0 - 4.0 * y * n[3] / n[2],
        ];
        if d[0] <= 0.0 || d[1] <= 0.0 || d[2] <= 0.0 {
            return ([0.75; 3], true);
        }
        (d, false)
    }

    fn discount(d: &[f64; 3], c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => d[0],
            2 => d[1],
            _ => d[2],
        }
    }

    /// (total, gamma) for a context at order `len(h)+1`; total 0 if unseen.
    pub fn context(&self, h: &[String]) -> (u64, f64) {
        let k = h.len() + 1;
        let (d, _) = self.discounts(k);
        let level = self.level(k);
        let mut total = 0;
        let mut mass = 0.0;
        for (g, c) in &level {
            if &g[..k - 1] == h {
                total += c;
                mass += Self::discount(&d, *c);
            }
        }
        if total == 0 {
            (0, 0.0)
        } else {
            (total, mass / total as f64)
        }
    }

    /// p(w | h), with `h` already truncated to at most order-1 words.
    pub fn prob(&self, h: &[String], w: &str) -> f64 {
        let w = if self.vocab.contains(w) { w.to_string() } else { "<unk>".to_string() };
        let k = h.len() + 1;
        let (d, _) = self.discounts(k);
        let mut gram = h.to_vec();
        gram.push(w.clone());
        let c = if gram.iter().all(|t| self.vocab.contains(t) || t == "<s>") {
            self.count(&gram)
        } else {
            0
        };
        if k == 1 {
            let (total, gamma) = self.context(&[]);
            return (c as f64 - Self::discount(&d, c)) / total as f64 + gamma / self.vocab.len() as f64;
        }
        let (total, gamma) = self.context(h);
        let lower = self.prob(&h[1..], &w);
        if total == 0 {
            return lower;
        }
        (c as f64 - Self::discount(&d, c)) / total as f64 + gamma * lower
    }
}
