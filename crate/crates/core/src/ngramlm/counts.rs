use std::collections::{BTreeSet, HashMap};
use std::io::{self, Write};

use rayon::prelude::*;

use super::vocab::{Vocab, WordId, BOS_ID, EOS_ID};
use crate::error::{Error, Result};
use crate::textnorm::Sentence;

type Table = HashMap<Box<[WordId]>, u64>;

/// Raw n-gram counts for orders `1..=order` over a padded corpus.
///
/// Each sentence contributes `max(order - 1, 1)` leading `<s>` tokens and
/// one trailing `</s>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    order: usize,
    vocab: Vocab,
    tables: Vec<Table>,
}

/// Number of `<s>` tokens prepended to each sentence for a given order.
pub(crate) fn bos_padding(order: usize) -> usize {
    order.saturating_sub(1).max(1)
}

const CHUNK: usize = 256;

/// Counts all k-grams, k = 1..=order, in `corpus`.
///
/// Counting runs on the current rayon pool; the result does not depend on
/// the number of threads.
pub fn count_ngrams(corpus: &[Sentence], order: usize) -> Result<CountTable> {
    if order == 0 {
        return Err(Error::arg("n-gram order must be at least 1"));
    }
    if corpus.is_empty() {
        return Err(Error::arg("cannot count n-grams of an empty corpus"));
    }

    let distinct: BTreeSet<&str> = corpus.iter().flat_map(|s| s.iter()).collect();
    let mut vocab = Vocab::new();
    for w in distinct {
        vocab.insert(w);
    }

    let pad = bos_padding(order);
    let tables = corpus
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut local: Vec<Table> = vec![HashMap::new(); order];
            let mut ids: Vec<WordId> = Vec::new();
            for sent in chunk {
                ids.clear();
                ids.extend(std::iter::repeat_n(BOS_ID, pad));
                ids.extend(sent.iter().map(|w| vocab.get(w).expect("interned above")));
                ids.push(EOS_ID);
                for k in 1..=order {
                    for gram in ids.windows(k) {
                        *local[k - 1].entry(gram.into()).or_insert(0) += 1;
                    }
                }
            }
            local
        })
        .reduce(
            || vec![HashMap::new(); order],
            |mut acc, other| {
                for (a, b) in acc.iter_mut().zip(other) {
                    for (k, v) in b {
                        *a.entry(k).or_insert(0) += v;
                    }
                }
                acc
            },
        );

    Ok(CountTable {
        order,
        vocab,
        tables,
    })
}

impl CountTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Adds words that should receive probability mass even if they never
    /// occur, so several models can share one vocabulary.
    pub fn extend_vocab<I, S>(&mut self, words: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut extra: Vec<String> = words
            .into_iter()
            .map(|w| w.as_ref().to_owned())
            .filter(|w| self.vocab.get(w).is_none())
            .collect();
        extra.sort();
        extra.dedup();
        for w in extra {
            self.vocab.insert(&w);
        }
    }

    /// Count of one n-gram given as words; 0 when absent.
    pub fn count(&self, ngram: &[&str]) -> u64 {
        if ngram.is_empty() || ngram.len() > self.order {
            return 0;
        }
        let ids: Option<Vec<WordId>> = ngram.iter().map(|w| self.vocab.get(w)).collect();
        ids.and_then(|ids| self.tables[ngram.len() - 1].get(ids.as_slice()).copied())
            .unwrap_or(0)
    }

    pub(crate) fn table(&self, k: usize) -> &Table {
        &self.tables[k - 1]
    }

    /// Number of distinct k-grams.
    pub fn distinct(&self, k: usize) -> usize {
        self.tables[k - 1].len()
    }

    /// All k-grams with their counts, sorted by their words.
    pub fn sorted(&self, k: usize) -> Vec<(Vec<&str>, u64)> {
        let mut out: Vec<(Vec<&str>, u64)> = self.tables[k - 1]
            .iter()
            .map(|(g, &c)| (g.iter().map(|&id| self.vocab.word(id)).collect(), c))
            .collect();
        out.sort();
        out
    }

    /// Writes `k<TAB>w1 ... wk<TAB>count` lines in sorted order.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for k in 1..=self.order {
            for (gram, c) in self.sorted(k) {
                writeln!(out, "{k}\t{}\t{c}", gram.join(" "))?;
            }
        }
        Ok(())
    }
}
