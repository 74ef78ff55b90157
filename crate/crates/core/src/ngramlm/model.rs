use std::collections::HashMap;

use super::counts::bos_padding;
use super::vocab::{Vocab, WordId, BOS_ID, EOS_ID, UNK_ID};
use super::LOG10_ZERO;
use crate::error::{Error, Result};
use crate::textnorm::Sentence;

/// One stored n-gram: its log10 probability and, for n-grams that act as
/// contexts, a log10 backoff weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub logprob: f64,
    pub backoff: Option<f64>,
}

pub(crate) type Table = HashMap<Box<[WordId]>, Entry>;

/// A backoff n-gram model (ARPA semantics).
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    vocab: Vocab,
    tables: Vec<Table>,
}

/// How [`NGramModel::perplexity`] treats words outside the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Leave them unscored (they still count in `oov_count`).
    #[default]
    Skip,
    /// Score them as `<unk>`.
    ScoreAsUnk,
}

/// Perplexity of a corpus together with the totals it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perplexity {
    pub value: f64,
    /// Sum of log10 probabilities of the scored tokens.
    pub logprob: f64,
    pub tokens_scored: usize,
    pub oov_count: usize,
    pub sentences: usize,
}

impl NGramModel {
    pub(crate) fn from_parts(order: usize, vocab: Vocab, tables: Vec<Table>) -> Self {
        debug_assert_eq!(tables.len(), order);
        NGramModel {
            order,
            vocab,
            tables,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    /// Number of stored k-grams.
    pub fn ngram_count(&self, k: usize) -> usize {
        self.tables.get(k.wrapping_sub(1)).map_or(0, |t| t.len())
    }

    /// Whether `word` has a unigram entry.
    pub fn contains_word(&self, word: &str) -> bool {
        self.vocab
            .get(word)
            .is_some_and(|id| self.tables[0].contains_key([id].as_slice()))
    }

    /// Maps a word to its id, sending unknown words to `<unk>`.
    pub fn word_id(&self, word: &str) -> WordId {
        match self.vocab.get(word) {
            Some(id) if self.tables[0].contains_key([id].as_slice()) => id,
            _ => UNK_ID,
        }
    }

    /// Words the model predicts: every unigram except `<s>`, sorted.
    pub fn predictive_vocab(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.tables[0]
            .keys()
            .filter(|k| k[0] != BOS_ID)
            .map(|k| self.vocab.word(k[0]))
            .collect();
        words.sort_unstable();
        words
    }

    /// Looks up a stored n-gram by its words.
    pub fn entry(&self, ngram: &[&str]) -> Option<Entry> {
        if ngram.is_empty() || ngram.len() > self.order {
            return None;
        }
        let ids: Option<Vec<WordId>> = ngram.iter().map(|w| self.vocab.get(w)).collect();
        self.tables[ngram.len() - 1].get(ids?.as_slice()).copied()
    }

    /// Backoff recursion over id sequences. Only the last `order - 1`
    /// context ids are used.
    pub fn logprob_ids(&self, context: &[WordId], word: WordId) -> f64 {
        let n = context.len().min(self.order - 1);
        let mut ctx = &context[context.len() - n..];
        let mut key: Vec<WordId> = Vec::with_capacity(n + 1);
        let mut backoff = 0.0;
        loop {
            key.clear();
            key.extend_from_slice(ctx);
            key.push(word);
            if let Some(e) = self.tables[ctx.len()].get(key.as_slice()) {
                return backoff + e.logprob;
            }
            if ctx.is_empty() {
                return backoff + LOG10_ZERO;
            }
            if let Some(e) = self.tables[ctx.len() - 1].get(ctx) {
                backoff += e.backoff.unwrap_or(0.0);
            }
            ctx = &ctx[1..];
        }
    }

    /// log10 p(word | context). Unknown words, in either position, map to
    /// `<unk>`.
    pub fn logprob<S: AsRef<str>>(&self, context: &[S], word: &str) -> f64 {
        let ctx: Vec<WordId> = context.iter().map(|w| self.word_id(w.as_ref())).collect();
        self.logprob_ids(&ctx, self.word_id(word))
    }

    /// Σ_w p(w | context) over the predictive vocabulary. Equals 1 for a
    /// properly normalized model.
    pub fn context_mass<S: AsRef<str>>(&self, context: &[S]) -> f64 {
        let ctx: Vec<WordId> = context.iter().map(|w| self.word_id(w.as_ref())).collect();
        let mut words: Vec<WordId> = self.tables[0]
            .keys()
            .map(|k| k[0])
            .filter(|&w| w != BOS_ID)
            .collect();
        words.sort_unstable();
        words
            .into_iter()
            .map(|w| 10f64.powf(self.logprob_ids(&ctx, w)))
            .sum()
    }

    /// Contexts stored in the model (n-grams carrying a backoff weight),
    /// sorted, plus the empty context.
    pub fn contexts(&self) -> Vec<Vec<&str>> {
        let mut out: Vec<Vec<&str>> = vec![Vec::new()];
        for t in &self.tables[..self.order - 1] {
            let mut level: Vec<Vec<&str>> = t
                .iter()
                .filter(|(_, e)| e.backoff.is_some())
                .map(|(k, _)| k.iter().map(|&id| self.vocab.word(id)).collect())
                .collect();
            level.sort();
            out.extend(level);
        }
        out
    }

    /// All stored k-grams with their entries, sorted by words.
    pub fn sorted_entries(&self, k: usize) -> Vec<(Vec<&str>, Entry)> {
        let mut out: Vec<(Vec<&str>, Entry)> = self.tables[k - 1]
            .iter()
            .map(|(g, e)| (g.iter().map(|&id| self.vocab.word(id)).collect(), *e))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Scores a corpus token by token, including `</s>`.
    ///
    /// Each sentence is conditioned on the same `<s>` padding used when
    /// counting.
    pub fn perplexity(&self, corpus: &[Sentence], policy: OovPolicy) -> Result<Perplexity> {
        if corpus.is_empty() {
            return Err(Error::arg("perplexity of an empty corpus"));
        }
        let mut logprob = 0.0;
        let mut scored = 0usize;
        let mut oov = 0usize;
        let pad = bos_padding(self.order);
        let mut ctx: Vec<WordId> = Vec::new();
        for sent in corpus {
            ctx.clear();
            ctx.extend(std::iter::repeat_n(BOS_ID, pad));
            for w in sent.iter() {
                let known = self.contains_word(w);
                let id = self.word_id(w);
                if !known {
                    oov += 1;
                }
                if known || policy == OovPolicy::ScoreAsUnk {
                    logprob += self.logprob_ids(&ctx, id);
                    scored += 1;
                }
                ctx.push(id);
            }
            logprob += self.logprob_ids(&ctx, EOS_ID);
            scored += 1;
        }
        if scored == 0 {
            return Err(Error::arg("no tokens were scored"));
        }
        Ok(Perplexity {
            value: 10f64.powf(-logprob / scored as f64),
            logprob,
            tokens_scored: scored,
            oov_count: oov,
            sentences: corpus.len(),
        })
    }

    /// Largest absolute difference between the stored log10 values of two
    /// models, or `None` when their n-gram sets or backoff layouts differ.
    pub fn max_abs_diff(&self, other: &NGramModel) -> Option<f64> {
        if self.order != other.order {
            return None;
        }
        let mut worst = 0.0f64;
        for k in 1..=self.order {
            if self.ngram_count(k) != other.ngram_count(k) {
                return None;
            }
            for (gram, e) in self.sorted_entries(k) {
                let o = other.entry(&gram)?;
                worst = worst.max((e.logprob - o.logprob).abs());
                match (e.backoff, o.backoff) {
                    (None, None) => {}
                    (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                    (Some(a), None) | (None, Some(a)) if a == 0.0 => {}
                    _ => return None,
                }
            }
        }
        Some(worst)
    }
}
