//! Backoff n-gram language models.
//!
//! [`count_ngrams`] builds a [`CountTable`] from a tokenized corpus,
//! [`estimate_kn`] turns it into an interpolated modified Kneser-Ney
//! [`NGramModel`], and [`arpa`] reads and writes the ARPA text format.
//! All probabilities are log10.

pub mod arpa;
mod counts;
mod kn;
mod model;
mod vocab;

pub use counts::{count_ngrams, CountTable};
pub use kn::{
    estimate_kn, estimate_kn_with, modified_discounts, Discounting, Discounts, KnWarning,
    FALLBACK_DISCOUNT,
};
pub use model::{Entry, NGramModel, OovPolicy, Perplexity};
pub use vocab::{Vocab, WordId, BOS, BOS_ID, EOS, EOS_ID, UNK, UNK_ID};

/// log10 probability used for events the model gives no mass, such as
/// predicting `<s>`.
pub const LOG10_ZERO: f64 = -99.0;
