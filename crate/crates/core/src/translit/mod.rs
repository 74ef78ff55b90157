//! Unsupervised transliteration mining and candidate generation.
//!
//! A word pair is explained either as a transliteration, by a sequence of
//! character units (s, t) where each side is one character or empty, or as
//! two unrelated words drawn from character unigram models. EM over the
//! mixture of the two estimates the unit probabilities and the prior λ of
//! the transliteration component.

mod generate;
mod mine;
mod model;
pub mod synth;

pub use generate::{transliterate, transliterate_beam, DEFAULT_BEAM};
pub use mine::{mine, read_pairs, write_mined, MinedPair, Mining, PairLabel, DEFAULT_ITERS, DEFAULT_THRESHOLD};
pub use model::{pair_likelihood_tr, TransliterationModel, Unit, EMPTY_SIDE};
