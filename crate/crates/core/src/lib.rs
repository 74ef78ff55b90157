//! Trainable, decoder-independent machinery for adapting statistical
//! machine translation systems to informal dialectal text.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`textnorm`] cleans informal text (elongations, emoticons, speech
//!   markup, character rewrite rules).
//! * [`ngramlm`] counts n-grams, estimates interpolated modified
//!   Kneser-Ney models and reads/writes ARPA files.
//! * [`lminterp`] fits linear interpolation weights with EM, builds
//!   two-level (group/root) mixtures and bakes them into a single model.
//! * [`wordclasses`] induces hard word classes with the exchange algorithm.
//! * [`phrasetable`] parses and combines Moses phrase and reordering tables.
//! * [`translit`] mines transliteration pairs and generates candidates.
//! * [`tuneselect`] estimates sentence-length densities and filters
//!   tuning bitexts.

pub mod error;
pub mod lminterp;
pub mod ngramlm;
pub mod phrasetable;
pub mod textnorm;
pub mod translit;
pub mod tuneselect;
pub mod wordclasses;

pub use error::{Error, Result};
pub use lminterp::{EmTrace, MixtureLm};
pub use ngramlm::{CountTable, NGramModel, OovPolicy, Perplexity};
pub use phrasetable::{PhraseTable, PhraseTableRow, ReorderingTable};
pub use textnorm::Sentence;
pub use translit::{MinedPair, TransliterationModel};
pub use tuneselect::{LengthDensity, LengthFilterSpec};
pub use wordclasses::{ClusterObjective, WordClustering};
