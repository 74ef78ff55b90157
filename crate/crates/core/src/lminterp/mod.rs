//! Linear interpolation of n-gram models.
//!
//! A [`MixtureLm`] is a tree of at most two levels: a root mixing resource
//! groups, each group mixing leaf models. Weights are fit by EM to
//! maximize held-out likelihood ([`fit_weights_em`], [`fit_hierarchical`])
//! and a fitted tree can be baked into a single backoff model
//! ([`bake_arpa`]).

mod bake;
mod em;
mod mixture;
pub mod weights;

pub use bake::bake_arpa;
pub use em::{fit_hierarchical, fit_weights_em, EmFit, EmOptions, EmTrace, HierarchicalFit, ModelGroup};
pub use mixture::{flatten, LanguageModel, MixtureLm, MAX_DEPTH};
