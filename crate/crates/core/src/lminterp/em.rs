use std::sync::Arc;

use rayon::prelude::*;

use super::mixture::{LanguageModel, MixtureLm};
use crate::error::{Error, Result};
use crate::ngramlm::{NGramModel, BOS, EOS};
use crate::textnorm::Sentence;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Stop once the held-out log10 likelihood gains less than this per
    /// token in one iteration.
    pub tol: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

/// Held-out log10 likelihood after initialization (index 0) and after each
/// iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace {
    pub loglik: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl EmTrace {
    /// Whether the likelihood never dropped by more than `tol` (relative to
    /// its magnitude).
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.loglik
            .windows(2)
            .all(|w| w[1] >= w[0] - tol * w[0].abs().max(1.0))
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub weights: Vec<f64>,
    pub trace: EmTrace,
    /// Held-out perplexity of the mixture at the returned weights.
    pub perplexity: f64,
    pub tokens: usize,
}

/// Per-token probabilities of every component on a held-out corpus:
/// `rows[t][i]` is component i's probability of token t. Every word and
/// each `</s>` is a token; unknown words are scored as `<unk>`.
pub(crate) fn token_probs(components: &[&dyn LanguageModel], heldout: &[Sentence]) -> Vec<Vec<f64>> {
    let pad = components
        .iter()
        .map(|c| c.order())
        .max()
        .unwrap_or(1)
        .saturating_sub(1)
        .max(1);
    heldout
        .par_iter()
        .map(|sent| {
            let mut hist: Vec<&str> = vec![BOS; pad];
            let mut rows = Vec::with_capacity(sent.len() + 1);
            for w in sent.iter().chain(std::iter::once(EOS)) {
                rows.push(components.iter().map(|c| c.prob(&hist, w)).collect::<Vec<f64>>());
                hist.push(w);
            }
            rows
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn loglik(rows: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for row in rows {
        let p: f64 = row.iter().zip(weights).map(|(p, w)| p * w).sum();
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Numerical(
                "a held-out token has zero probability under the mixture".into(),
            ));
        }
        total += p.log10();
    }
    Ok(total)
}

/// Mixture-weight EM over precomputed token probabilities.
pub(crate) fn em_on_rows(rows: &[Vec<f64>], n: usize, opts: &EmOptions) -> Result<EmFit> {
    if rows.is_empty() {
        return Err(Error::arg("held-out set has no scorable tokens"));
    }
    let t = rows.len() as f64;
    let mut weights = vec![1.0 / n as f64; n];
    let mut trace = EmTrace {
        loglik: vec![loglik(rows, &weights)?],
        iterations: 0,
        converged: false,
    };

    let mut post = vec![0.0; n];
    for _ in 0..opts.max_iter {
        post.iter_mut().for_each(|p| *p = 0.0);
        for row in rows {
            let mix: f64 = row.iter().zip(&weights).map(|(p, w)| p * w).sum();
            for i in 0..n {
                post[i] += weights[i] * row[i] / mix;
            }
        }
        for i in 0..n {
            weights[i] = post[i] / t;
        }
        // absorb rounding so the weights stay on the simplex
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);

        let prev = *trace.loglik.last().unwrap();
        let ll = loglik(rows, &weights)?;
        trace.loglik.push(ll);
        trace.iterations += 1;
        debug_assert!(
            ll >= prev - 1e-12 * prev.abs().max(1.0),
            "EM likelihood decreased: {prev} -> {ll}"
        );
        if (ll - prev) / t < opts.tol {
            trace.converged = true;
            break;
        }
    }

    let ll = *trace.loglik.last().unwrap();
    Ok(EmFit {
        weights,
        perplexity: 10f64.powf(-ll / t),
        trace,
        tokens: rows.len(),
    })
}

/// Fits interpolation weights for `components` on `heldout` by EM,
/// starting from uniform weights.
pub fn fit_weights_em(components: &[&dyn LanguageModel], heldout: &[Sentence], opts: &EmOptions) -> Result<EmFit> {
    if components.is_empty() {
        return Err(Error::arg("no components to interpolate"));
    }
    if heldout.is_empty() {
        return Err(Error::arg("empty held-out set"));
    }
    let rows = token_probs(components, heldout);
    em_on_rows(&rows, components.len(), opts)
}

/// Result of a two-stage fit.
#[derive(Debug, Clone)]
pub struct HierarchicalFit {
    pub mixture: MixtureLm,
    pub group_fits: Vec<EmFit>,
    pub root_fit: EmFit,
}

/// A named group of named leaf models.
pub type ModelGroup = (String, Vec<(String, Arc<NGramModel>)>);

/// Fits weights within each group, then across the frozen group mixtures,
/// both on the same held-out set.
pub fn fit_hierarchical(groups: &[ModelGroup], heldout: &[Sentence], opts: &EmOptions) -> Result<HierarchicalFit> {
    if groups.is_empty() {
        return Err(Error::arg("no groups to interpolate"));
    }
    let mut nodes = Vec::with_capacity(groups.len());
    let mut group_fits = Vec::with_capacity(groups.len());
    for (name, members) in groups {
        if members.is_empty() {
            return Err(Error::arg(format!("group {name:?} is empty")));
        }
        let comps: Vec<&dyn LanguageModel> = members.iter().map(|(_, m)| m.as_ref() as &dyn LanguageModel).collect();
        let fit = fit_weights_em(&comps, heldout, opts)?;
        let leaves = members
            .iter()
            .map(|(n, m)| MixtureLm::leaf(n.clone(), m.clone()))
            .collect();
        nodes.push(MixtureLm::node(name.clone(), leaves, fit.weights.clone())?);
        group_fits.push(fit);
    }
    let comps: Vec<&dyn LanguageModel> = nodes.iter().map(|n| n as &dyn LanguageModel).collect();
    let root_fit = fit_weights_em(&comps, heldout, opts)?;
    let mixture = MixtureLm::node("root", nodes, root_fit.weights.clone())?;
    Ok(HierarchicalFit {
        mixture,
        group_fits,
        root_fit,
    })
}
