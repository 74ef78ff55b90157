use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ngramlm::NGramModel;

/// Anything that assigns a conditional probability to a word.
pub trait LanguageModel: Sync {
    fn order(&self) -> usize;

    /// p(word | context), as a probability (not a log).
    fn prob(&self, context: &[&str], word: &str) -> f64;

    fn logprob(&self, context: &[&str], word: &str) -> f64 {
        self.prob(context, word).log10()
    }
}

impl LanguageModel for NGramModel {
    fn order(&self) -> usize {
        NGramModel::order(self)
    }

    fn prob(&self, context: &[&str], word: &str) -> f64 {
        10f64.powf(NGramModel::logprob(self, context, word))
    }

    fn logprob(&self, context: &[&str], word: &str) -> f64 {
        NGramModel::logprob(self, context, word)
    }
}

/// Trees deeper than this (root → group → leaf) are rejected.
pub const MAX_DEPTH: usize = 2;

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A mixture tree. Leaves are named by where their model came from;
/// internal nodes by their group.
#[derive(Debug, Clone)]
pub enum MixtureLm {
    Leaf {
        name: String,
        model: Arc<NGramModel>,
    },
    Node {
        name: String,
        children: Vec<MixtureLm>,
        weights: Vec<f64>,
    },
}

impl MixtureLm {
    pub fn leaf(name: impl Into<String>, model: Arc<NGramModel>) -> Self {
        MixtureLm::Leaf {
            name: name.into(),
            model,
        }
    }

    /// Builds an internal node, checking the simplex and depth invariants.
    pub fn node(name: impl Into<String>, children: Vec<MixtureLm>, weights: Vec<f64>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::arg("mixture node without children"));
        }
        if children.len() != weights.len() {
            return Err(Error::arg(format!(
                "{} children but {} weights",
                children.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::arg("mixture weights must be finite and non-negative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::arg(format!("mixture weights sum to {sum}, not 1")));
        }
        let node = MixtureLm::Node {
            name: name.into(),
            children,
            weights,
        };
        if node.depth() > MAX_DEPTH {
            return Err(Error::arg(format!("mixture deeper than {MAX_DEPTH} levels")));
        }
        Ok(node)
    }

    pub fn name(&self) -> &str {
        match self {
            MixtureLm::Leaf { name, .. } | MixtureLm::Node { name, .. } => name,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            MixtureLm::Leaf { .. } => 0,
            MixtureLm::Node { children, .. } => 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            MixtureLm::Leaf { .. } => None,
            MixtureLm::Node { weights, .. } => Some(weights),
        }
    }

    pub fn children(&self) -> &[MixtureLm] {
        match self {
            MixtureLm::Leaf { .. } => &[],
            MixtureLm::Node { children, .. } => children,
        }
    }

    /// Leaves in left-to-right order with the product of the weights on
    /// their path.
    pub fn leaves(&self) -> Vec<(&str, &Arc<NGramModel>, f64)> {
        let mut out = Vec::new();
        self.collect_leaves(1.0, &mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, w: f64, out: &mut Vec<(&'a str, &'a Arc<NGramModel>, f64)>) {
        match self {
            MixtureLm::Leaf { name, model } => out.push((name, model, w)),
            MixtureLm::Node { children, weights, .. } => {
                for (c, cw) in children.iter().zip(weights) {
                    c.collect_leaves(w * cw, out);
                }
            }
        }
    }
}

impl LanguageModel for MixtureLm {
    fn order(&self) -> usize {
        match self {
            MixtureLm::Leaf { model, .. } => model.order(),
            MixtureLm::Node { children, .. } => children.iter().map(|c| c.order()).max().unwrap_or(1),
        }
    }

    fn prob(&self, context: &[&str], word: &str) -> f64 {
        match self {
            MixtureLm::Leaf { model, .. } => LanguageModel::prob(model.as_ref(), context, word),
            MixtureLm::Node { children, weights, .. } => children
                .iter()
                .zip(weights)
                .map(|(c, w)| w * c.prob(context, word))
                .sum(),
        }
    }
}

/// Collapses a tree into one node over its leaves. Each leaf's weight is
/// the product of the weights on its path.
pub fn flatten(m: &MixtureLm) -> MixtureLm {
    match m {
        MixtureLm::Leaf { .. } => MixtureLm::Node {
            name: m.name().to_owned(),
            children: vec![m.clone()],
            weights: vec![1.0],
        },
        MixtureLm::Node { name, children, .. } => {
            if children.iter().all(|c| matches!(c, MixtureLm::Leaf { .. })) {
                return m.clone();
            }
            let (leaves, weights): (Vec<_>, Vec<_>) = m
                .leaves()
                .into_iter()
                .map(|(n, model, w)| (MixtureLm::leaf(n, model.clone()), w))
                .unzip();
            MixtureLm::Node {
                name: name.clone(),
                children: leaves,
                weights,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngramlm::{count_ngrams, estimate_kn};
    use crate::textnorm::Sentence;

    fn model(lines: &[&str]) -> Arc<NGramModel> {
        let c: Vec<Sentence> = lines.iter().map(|l| Sentence::from_line(l)).collect();
        Arc::new(estimate_kn(&count_ngrams(&c, 2).unwrap()).unwrap().0)
    }

    #[test]
    fn corner_weights_select_a_component() {
        let a = model(&["a b c", "a c"]);
        let b = model(&["c b a", "b b"]);
        let m = MixtureLm::node("m", vec![MixtureLm::leaf("a", a.clone()), MixtureLm::leaf("b", b)], vec![1.0, 0.0])
            .unwrap();
        for (ctx, w) in [(vec!["a"], "b"), (vec!["<s>"], "c"), (vec!["zz"], "a")] {
            assert_eq!(m.logprob(&ctx, w), a.logprob(&ctx, w));
        }
    }

    #[test]
    fn identical_components() {
        let a = model(&["a b c", "a c"]);
        let m = MixtureLm::node(
            "m",
            vec![MixtureLm::leaf("x", a.clone()), MixtureLm::leaf("y", a.clone())],
            vec![0.3, 0.7],
        )
        .unwrap();
        assert!((m.logprob(&["a"], "c") - a.logprob(&["a"], "c")).abs() < 1e-12);
    }

    #[test]
    fn node_validation() {
        let a = model(&["a"]);
        let leaf = || MixtureLm::leaf("a", a.clone());
        assert!(MixtureLm::node("m", vec![leaf()], vec![0.5]).is_err());
        assert!(MixtureLm::node("m", vec![leaf(), leaf()], vec![1.5, -0.5]).is_err());
        assert!(MixtureLm::node("m", vec![leaf()], vec![1.0, 0.0]).is_err());
        assert!(MixtureLm::node("m", vec![], vec![]).is_err());
        let inner = MixtureLm::node("g", vec![leaf()], vec![1.0]).unwrap();
        let two = MixtureLm::node("r", vec![inner], vec![1.0]).unwrap();
        assert!(MixtureLm::node("too-deep", vec![two], vec![1.0]).is_err());
    }

    #[test]
    fn flatten_products() {
        let a = model(&["a b"]);
        let b = model(&["b a"]);
        let c = model(&["a a"]);
        let g1 = MixtureLm::node(
            "g1",
            vec![MixtureLm::leaf("a", a), MixtureLm::leaf("b", b)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let g2 = MixtureLm::node("g2", vec![MixtureLm::leaf("c", c)], vec![1.0]).unwrap();
        let root = MixtureLm::node("root", vec![g1, g2], vec![0.6, 0.4]).unwrap();
        let flat = flatten(&root);
        assert_eq!(flat.depth(), 1);
        assert_eq!(flat.weights().unwrap(), &[0.3, 0.3, 0.4]);
        // already flat: unchanged
        let again = flatten(&flat);
        assert_eq!(again.weights(), flat.weights());
    }
}
