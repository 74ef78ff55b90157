use std::collections::{BTreeMap, HashMap};

use super::mixture::MixtureLm;
use crate::error::{Error, Result};
use crate::ngramlm::{Entry, NGramModel, WordId, BOS_ID, LOG10_ZERO};

/// Below this the lower-order mass left for unseen words is treated as
/// zero and the backoff weight as 1.
const MIN_LEFTOVER: f64 = 1e-12;

/// A leaf together with the translation from baked ids to its own ids.
struct LeafView<'a> {
    model: &'a NGramModel,
    ids: Vec<WordId>,
}

/// Evaluates the tree over id sequences with the same arithmetic as
/// [`LanguageModel::prob`](super::LanguageModel::prob).
fn mix_prob(node: &MixtureLm, leaves: &[LeafView], next: &mut usize, ctx: &[WordId], w: WordId, buf: &mut Vec<WordId>) -> f64 {
    match node {
        MixtureLm::Leaf { .. } => {
            let leaf = &leaves[*next];
            *next += 1;
            buf.clear();
            buf.extend(ctx.iter().map(|&id| leaf.ids[id as usize]));
            10f64.powf(leaf.model.logprob_ids(buf, leaf.ids[w as usize]))
        }
        MixtureLm::Node { children, weights, .. } => children
            .iter()
            .zip(weights)
            .map(|(c, wt)| wt * mix_prob(c, leaves, next, ctx, w, buf))
            .sum(),
    }
}

/// Bakes a mixture into one backoff model of the given order.
///
/// The stored n-grams are the union of the leaves' n-grams. Each carries
/// the mixture's probability, and every context gets the backoff weight
/// that makes it sum to one over the vocabulary. Queries on stored
/// n-grams therefore match the mixture exactly; anything that backs off
/// is approximated.
///
/// All leaves must share one vocabulary. With differing vocabularies each
/// leaf would give its own `<unk>` mass to the other leaves' words and
/// the union could not be normalized.
pub fn bake_arpa(m: &MixtureLm, order: usize) -> Result<NGramModel> {
    let leaf_list = m.leaves();
    if order == 0 {
        return Err(Error::arg("bake order must be at least 1"));
    }
    if let Some((name, model, _)) = leaf_list.iter().find(|(_, model, _)| model.order() > order) {
        return Err(Error::arg(format!(
            "leaf {name:?} has order {} above the bake order {order}",
            model.order()
        )));
    }
    let first = leaf_list[0].1.as_ref();
    let words = first.predictive_vocab();
    for (name, model, _) in &leaf_list[1..] {
        if model.predictive_vocab() != words {
            return Err(Error::arg(format!(
                "leaf {name:?} has a different vocabulary; bake needs leaves trained on a shared vocabulary"
            )));
        }
    }

    let vocab = first.vocab().clone();
    let views: Vec<LeafView> = leaf_list
        .iter()
        .map(|(_, model, _)| LeafView {
            model,
            ids: vocab
                .words()
                .map(|w| model.vocab().get(w).unwrap_or_else(|| model.word_id(w)))
                .collect(),
        })
        .collect();

    // union n-gram sets, in baked ids, grouped by context
    let mut union: Vec<BTreeMap<Box<[WordId]>, Vec<WordId>>> = vec![BTreeMap::new(); order];
    for (_, model, _) in &leaf_list {
        for k in 1..=model.order() {
            for (gram, _) in model.sorted_entries(k) {
                let ids: Option<Vec<WordId>> = gram.iter().map(|w| vocab.get(w)).collect();
                let ids = ids.ok_or_else(|| Error::arg(format!("n-gram {gram:?} uses a word outside the shared vocabulary")))?;
                let (h, w) = ids.split_at(k - 1);
                union[k - 1].entry(h.into()).or_default().push(w[0]);
            }
        }
    }
    for ext in union.iter_mut().flat_map(|lvl| lvl.values_mut()) {
        ext.sort_unstable();
        ext.dedup();
    }

    let mut tables: Vec<HashMap<Box<[WordId]>, Entry>> = vec![HashMap::new(); order];
    let mut buf = Vec::new();
    let mut key = Vec::new();
    for k in 1..=order {
        for (h, ext) in &union[k - 1] {
            for &w in ext {
                let mut next = 0;
                let p = mix_prob(m, &views, &mut next, h, w, &mut buf);
                let logprob = if p > 0.0 { p.log10().max(LOG10_ZERO) } else { LOG10_ZERO };
                key.clear();
                key.extend_from_slice(h);
                key.push(w);
                tables[k - 1].insert(
                    key.as_slice().into(),
                    Entry {
                        logprob,
                        backoff: None,
                    },
                );
            }
        }

        // Backoff weights for contexts of length k-1 (k ≥ 2), now that
        // every lower order is final.
        if k == 1 {
            continue;
        }
        let lower = NGramModel::from_parts(k - 1, vocab.clone(), tables[..k - 1].to_vec());
        let mut bows = Vec::new();
        for (h, ext) in &union[k - 1] {
            let mut seen = 0.0;
            let mut seen_lower = 0.0;
            for &w in ext.iter().filter(|&&w| w != BOS_ID) {
                key.clear();
                key.extend_from_slice(h);
                key.push(w);
                seen += 10f64.powf(tables[k - 1][key.as_slice()].logprob);
                seen_lower += 10f64.powf(lower.logprob_ids(&h[1..], w));
            }
            let num = 1.0 - seen;
            let den = 1.0 - seen_lower;
            let bow = if den <= MIN_LEFTOVER {
                0.0
            } else if num <= 0.0 {
                LOG10_ZERO
            } else {
                (num / den).log10()
            };
            bows.push((h.clone(), bow));
        }
        for (h, bow) in bows {
            tables[k - 2]
                .get_mut(&h)
                .expect("union sets are prefix-closed")
                .backoff = Some(bow);
        }
    }

    Ok(NGramModel::from_parts(order, vocab, tables))
}
