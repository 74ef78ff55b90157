//! Interpolated modified Kneser-Ney estimation.
//!
//! The highest order uses raw counts; every lower order uses continuation
//! counts N1+(• w), the number of distinct left extensions observed one
//! order up. Each order gets three discounts (for counts 1, 2 and 3+)
//! computed from its own count-of-counts. `<s>` is never predicted: it
//! is stored with [`LOG10_ZERO`] wherever it is needed as a context.

use std::collections::HashMap;

use log::warn;

use super::counts::CountTable;
use super::model::{Entry, NGramModel, Table};
use super::vocab::{WordId, BOS_ID};
use super::LOG10_ZERO;
use crate::error::{Error, Result};

/// Discount used for every count class when count-of-counts cannot
/// support the modified estimate.
pub const FALLBACK_DISCOUNT: f64 = 0.75;

/// Discounts for counts of 1, 2 and 3 or more.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discounts {
    pub one: f64,
    pub two: f64,
    pub three_plus: f64,
}

impl Discounts {
    pub fn uniform(d: f64) -> Self {
        Discounts {
            one: d,
            two: d,
            three_plus: d,
        }
    }

    pub fn for_count(&self, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.one,
            2 => self.two,
            _ => self.three_plus,
        }
    }
}

/// How per-order discounts are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Discounting {
    /// Three count-of-count discounts per order, falling back to
    /// [`FALLBACK_DISCOUNT`] when they cannot be estimated.
    #[default]
    Modified,
    /// One absolute discount for every order and count class.
    Fixed(f64),
}

/// Emitted when an order falls back to [`FALLBACK_DISCOUNT`].
#[derive(Debug, Clone, PartialEq)]
pub struct KnWarning {
    pub order: usize,
    pub message: String,
}

/// Modified discounts from count-of-counts `n[0..4]` = n1..n4.
///
/// Returns `None` when any n_i is zero or a discount would leave its
/// count class with non-positive discount.
pub fn modified_discounts(n: [u64; 4]) -> Option<Discounts> {
    if n.contains(&0) {
        return None;
    }
    let [n1, n2, n3, n4] = n.map(|x| x as f64);
    let y = n1 / (n1 + 2.0 * n2);
    let d = Discounts {
        one: 1.0 - 2.0 * y * n2 / n1,
        two: 2.0 - 3.0 * y * n3 / n2,
        three_plus: 3.0 - 4.0 * y * n4 / n3,
    };
    let ok = d.one > 0.0 && d.one <= 1.0 && d.two > 0.0 && d.two <= 2.0 && d.three_plus > 0.0;
    ok.then_some(d)
}

#[derive(Default, Clone, Copy)]
struct ContextStats {
    total: u64,
    n1: u64,
    n2: u64,
    n3p: u64,
}

impl ContextStats {
    fn add(&mut self, c: u64) {
        self.total += c;
        match c {
            1 => self.n1 += 1,
            2 => self.n2 += 1,
            _ => self.n3p += 1,
        }
    }

    fn gamma(&self, d: &Discounts) -> f64 {
        (d.one * self.n1 as f64 + d.two * self.n2 as f64 + d.three_plus * self.n3p as f64)
            / self.total as f64
    }
}

/// Estimates an interpolated modified Kneser-Ney model from raw counts.
///
/// The model is open-vocabulary: `<unk>` and any zero-count vocabulary
/// word share the unigram level's interpolation mass uniformly with all
/// other words.
pub fn estimate_kn(counts: &CountTable) -> Result<(NGramModel, Vec<KnWarning>)> {
    estimate_kn_with(counts, Discounting::Modified)
}

/// [`estimate_kn`] with an explicit discounting scheme.
pub fn estimate_kn_with(
    counts: &CountTable,
    discounting: Discounting,
) -> Result<(NGramModel, Vec<KnWarning>)> {
    if let Discounting::Fixed(d) = discounting {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::arg(format!("fixed discount must be in (0, 1], got {d}")));
        }
    }
    let order = counts.order();
    if order == 0 || counts.distinct(1) == 0 {
        return Err(Error::arg("empty count table"));
    }

    // Counts used at each order: raw at the top, continuation below.
    let mut adjusted: Vec<HashMap<&[WordId], u64>> = vec![HashMap::new(); order];
    for (gram, &c) in counts.table(order) {
        if *gram.last().unwrap() != BOS_ID {
            adjusted[order - 1].insert(gram, c);
        }
    }
    for k in (1..order).rev() {
        for gram in counts.table(k + 1).keys() {
            let suffix = &gram[1..];
            if *suffix.last().unwrap() != BOS_ID {
                *adjusted[k - 1].entry(suffix).or_insert(0) += 1;
            }
        }
    }

    let mut warnings = Vec::new();
    let mut discounts = Vec::with_capacity(order);
    for (i, level) in adjusted.iter().enumerate() {
        if let Discounting::Fixed(d) = discounting {
            discounts.push(Discounts::uniform(d));
            continue;
        }
        let mut coc = [0u64; 4];
        for &c in level.values() {
            if (1..=4).contains(&c) {
                coc[c as usize - 1] += 1;
            }
        }
        let d = modified_discounts(coc).unwrap_or_else(|| {
            let message = format!(
                "order {}: count-of-counts n1..n4 = {coc:?} cannot support modified discounts; using {FALLBACK_DISCOUNT}",
                i + 1
            );
            warn!("{message}");
            warnings.push(KnWarning {
                order: i + 1,
                message,
            });
            Discounts::uniform(FALLBACK_DISCOUNT)
        });
        discounts.push(d);
    }

    let mut stats: Vec<HashMap<&[WordId], ContextStats>> = vec![HashMap::new(); order];
    for (i, level) in adjusted.iter().enumerate() {
        for (gram, &c) in level {
            stats[i].entry(&gram[..i]).or_default().add(c);
        }
    }

    let vocab = counts.vocab().clone();
    let predictive: Vec<WordId> = (0..vocab.len() as WordId).filter(|&w| w != BOS_ID).collect();
    let mut tables: Vec<Table> = vec![HashMap::new(); order];

    // Unigrams: discounted continuation mass plus a uniform share of the
    // leftover.
    let root = stats[0].get([].as_slice()).copied().unwrap_or_default();
    let d1 = &discounts[0];
    let gamma_root = root.gamma(d1);
    let uniform = 1.0 / predictive.len() as f64;
    for &w in &predictive {
        let c = adjusted[0].get([w].as_slice()).copied().unwrap_or(0);
        let p = (c as f64 - d1.for_count(c)) / root.total as f64 + gamma_root * uniform;
        tables[0].insert(
            Box::new([w]),
            Entry {
                logprob: p.log10(),
                backoff: None,
            },
        );
    }

    for k in 2..=order {
        let d = &discounts[k - 1];
        let (lower, upper) = tables.split_at_mut(k - 1);
        let lower = &lower[k - 2];
        let level = &mut upper[0];
        for (gram, &c) in &adjusted[k - 1] {
            let ctx = &gram[..k - 1];
            let st = &stats[k - 1][ctx];
            let lower_p = 10f64.powf(
                lower
                    .get(&gram[1..])
                    .map(|e| e.logprob)
                    .expect("suffix of a counted n-gram is stored one order down"),
            );
            let p = (c as f64 - d.for_count(c)) / st.total as f64 + st.gamma(d) * lower_p;
            level.insert(
                (*gram).into(),
                Entry {
                    logprob: p.log10(),
                    backoff: None,
                },
            );
        }
    }

    // `<s>`-final n-grams are never predicted but must exist as contexts.
    for k in 1..order {
        for ctx in stats[k].keys() {
            tables[k - 1].entry((*ctx).into()).or_insert_with(|| {
                debug_assert_eq!(*ctx.last().unwrap(), BOS_ID);
                Entry {
                    logprob: LOG10_ZERO,
                    backoff: None,
                }
            });
        }
    }
    tables[0]
        .entry(Box::new([BOS_ID]))
        .or_insert(Entry {
            logprob: LOG10_ZERO,
            backoff: None,
        });

    for k in 2..=order {
        let d = &discounts[k - 1];
        for (ctx, st) in &stats[k - 1] {
            let e = tables[k - 2]
                .get_mut(*ctx)
                .expect("every context is stored one order down");
            e.backoff = Some(st.gamma(d).log10());
        }
    }

    Ok((NGramModel::from_parts(order, vocab, tables), warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngramlm::count_ngrams;
    use crate::textnorm::Sentence;

    fn train(lines: &[&str], order: usize) -> (NGramModel, Vec<KnWarning>) {
        let corpus: Vec<Sentence> = lines.iter().map(|l| Sentence::from_line(l)).collect();
        estimate_kn(&count_ngrams(&corpus, order).unwrap()).unwrap()
    }

    #[test]
    fn discount_formula() {
        // Y = 10/(10+8) ; D1 = 1-2Y*4/10 ; D2 = 2-3Y*2/4 ; D3 = 3-4Y*1/2
        let d = modified_discounts([10, 4, 2, 1]).unwrap();
        let y = 10.0 / 18.0;
        assert!((d.one - (1.0 - 0.8 * y)).abs() < 1e-15);
        assert!((d.two - (2.0 - 1.5 * y)).abs() < 1e-15);
        assert!((d.three_plus - (3.0 - 2.0 * y)).abs() < 1e-15);
        assert!(modified_discounts([3, 0, 1, 1]).is_none());
        assert!(modified_discounts([3, 2, 0, 0]).is_none());
        // n3 much larger than n2 drives D2 negative
        assert!(modified_discounts([1, 1, 100, 1]).is_none());
    }

    #[test]
    fn symmetric_unigrams() {
        let (m, _) = train(&["a b c d e"], 1);
        let p = m.logprob::<&str>(&[], "a");
        for w in ["b", "c", "d", "e", "</s>"] {
            assert!((m.logprob::<&str>(&[], w) - p).abs() < 1e-12);
        }
        assert!((m.context_mass::<&str>(&[]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_bigrams() {
        let (m, _) = train(&["a b", "a c"], 2);
        assert!((m.logprob(&["a"], "b") - m.logprob(&["a"], "c")).abs() < 1e-12);
    }

    #[test]
    fn tiny_corpus_falls_back_with_warning() {
        let (_, warnings) = train(&["a b a b a c"], 2);
        assert_eq!(warnings.len(), 2);
        assert_eq!(warnings[0].order, 1);
    }

    #[test]
    fn bos_contexts_are_stored() {
        let (m, _) = train(&["a b", "b a c"], 3);
        let bos = m.entry(&["<s>", "<s>"]).unwrap();
        assert_eq!(bos.logprob, LOG10_ZERO);
        assert!(bos.backoff.is_some());
        assert_eq!(m.entry(&["<s>"]).unwrap().logprob, LOG10_ZERO);
        for ctx in m.contexts() {
            assert!((m.context_mass(&ctx) - 1.0).abs() < 1e-9, "{ctx:?}");
        }
    }
}
