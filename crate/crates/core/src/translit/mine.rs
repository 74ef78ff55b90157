use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use super::model::{ln_mixture, posterior, Lattice, TransliterationModel, Unit, EMPTY_SIDE};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_ITERS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    Transliteration,
    NonTransliteration,
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairLabel::Transliteration => "transliteration",
            PairLabel::NonTransliteration => "non-transliteration",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedPair {
    pub src_word: String,
    pub tgt_word: String,
    pub posterior: f64,
    pub label: PairLabel,
}

/// Result of [`mine`]. `loglik[0]` is the data log-likelihood (natural log)
/// of the initial parameters and `loglik[t]` the value after iteration t;
/// `lambdas[t - 1]` is the prior set by iteration t.
#[derive(Debug, Clone)]
pub struct Mining {
    pub model: TransliterationModel,
    pub pairs: Vec<MinedPair>,
    pub loglik: Vec<f64>,
    pub lambdas: Vec<f64>,
}

impl Mining {
    /// True when no iteration lowered the log-likelihood by more than
    /// `tol` relative to its magnitude.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.loglik.windows(2).all(|w| w[1] >= w[0] - tol * w[0].abs().max(1.0))
    }
}

/// Unit indices along the lattice of one pair.
struct PairLattice {
    n: usize,
    m: usize,
    sub: Vec<usize>,
    del: Vec<usize>,
    ins: Vec<usize>,
    ln_ntr: f64,
}

impl PairLattice {
    fn weights(&self, probs: &[f64], scale: f64) -> Lattice {
        let s2 = scale * scale;
        Lattice {
            n: self.n,
            m: self.m,
            sub: self.sub.iter().map(|&u| probs[u] * s2).collect(),
            del: self.del.iter().map(|&u| probs[u] * scale).collect(),
            ins: self.ins.iter().map(|&u| probs[u] * scale).collect(),
        }
    }
}

struct PairStats {
    posterior: f64,
    ln_lik: f64,
    /// expected unit counts given the pair is a transliteration
    counts: Vec<(usize, f64)>,
}

fn e_step_pair(p: &PairLattice, probs: &[f64], lambda: f64, scale: f64, with_counts: bool) -> PairStats {
    let lat = p.weights(probs, scale);
    let a = lat.forward();
    let z = a[a.len() - 1];
    let ln_tr = z.ln() - (p.n + p.m) as f64 * scale.ln();
    let post = posterior(lambda, ln_tr, p.ln_ntr);
    let mut counts = Vec::new();
    if with_counts && z > 0.0 {
        let b = lat.backward();
        let w = p.m + 1;
        let mut push = |u: usize, v: f64| {
            if v > 0.0 {
                counts.push((u, v / z));
            }
        };
        for i in 0..=p.n {
            for j in 0..=p.m {
                let here = a[i * w + j];
                if here == 0.0 {
                    continue;
                }
                if i < p.n && j < p.m {
                    push(p.sub[i * p.m + j], here * lat.sub[i * p.m + j] * b[(i + 1) * w + j + 1]);
                }
                if i < p.n {
                    push(p.del[i], here * lat.del[i] * b[(i + 1) * w + j]);
                }
                if j < p.m {
                    push(p.ins[j], here * lat.ins[j] * b[i * w + j + 1]);
                }
            }
        }
    }
    PairStats {
        posterior: post,
        ln_lik: ln_mixture(lambda, ln_tr, p.ln_ntr),
        counts,
    }
}

fn unigrams<'a>(words: impl Iterator<Item = &'a str>) -> BTreeMap<char, f64> {
    let mut counts: BTreeMap<char, f64> = BTreeMap::new();
    for w in words {
        for c in w.chars() {
            *counts.entry(c).or_default() += 1.0;
        }
    }
    let total: f64 = counts.values().sum();
    counts.values_mut().for_each(|v| *v /= total);
    counts
}

fn check_word(w: &str, i: usize) -> Result<()> {
    if w.is_empty() {
        return Err(Error::arg(format!("pair {} has an empty word", i + 1)));
    }
    if w.contains(['\t', '\n', EMPTY_SIDE]) {
        return Err(Error::arg(format!("pair {} contains a tab, newline or {EMPTY_SIDE}", i + 1)));
    }
    Ok(())
}

/// Mines transliteration pairs with EM over a two-component mixture.
///
/// The transliteration component is the unit model, started uniform over
/// every unit that appears in some pair's lattice. The other component
/// multiplies character unigrams estimated once from all words. Each
/// iteration re-estimates unit probabilities from posterior-weighted
/// expected counts and sets λ to the mean posterior. Pairs are labelled
/// with posteriors under the final model.
pub fn mine<S: AsRef<str> + Sync>(pairs: &[(S, S)], iters: usize, threshold: f64) -> Result<Mining> {
    if pairs.len() < 2 {
        return Err(Error::arg(format!("mining needs at least 2 pairs, got {}", pairs.len())));
    }
    if iters == 0 {
        return Err(Error::arg("mining needs at least one iteration"));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::arg(format!("threshold {threshold} is outside [0, 1]")));
    }
    for (i, (s, t)) in pairs.iter().enumerate() {
        check_word(s.as_ref(), i)?;
        check_word(t.as_ref(), i)?;
    }

    let src_uni = unigrams(pairs.iter().map(|p| p.0.as_ref()));
    let tgt_uni = unigrams(pairs.iter().map(|p| p.1.as_ref()));

    let mut unit_set = BTreeSet::new();
    for (s, t) in pairs {
        let (s, t) = (s.as_ref(), t.as_ref());
        for a in s.chars() {
            unit_set.insert(Unit::del(a));
            for b in t.chars() {
                unit_set.insert(Unit::sub(a, b));
            }
        }
        unit_set.extend(t.chars().map(Unit::ins));
    }
    let units: Vec<Unit> = unit_set.into_iter().collect();
    let index: HashMap<Unit, usize> = units.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    let lattices: Vec<PairLattice> = pairs
        .iter()
        .map(|(s, t)| {
            let s: Vec<char> = s.as_ref().chars().collect();
            let t: Vec<char> = t.as_ref().chars().collect();
            let mut sub = Vec::with_capacity(s.len() * t.len());
            for &a in &s {
                sub.extend(t.iter().map(|&b| index[&Unit::sub(a, b)]));
            }
            let ln_ntr = s.iter().map(|c| src_uni[c].ln()).sum::<f64>() + t.iter().map(|c| tgt_uni[c].ln()).sum::<f64>();
            PairLattice {
                n: s.len(),
                m: t.len(),
                sub,
                del: s.iter().map(|&a| index[&Unit::del(a)]).collect(),
                ins: t.iter().map(|&b| index[&Unit::ins(b)]).collect(),
                ln_ntr,
            }
        })
        .collect();

    let mut probs = vec![1.0 / units.len() as f64; units.len()];
    let mut lambda = 0.5;
    let mut loglik = Vec::with_capacity(iters + 1);
    let mut lambdas = Vec::with_capacity(iters);

    let run = |probs: &[f64], lambda: f64, with_counts: bool| -> Result<(Vec<PairStats>, f64)> {
        let scale = (probs.iter().filter(|&&p| p > 0.0).count().max(1) as f64).sqrt();
        let stats: Vec<PairStats> = lattices.par_iter().map(|p| e_step_pair(p, probs, lambda, scale, with_counts)).collect();
        let ll: f64 = stats.iter().map(|s| s.ln_lik).sum();
        if !ll.is_finite() {
            return Err(Error::Numerical(format!("data log-likelihood is {ll}")));
        }
        Ok((stats, ll))
    };

    for it in 0..iters {
        let (stats, ll) = run(&probs, lambda, true)?;
        loglik.push(ll);
        let mut counts = vec![0.0; units.len()];
        for s in &stats {
            for &(u, c) in &s.counts {
                counts[u] += s.posterior * c;
            }
        }
        let total: f64 = counts.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Numerical(format!(
                "no expected unit counts in iteration {}",
                it + 1
            )));
        }
        probs = counts.iter().map(|c| c / total).collect();
        lambda = stats.iter().map(|s| s.posterior).sum::<f64>() / stats.len() as f64;
        lambdas.push(lambda);
        log::debug!("translit EM iteration {}: loglik {ll:.6}, lambda {lambda:.4}", it + 1);
    }
    let (stats, ll) = run(&probs, lambda, false)?;
    loglik.push(ll);

    let mined = pairs
        .iter()
        .zip(&stats)
        .map(|((s, t), st)| {
            MinedPair {
                src_word: s.as_ref().to_string(),
                tgt_word: t.as_ref().to_string(),
                posterior: st.posterior,
                label: if st.posterior > threshold {
                    PairLabel::Transliteration
                } else {
                    PairLabel::NonTransliteration
                },
            }
        })
        .collect();

    let model = TransliterationModel::new(units.into_iter().zip(probs).collect(), lambda, src_uni, tgt_uni)?;
    Ok(Mining {
        model,
        pairs: mined,
        loglik,
        lambdas,
    })
}

/// Reads `src<TAB>tgt` lines; blank lines are skipped.
pub fn read_pairs<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split('\t');
        match (it.next(), it.next(), it.next()) {
            (Some(s), Some(t), None) if !s.is_empty() && !t.is_empty() => out.push((s.to_string(), t.to_string())),
            _ => return Err(Error::parse(i + 1, "expected src<TAB>tgt")),
        }
    }
    Ok(out)
}

/// Writes `src<TAB>tgt<TAB>posterior<TAB>label` lines.
pub fn write_mined<W: Write>(pairs: &[MinedPair], mut out: W) -> std::io::Result<()> {
    for p in pairs {
        writeln!(out, "{}\t{}\t{}\t{}", p.src_word, p.tgt_word, p.posterior, p.label)?;
    }
    Ok(())
}
