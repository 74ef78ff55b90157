use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::model::TransliterationModel;
use crate::error::{Error, Result};

pub const DEFAULT_BEAM: usize = 100;

/// Scores are compared after rounding to this many log10 units.
pub const TIE_RESOLUTION: f64 = 1e-12;

/// Partial hypotheses keyed by (target so far, last unit was an insertion).
type States = BTreeMap<(String, bool), f64>;

fn prune(states: States, beam: usize) -> States {
    if states.len() <= beam {
        return states;
    }
    let mut v: Vec<_> = states.into_iter().collect();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    v.truncate(beam);
    v.into_iter().collect()
}

fn insert_once(states: &States, ins: &[(char, f64)]) -> States {
    let mut out = states.clone();
    for ((tgt, last_ins), p) in states {
        if *last_ins {
            continue;
        }
        for &(c, q) in ins {
            let mut t = tgt.clone();
            t.push(c);
            *out.entry((t, true)).or_default() += p * q;
        }
    }
    out
}

/// Candidate targets for `src`, best first, with log10 transliteration
/// likelihoods. Uses [`DEFAULT_BEAM`].
pub fn transliterate(model: &TransliterationModel, src: &str, k: usize) -> Result<Vec<(String, f64)>> {
    transliterate_beam(model, src, k, DEFAULT_BEAM)
}

/// Beam search over derivations that consume `src` left to right. A
/// derivation may not use two insertion units in a row, which keeps the
/// candidate set finite. Partial derivations that reach the same target
/// prefix are merged. Each surviving target is then scored with the full
/// lattice likelihood, so its score counts every segmentation. Empty
/// targets are dropped. Scores are ranked after rounding to
/// [`TIE_RESOLUTION`]; ties are broken by target string, bytewise.
///
/// Returns an empty list when some source character has no unit.
pub fn transliterate_beam(model: &TransliterationModel, src: &str, k: usize, beam: usize) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::arg("k must be at least 1"));
    }
    if beam == 0 {
        return Err(Error::arg("beam width must be at least 1"));
    }
    let mut by_src: BTreeMap<char, Vec<(Option<char>, f64)>> = BTreeMap::new();
    let mut ins = Vec::new();
    for (u, &p) in model.units() {
        if p <= 0.0 {
            continue;
        }
        match (u.src, u.tgt) {
            (Some(s), t) => by_src.entry(s).or_default().push((t, p)),
            (None, Some(t)) => ins.push((t, p)),
            (None, None) => unreachable!("units always have a side"),
        }
    }
    let chars: Vec<char> = src.chars().collect();
    if chars.is_empty() || chars.iter().any(|c| !by_src.contains_key(c)) {
        return Ok(Vec::new());
    }

    let mut states: States = [((String::new(), false), 1.0)].into_iter().collect();
    for c in &chars {
        let cur = insert_once(&states, &ins);
        let mut next = States::new();
        for ((tgt, _), p) in &cur {
            for &(t, q) in &by_src[c] {
                let mut s = tgt.clone();
                s.extend(t);
                *next.entry((s, false)).or_default() += p * q;
            }
        }
        states = prune(next, beam);
    }
    let finals: BTreeSet<String> = insert_once(&states, &ins)
        .into_keys()
        .map(|(t, _)| t)
        .filter(|t| !t.is_empty())
        .collect();

    let mut out: Vec<(String, f64)> = finals
        .into_iter()
        .map(|t| {
            let score = model.ln_pair_likelihood(src, &t) / std::f64::consts::LN_10;
            (t, score)
        })
        .filter(|(_, s)| s.is_finite())
        .collect();
    // scores equal up to rounding noise count as ties
    out.sort_by_cached_key(|(t, s)| (std::cmp::Reverse((s / TIE_RESOLUTION).round() as i64), t.clone().into_bytes()));
    out.truncate(k);
    Ok(out)
}
