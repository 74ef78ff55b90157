use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use adaptkit::translit::synth::synthetic_pairs;
use adaptkit::translit::{mine, pair_likelihood_tr, transliterate_beam, PairLabel, Unit};
use adaptkit::TransliterationModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every monotone segmentation of (s, t) into units.
fn segmentations(s: &[char], t: &[char]) -> Vec<Vec<Unit>> {
    if s.is_empty() && t.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut extend = |u: Unit, rest: Vec<Vec<Unit>>| {
        for mut r in rest {
            r.insert(0, u);
            out.push(r);
        }
    };
    if !s.is_empty() && !t.is_empty() {
        extend(Unit::sub(s[0], t[0]), segmentations(&s[1..], &t[1..]));
    }
    if !s.is_empty() {
        extend(Unit::del(s[0]), segmentations(&s[1..], t));
    }
    if !t.is_empty() {
        extend(Unit::ins(t[0]), segmentations(s, &t[1..]));
    }
    out
}

fn chars(w: &str) -> Vec<char> {
    w.chars().collect()
}

fn enum_likelihood(p: &BTreeMap<Unit, f64>, s: &str, t: &str) -> f64 {
    segmentations(&chars(s), &chars(t))
        .iter()
        .map(|seg| seg.iter().map(|u| p.get(u).copied().unwrap_or(0.0)).product::<f64>())
        .sum()
}

fn words(alpha: &[char], max: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max {
        frontier = frontier
            .iter()
            .flat_map(|w| alpha.iter().map(move |c| format!("{w}{c}")))
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out.remove(0);
    out
}

fn random_model(rng: &mut ChaCha8Rng, src: &[char], tgt: &[char]) -> TransliterationModel {
    let mut units = Vec::new();
    for &a in src {
        units.push(Unit::del(a));
        units.extend(tgt.iter().map(|&b| Unit::sub(a, b)));
    }
    units.extend(tgt.iter().map(|&b| Unit::ins(b)));
    let w: Vec<f64> = units.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
    let z: f64 = w.iter().sum();
    let uni = |cs: &[char]| cs.iter().map(|&c| (c, 1.0 / cs.len() as f64)).collect();
    TransliterationModel::new(units.into_iter().zip(w.iter().map(|x| x / z)).collect(), 0.5, uni(src), uni(tgt)).unwrap()
}

#[test]
fn dp_matches_enumeration_up_to_length_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (src, tgt) = (['a', 'b'], ['x', 'y']);
    let m = random_model(&mut rng, &src, &tgt);
    let (ws, wt) = (words(&src, 4), words(&tgt, 4));
    for s in &ws {
        for t in &wt {
            let want = enum_likelihood(m.units(), s, t);
            let got = pair_likelihood_tr(&m, s, t);
            assert!((got - want).abs() <= 1e-12 * want, "{s} {t}: {got} vs {want}");
            assert!((m.ln_pair_likelihood(s, t) - want.ln()).abs() < 1e-10);
        }
    }
}

#[test]
fn three_unit_model_two_chars() {
    let p: BTreeMap<Unit, f64> =
        [(Unit::sub('a', 'x'), 0.5), (Unit::del('b'), 0.2), (Unit::ins('y'), 0.3)].into_iter().collect();
    let uni = |c: char| [(c, 1.0)].into_iter().collect();
    let m = TransliterationModel::new(p.clone(), 0.5, uni('a'), uni('x')).unwrap();
    for (s, t) in [("ab", "xy"), ("ab", "x"), ("a", "xy"), ("ba", "yx")] {
        let want = enum_likelihood(&p, s, t);
        assert!((pair_likelihood_tr(&m, s, t) - want).abs() < 1e-15, "{s} {t}");
    }
    assert!(pair_likelihood_tr(&m, "ab", "xy") > 0.0);
}

/// One EM step computed by enumerating segmentations.
fn one_step_oracle(pairs: &[(&str, &str)]) -> (BTreeMap<Unit, f64>, f64) {
    let mut units = BTreeSet::new();
    for (s, t) in pairs {
        for seg in segmentations(&chars(s), &chars(t)) {
            units.extend(seg);
        }
    }
    let p0: BTreeMap<Unit, f64> = units.iter().map(|&u| (u, 1.0 / units.len() as f64)).collect();
    let freq = |side: Vec<&str>| {
        let mut c: BTreeMap<char, f64> = BTreeMap::new();
        for w in &side {
            for ch in w.chars() {
                *c.entry(ch).or_default() += 1.0;
            }
        }
        let n: f64 = c.values().sum();
        c.into_iter().map(|(k, v)| (k, v / n)).collect::<BTreeMap<_, _>>()
    };
    let su = freq(pairs.iter().map(|p| p.0).collect());
    let tu = freq(pairs.iter().map(|p| p.1).collect());

    let mut counts: BTreeMap<Unit, f64> = BTreeMap::new();
    let mut post_sum = 0.0;
    for (s, t) in pairs {
        let segs = segmentations(&chars(s), &chars(t));
        let probs: Vec<f64> = segs.iter().map(|seg| seg.iter().map(|u| p0[u]).product()).collect();
        let z: f64 = probs.iter().sum();
        let ntr: f64 = s.chars().map(|c| su[&c]).product::<f64>() * t.chars().map(|c| tu[&c]).product::<f64>();
        let post = 0.5 * z / (0.5 * z + 0.5 * ntr);
        post_sum += post;
        for (seg, pr) in segs.iter().zip(&probs) {
            for u in seg {
                *counts.entry(*u).or_default() += post * pr / z;
            }
        }
    }
    let total: f64 = counts.values().sum();
    let probs = units.iter().map(|u| (*u, counts.get(u).copied().unwrap_or(0.0) / total)).collect();
    (probs, post_sum / pairs.len() as f64)
}

#[test]
fn single_iteration_matches_enumeration() {
    let pairs = [("ab", "xy"), ("ba", "yx"), ("abc", "zx")];
    let (want, lambda) = one_step_oracle(&pairs);
    let r = mine(&pairs, 1, 0.5).unwrap();
    let got = r.model.units();
    assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
    for (u, p) in &want {
        assert!((got[u] - p).abs() < 1e-12, "{u:?}: {} vs {p}", got[u]);
    }
    assert!((r.model.lambda() - lambda).abs() < 1e-12);
}

fn f1(gold: &[bool], pred: &[bool]) -> f64 {
    let tp = gold.iter().zip(pred).filter(|(g, p)| **g && **p).count() as f64;
    let fp = gold.iter().zip(pred).filter(|(g, p)| !**g && **p).count() as f64;
    let fneg = gold.iter().zip(pred).filter(|(g, p)| **g && !**p).count() as f64;
    2.0 * tp / (2.0 * tp + fp + fneg)
}

#[test]
fn synthetic_mapping_is_recovered() {
    let start = Instant::now();
    let data = synthetic_pairs(7, 200, 200).unwrap();
    let pairs: Vec<(&str, &str)> = data.iter().map(|p| (p.src.as_str(), p.tgt.as_str())).collect();
    let r = mine(&pairs, 20, 0.5).unwrap();
    let gold: Vec<bool> = data.iter().map(|p| p.is_transliteration).collect();
    let pred: Vec<bool> = r.pairs.iter().map(|p| p.label == PairLabel::Transliteration).collect();
    let score = f1(&gold, &pred);
    assert!(score >= 0.9, "F1 {score}");
    assert!((r.model.lambda() - 0.5).abs() <= 0.1, "lambda {}", r.model.lambda());
    assert!(r.is_monotone(1e-12));
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn loglik_monotone_and_lambda_is_mean_posterior() {
    for seed in 0..3 {
        let data = synthetic_pairs(seed, 30, 30).unwrap();
        let pairs: Vec<(&str, &str)> = data.iter().map(|p| (p.src.as_str(), p.tgt.as_str())).collect();
        let full = mine(&pairs, 6, 0.5).unwrap();
        for w in full.loglik.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * w[0].abs(), "{w:?}");
        }
        for t in 1..6 {
            let prefix = mine(&pairs, t, 0.5).unwrap();
            let mean = pairs.iter().map(|(s, g)| prefix.model.posterior(s, g)).sum::<f64>() / pairs.len() as f64;
            assert!((full.lambdas[t] - mean).abs() < 1e-12);
            assert!((prefix.loglik[t] - full.loglik[t]).abs() < 1e-9 * full.loglik[t].abs());
        }
        assert!(full.pairs.iter().all(|p| (0.0..=1.0).contains(&p.posterior)));
        assert!(full
            .pairs
            .iter()
            .all(|p| (p.label == PairLabel::Transliteration) == (p.posterior > 0.5)));
    }
}

/// All targets reachable without two insertions in a row, scored by
/// enumeration over every segmentation.
fn exhaustive(m: &TransliterationModel, src: &str) -> Vec<(String, f64)> {
    fn walk(m: &TransliterationModel, s: &[char], last_ins: bool, prefix: String, out: &mut BTreeSet<String>) {
        for (u, &p) in m.units() {
            if p <= 0.0 {
                continue;
            }
            match (u.src, u.tgt) {
                (None, Some(t)) if !last_ins => walk(m, s, true, format!("{prefix}{t}"), out),
                (Some(c), t) if s.first() == Some(&c) => {
                    walk(m, &s[1..], false, format!("{prefix}{}", t.map(String::from).unwrap_or_default()), out)
                }
                _ => {}
            }
        }
        if s.is_empty() && !prefix.is_empty() {
            out.insert(prefix);
        }
    }
    let mut targets = BTreeSet::new();
    walk(m, &chars(src), false, String::new(), &mut targets);
    let mut v: Vec<(String, f64)> = targets
        .into_iter()
        .map(|t| {
            let p = enum_likelihood(m.units(), src, &t);
            (t, p.log10())
        })
        .collect();
    let key = |s: f64| (s * 1e12).round() as i64;
    v.sort_by(|a, b| key(b.1).cmp(&key(a.1)).then_with(|| a.0.cmp(&b.0)));
    v
}

fn same_ranking(got: &[(String, f64)], want: &[(String, f64)]) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert_eq!(g.0, w.0, "{got:?}\n{want:?}");
        assert!((g.1 - w.1).abs() < 1e-9);
    }
}

#[test]
fn top_three_match_exhaustive_enumeration() {
    let units: BTreeMap<Unit, f64> = [
        (Unit::sub('a', 'x'), 0.4),
        (Unit::sub('a', 'y'), 0.2),
        (Unit::sub('b', 'y'), 0.3),
        (Unit::ins('z'), 0.1),
    ]
    .into_iter()
    .collect();
    let uni = |c: char| [(c, 1.0)].into_iter().collect();
    let m = TransliterationModel::new(units, 0.5, uni('a'), uni('x')).unwrap();
    let want = exhaustive(&m, "ab");
    assert!(want.len() > 3);
    let got = transliterate_beam(&m, "ab", 3, 1000).unwrap();
    same_ranking(&got, &want[..3]);
}

#[test]
fn wide_beam_equals_exhaustive_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let m = random_model(&mut rng, &['a', 'b'], &['x', 'y']);
        for src in ["a", "ab", "ba", "abb"] {
            let want = exhaustive(&m, src);
            let got = transliterate_beam(&m, src, want.len() + 5, 100_000).unwrap();
            same_ranking(&got, &want);
        }
    }
}
