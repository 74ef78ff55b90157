mod common;

use adaptkit::ngramlm::{
    arpa, count_ngrams, estimate_kn, estimate_kn_with, Discounting, NGramModel, LOG10_ZERO,
};
use adaptkit::{OovPolicy, Sentence};
use common::kn_oracle::KnOracle;
use common::{corpus, random_corpus};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn train(c: &[Sentence], order: usize) -> NGramModel {
    estimate_kn(&count_ngrams(c, order).unwrap()).unwrap().0
}

/// Values worked out by hand for "a b a b a c" (order 2). Both orders fall
/// back to D = 0.75. Unigram continuation counts: a=2, b=c=</s>=1, total 5,
/// |V| = 5 with <unk>, gamma = 0.75*4/5 = 0.6.
#[test]
fn hand_computed_bigram_table() {
    let m = train(&corpus(&["a b a b a c"]), 2);
    let expect: [(Vec<&str>, f64); 10] = [
        (vec!["a"], 0.37),
        (vec!["b"], 0.17),
        (vec!["c"], 0.17),
        (vec!["</s>"], 0.17),
        (vec!["<unk>"], 0.12),
        (vec!["a", "b"], 1.25 / 3.0 + 0.5 * 0.17),
        (vec!["a", "c"], 0.25 / 3.0 + 0.5 * 0.17),
        (vec!["b", "a"], 0.625 + 0.375 * 0.37),
        (vec!["<s>", "a"], 0.25 + 0.75 * 0.37),
        (vec!["c", "</s>"], 0.25 + 0.75 * 0.17),
    ];
    for (gram, p) in &expect {
        let e = m.entry(gram).unwrap_or_else(|| panic!("{gram:?} missing"));
        assert!((e.logprob - p.log10()).abs() < 1e-6, "{gram:?}: {} vs {}", e.logprob, p.log10());
    }
    assert_eq!(m.ngram_count(2), 5);
    let backoffs = [("a", 0.5), ("b", 0.375), ("c", 0.75), ("<s>", 0.75)];
    for (w, g) in backoffs {
        let b = m.entry(&[w]).unwrap().backoff.unwrap();
        assert!((b - f64::log10(g)).abs() < 1e-6, "{w}");
    }
    assert!(m.entry(&["</s>"]).unwrap().backoff.is_none());
    // unseen bigram goes through the backoff weight of its context
    assert!((m.logprob(&["a"], "a") - (0.5f64 * 0.37).log10()).abs() < 1e-6);
    assert!((m.logprob(&["b"], "zzz") - (0.375f64 * 0.12).log10()).abs() < 1e-6);
}

fn check_against_oracle(c: &[Sentence], order: usize) -> f64 {
    let m = train(c, order);
    let oracle = KnOracle::new(c, order);
    let mut worst = 0.0f64;
    for k in 1..=order {
        for (gram, e) in m.sorted_entries(k) {
            let (h, w) = gram.split_at(k - 1);
            let h: Vec<String> = h.iter().map(|s| s.to_string()).collect();
            if w[0] != "<s>" {
                let p = oracle.prob(&h, w[0]);
                worst = worst.max((e.logprob - p.log10()).abs());
            } else {
                assert_eq!(e.logprob, LOG10_ZERO);
            }
            if let Some(b) = e.backoff {
                let ctx: Vec<String> = gram.iter().map(|s| s.to_string()).collect();
                let (total, gamma) = oracle.context(&ctx);
                assert!(total > 0);
                worst = worst.max((b - gamma.log10()).abs());
            }
        }
    }
    // unseen combinations exercise the backoff path
    let vocab = oracle.vocab();
    let mut rng = ChaCha8Rng::seed_from_u64(order as u64);
    for _ in 0..300 {
        let n = rng.gen_range(0..order);
        let h: Vec<String> = (0..n).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect();
        let w = vocab.choose(&mut rng).unwrap();
        let got = m.logprob(&h, w);
        worst = worst.max((got - oracle.prob(&h, w).log10()).abs());
    }
    worst
}

#[test]
fn oracle_equivalence_small_corpora() {
    let cases = [
        (corpus(&["a b a b a c"]), 2),
        (corpus(&["a b c", "a c", "b b a c", "c a"]), 3),
        (random_corpus(7, 60, 12, 8), 3),
        (random_corpus(8, 100, 20, 6), 2),
        (random_corpus(9, 80, 15, 5), 1),
    ];
    for (c, order) in cases {
        let worst = check_against_oracle(&c, order);
        assert!(worst < 1e-6, "order {order}: max deviation {worst}");
    }
}

#[test]
fn modified_discounts_are_exercised() {
    let c = random_corpus(7, 60, 12, 8);
    let (_, warnings) = estimate_kn(&count_ngrams(&c, 3).unwrap()).unwrap();
    let oracle = KnOracle::new(&c, 3);
    let modified = (1..=3).filter(|&k| !oracle.discounts(k).1).count();
    assert!(modified >= 2, "fixture should exercise the modified discounts");
    assert_eq!(warnings.len(), 3 - modified);
}

#[test]
fn normalization_over_sampled_contexts() {
    let c = random_corpus(11, 100, 25, 10);
    let m = train(&c, 3);
    let vocab = m.predictive_vocab();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let stored = m.contexts();
    for i in 0..1000 {
        let ctx: Vec<&str> = if i % 2 == 0 {
            stored.choose(&mut rng).unwrap().clone()
        } else {
            let n = rng.gen_range(0..3);
            (0..n).map(|_| *vocab.choose(&mut rng).unwrap()).collect()
        };
        let mass = m.context_mass(&ctx);
        assert!((mass - 1.0).abs() < 1e-6, "{ctx:?}: {mass}");
    }
}

#[test]
fn perplexity_matches_token_summation() {
    let train_c = random_corpus(21, 50, 10, 6);
    let test_c = corpus(&["w0 w1 w2", "w3 zzz w0", "w1"]);
    let m = train(&train_c, 3);
    let ppl = m.perplexity(&test_c, OovPolicy::ScoreAsUnk).unwrap();

    let mut sum = 0.0;
    let mut n = 0;
    for s in &test_c {
        let mut hist = vec!["<s>".to_string(), "<s>".to_string()];
        for w in s.iter().chain(std::iter::once("</s>")) {
            sum += m.logprob(&hist, w);
            n += 1;
            hist.push(w.to_string());
        }
    }
    assert_eq!(ppl.tokens_scored, n);
    assert_eq!(ppl.oov_count, 1);
    assert!((ppl.value - 10f64.powf(-sum / n as f64)).abs() < 1e-9);
}

#[test]
fn arpa_roundtrip_of_trained_model() {
    let m = train(&random_corpus(3, 40, 9, 7), 3);
    let text = arpa::to_arpa_string(&m);
    let back = arpa::read_arpa(text.as_bytes()).unwrap();
    assert!(m.max_abs_diff(&back).unwrap() <= 1e-10);
    // section headers agree with the entry counts
    for k in 1..=3 {
        assert!(text.contains(&format!("ngram {k}={}\n", m.ngram_count(k))));
    }
    assert_eq!(arpa::to_arpa_string(&back), text);
}

fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<u8>>> {
    proptest::collection::vec(proptest::collection::vec(0u8..5, 1..6), 1..12)
}

fn to_corpus(raw: &[Vec<u8>]) -> Vec<Sentence> {
    raw.iter()
        .map(|s| Sentence::from_tokens(s.iter().map(|w| format!("t{w}"))))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn roundtrip_and_normalization(raw in corpus_strategy(), order in 1usize..4) {
        let c = to_corpus(&raw);
        let m = train(&c, order);
        let back = arpa::read_arpa(arpa::to_arpa_string(&m).as_bytes()).unwrap();
        prop_assert!(m.max_abs_diff(&back).unwrap() <= 1e-10);
        for ctx in m.contexts() {
            prop_assert!((m.context_mass(&ctx) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn more_evidence_never_lowers_probability(raw in corpus_strategy(), a in 0u8..5, off in 1u8..5) {
        // b != a: the sentence "c c" would also add (c, </s>) to context c
        let b = (a + off) % 5;
        let mut c = to_corpus(&raw);
        let (ctx, w) = (format!("t{a}"), format!("t{b}"));
        let fixed = |c: &[Sentence]| {
            estimate_kn_with(&count_ngrams(c, 2).unwrap(), Discounting::Fixed(0.75)).unwrap().0
        };
        let before = fixed(&c).logprob(&[ctx.as_str()], &w);
        c.push(Sentence::from_tokens([&ctx, &w]));
        let after = fixed(&c).logprob(&[ctx.as_str()], &w);
        prop_assert!(after >= before - 1e-12, "{} -> {}", before, after);
    }
}
