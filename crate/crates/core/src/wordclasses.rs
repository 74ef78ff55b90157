//! Hard word clustering with the exchange algorithm.
//!
//! The objective is the log-likelihood (natural log) of the training
//! corpus under the maximum-likelihood class bigram model
//! p(w2 | w1) = p(c2 | c1) · p(w2 | c2):
//!
//! ```text
//! Σ N(c1,c2) ln N(c1,c2) − Σ N(c1,·) ln N(c1,·) − Σ N(·,c2) ln N(·,c2) + Σ N(w) ln N(w)
//! ```
//!
//! Each sentence contributes the bigrams of `<s> w1 … wn </s>`. The two
//! boundary symbols sit in their own fixed classes, outside `[0, K)`.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ngramlm::UNK;
use crate::textnorm::Sentence;

/// Gains closer than this are treated as ties.
const TIE_TOL: f64 = 1e-9;

/// A total map from words to classes `0..k`, always including `<unk>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordClustering {
    k: usize,
    assignment: BTreeMap<String, u32>,
}

impl WordClustering {
    /// Builds a clustering from explicit assignments. `<unk>` must be among
    /// them and every class must lie in `0..k`.
    pub fn new(k: usize, assignment: BTreeMap<String, u32>) -> Result<Self> {
        if k == 0 {
            return Err(Error::arg("number of classes must be at least 1"));
        }
        if let Some((w, c)) = assignment.iter().find(|(_, &c)| c as usize >= k) {
            return Err(Error::arg(format!("class {c} of {w:?} is outside 0..{k}")));
        }
        if !assignment.contains_key(UNK) {
            return Err(Error::arg("clustering has no class for <unk>"));
        }
        Ok(WordClustering { k, assignment })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of words with a class, `<unk>` included.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.assignment.get(word).copied()
    }

    /// Class of `word`; unknown words take the class of `<unk>`.
    pub fn class_of(&self, word: &str) -> u32 {
        self.get(word).unwrap_or(self.assignment[UNK])
    }

    /// (word, class) sorted by word.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.assignment.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Words grouped by class, each group sorted.
    pub fn classes(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.k];
        for (w, c) in self.iter() {
            out[c as usize].push(w);
        }
        out
    }

    /// Writes `word<TAB>class` lines sorted by word.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (w, c) in self.iter() {
            writeln!(out, "{w}\t{c}")?;
        }
        Ok(())
    }

    /// Reads a classes file. K is one more than the largest class id.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut assignment = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (w, c) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected word<TAB>class"))?;
            let c: u32 = c
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("invalid class id {c:?}")))?;
            if w.is_empty() || w.contains(char::is_whitespace) {
                return Err(Error::parse(i + 1, format!("invalid word {w:?}")));
            }
            if assignment.insert(w.to_owned(), c).is_some() {
                return Err(Error::parse(i + 1, format!("{w:?} listed twice")));
            }
        }
        let k = assignment.values().max().map_or(0, |&c| c as usize + 1);
        if !assignment.contains_key(UNK) {
            return Err(Error::Config("classes file has no <unk> entry".into()));
        }
        WordClustering::new(k, assignment)
    }
}

/// One accepted exchange move and the objective after it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeMove {
    pub word: String,
    pub from: u32,
    pub to: u32,
    pub objective: f64,
}

/// Final objective together with how the search got there.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterObjective {
    pub value: f64,
    /// Objective of the initial round-robin assignment.
    pub initial: f64,
    pub moves: Vec<ExchangeMove>,
    pub sweeps: usize,
}

/// Renders a class id as a corpus token.
pub fn class_token(c: u32) -> String {
    format!("C{c}")
}

/// Word bigram statistics over dense ids. Words are `0..v`, then `<s>`
/// and `</s>`.
struct Bigrams {
    words: Vec<String>,
    freq: Vec<u64>,
    /// per word: (right neighbour, count), excluding self loops
    right: Vec<Vec<(u32, u64)>>,
    /// per word: (left neighbour, count), excluding self loops
    left: Vec<Vec<(u32, u64)>>,
    self_loop: Vec<u64>,
    /// bigrams starting / ending at each id
    nl: Vec<u64>,
    nr: Vec<u64>,
    total: u64,
}

impl Bigrams {
    fn new(corpus: &[Sentence]) -> Self {
        let mut freq_map: HashMap<&str, u64> = HashMap::new();
        for s in corpus {
            for w in s.iter() {
                *freq_map.entry(w).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = freq_map.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let v = ranked.len();
        let index: HashMap<&str, u32> = ranked.iter().enumerate().map(|(i, (w, _))| (*w, i as u32)).collect();
        let (bos, eos) = (v as u32, v as u32 + 1);

        let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
        for s in corpus {
            let mut prev = bos;
            for w in s.iter() {
                let id = index[w];
                *counts.entry((prev, id)).or_insert(0) += 1;
                prev = id;
            }
            *counts.entry((prev, eos)).or_insert(0) += 1;
        }
        let n = v + 2;
        let mut right = vec![Vec::new(); n];
        let mut left = vec![Vec::new(); n];
        let mut self_loop = vec![0; n];
        let mut nl = vec![0; n];
        let mut nr = vec![0; n];
        let mut total = 0;
        let mut sorted: Vec<((u32, u32), u64)> = counts.into_iter().collect();
        sorted.sort_unstable();
        for ((a, b), c) in sorted {
            nl[a as usize] += c;
            nr[b as usize] += c;
            total += c;
            if a == b {
                self_loop[a as usize] = c;
            } else {
                right[a as usize].push((b, c));
                left[b as usize].push((a, c));
            }
        }
        Bigrams {
            words: ranked.iter().map(|(w, _)| w.to_string()).collect(),
            freq: ranked.iter().map(|(_, f)| *f).collect(),
            right,
            left,
            self_loop,
            nl,
            nr,
            total,
        }
    }

    fn v(&self) -> usize {
        self.words.len()
    }
}

/// x ln x for integer x up to a bound, looked up.
struct XLogX(Vec<f64>);

impl XLogX {
    fn new(max: u64) -> Self {
        XLogX(
            (0..=max)
                .map(|x| if x == 0 { 0.0 } else { x as f64 * (x as f64).ln() })
                .collect(),
        )
    }

    #[inline]
    fn h(&self, x: u64) -> f64 {
        self.0[x as usize]
    }
}

/// Class-level state of the exchange search.
struct State<'a> {
    bg: &'a Bigrams,
    h: XLogX,
    k: usize,
    /// classes of words, then `<s>` → k and `</s>` → k+1
    class: Vec<u32>,
    /// (k+2)² class bigram counts, row-major
    m: Vec<u64>,
    cl: Vec<u64>,
    cr: Vec<u64>,
    /// scratch: class counts of a word's right / left neighbours
    r: Vec<u64>,
    l: Vec<u64>,
    touched_r: Vec<u32>,
    touched_l: Vec<u32>,
}

impl<'a> State<'a> {
    fn new(bg: &'a Bigrams, k: usize, class: Vec<u32>) -> Self {
        let n = k + 2;
        let mut st = State {
            bg,
            h: XLogX::new(bg.total),
            k,
            class,
            m: vec![0; n * n],
            cl: vec![0; n],
            cr: vec![0; n],
            r: vec![0; n],
            l: vec![0; n],
            touched_r: Vec::new(),
            touched_l: Vec::new(),
        };
        for a in 0..bg.right.len() {
            let ca = st.class[a] as usize;
            st.m[ca * n + ca] += bg.self_loop[a];
            for &(b, c) in &bg.right[a] {
                st.m[ca * n + st.class[b as usize] as usize] += c;
            }
            st.cl[ca] += bg.nl[a];
            st.cr[ca] += bg.nr[a];
        }
        st
    }

    fn n(&self) -> usize {
        self.k + 2
    }

    fn objective(&self) -> f64 {
        let h = &self.h;
        let pairs: f64 = self.m.iter().map(|&x| h.h(x)).sum();
        let left: f64 = self.cl.iter().map(|&x| h.h(x)).sum();
        let right: f64 = self.cr.iter().map(|&x| h.h(x)).sum();
        let words: f64 = self.bg.nr.iter().map(|&x| h.h(x)).sum();
        pairs - left - right + words
    }

    /// Fills the neighbour-class scratch vectors for word `w`.
    fn load_neighbours(&mut self, w: usize) {
        for &c in &self.touched_r {
            self.r[c as usize] = 0;
        }
        for &c in &self.touched_l {
            self.l[c as usize] = 0;
        }
        self.touched_r.clear();
        self.touched_l.clear();
        for &(v, c) in &self.bg.right[w] {
            let cv = self.class[v as usize];
            if self.r[cv as usize] == 0 {
                self.touched_r.push(cv);
            }
            self.r[cv as usize] += c;
        }
        for &(u, c) in &self.bg.left[w] {
            let cu = self.class[u as usize];
            if self.l[cu as usize] == 0 {
                self.touched_l.push(cu);
            }
            self.l[cu as usize] += c;
        }
    }

    /// Adds or removes word `w`'s counts to or from class `c`.
    fn shift(&mut self, w: usize, c: usize, add: bool) {
        let n = self.n();
        let apply = |x: &mut u64, d: u64| {
            if add {
                *x += d
            } else {
                *x -= d
            }
        };
        let State { m, cl, cr, r, l, touched_r, touched_l, bg, .. } = self;
        for &t in touched_r.iter() {
            apply(&mut m[c * n + t as usize], r[t as usize]);
        }
        for &t in touched_l.iter() {
            apply(&mut m[t as usize * n + c], l[t as usize]);
        }
        apply(&mut m[c * n + c], bg.self_loop[w]);
        apply(&mut cl[c], bg.nl[w]);
        apply(&mut cr[c], bg.nr[w]);
    }

    /// Objective gain of inserting the (removed) word `w` into class `b`.
    fn gain(&self, w: usize, b: usize) -> f64 {
        let n = self.n();
        let h = &self.h;
        let mut g = 0.0;
        for &t in &self.touched_r {
            let t = t as usize;
            if t != b {
                let x = self.m[b * n + t];
                g += h.h(x + self.r[t]) - h.h(x);
            }
        }
        for &t in &self.touched_l {
            let t = t as usize;
            if t != b {
                let x = self.m[t * n + b];
                g += h.h(x + self.l[t]) - h.h(x);
            }
        }
        let d = self.m[b * n + b];
        g += h.h(d + self.r[b] + self.l[b] + self.bg.self_loop[w]) - h.h(d);
        g -= h.h(self.cl[b] + self.bg.nl[w]) - h.h(self.cl[b]);
        g -= h.h(self.cr[b] + self.bg.nr[w]) - h.h(self.cr[b]);
        g
    }
}

/// Induces a `k`-class clustering of the corpus vocabulary.
///
/// Words start round-robin in frequency order (ties bytewise). Each of up
/// to `iters` sweeps visits every word in an order shuffled by `seed` and
/// moves it to the class with the highest objective, ties going to the
/// lowest class id. Sweeps stop early once one makes no move. `<unk>`
/// joins the class holding the most singleton-word tokens.
pub fn induce_classes(corpus: &[Sentence], k: usize, iters: usize, seed: u64) -> Result<(WordClustering, ClusterObjective)> {
    if k == 0 {
        return Err(Error::arg("number of classes must be at least 1"));
    }
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::arg("cannot cluster an empty corpus"));
    }
    if k > u32::MAX as usize - 2 {
        return Err(Error::arg("too many classes"));
    }
    let bg = Bigrams::new(corpus);
    let v = bg.v();
    let mut class: Vec<u32> = (0..v).map(|i| (i % k) as u32).collect();
    class.push(k as u32);
    class.push(k as u32 + 1);
    let mut st = State::new(&bg, k, class);

    let initial = st.objective();
    let mut obj = initial;
    let mut moves = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..v).collect();
    let mut sweeps = 0;
    // full recomputation after every move is affordable on small inputs
    let verify = cfg!(debug_assertions) && v <= 64;

    for _ in 0..iters {
        sweeps += 1;
        order.shuffle(&mut rng);
        let mut moved = false;
        for &w in &order {
            let a = st.class[w] as usize;
            st.load_neighbours(w);
            st.shift(w, a, false);
            let gains: Vec<f64> = (0..k).map(|b| st.gain(w, b)).collect();
            let best = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let b = gains.iter().position(|&g| g >= best - TIE_TOL).unwrap();
            st.shift(w, b, true);
            if b != a {
                let next = obj + gains[b] - gains[a];
                assert!(next >= obj - TIE_TOL, "exchange move lowered the objective: {obj} -> {next}");
                obj = next;
                st.class[w] = b as u32;
                if verify {
                    let fresh = st.objective();
                    debug_assert!((fresh - obj).abs() < 1e-6, "incremental {obj} vs full {fresh}");
                }
                moves.push(ExchangeMove {
                    word: bg.words[w].clone(),
                    from: a as u32,
                    to: b as u32,
                    objective: obj,
                });
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let value = st.objective();
    let mut assignment: BTreeMap<String, u32> =
        bg.words.iter().zip(&st.class).map(|(w, &c)| (w.clone(), c)).collect();
    if !assignment.contains_key(UNK) {
        let mut singles = vec![0u64; k];
        for (i, &f) in bg.freq.iter().enumerate() {
            if f == 1 {
                singles[st.class[i] as usize] += 1;
            }
        }
        let top = singles.iter().copied().max().unwrap_or(0);
        let unk = if top == 0 { 0 } else { singles.iter().position(|&s| s == top).unwrap() };
        assignment.insert(UNK.to_owned(), unk as u32);
    }
    Ok((
        WordClustering::new(k, assignment)?,
        ClusterObjective {
            value,
            initial,
            moves,
            sweeps,
        },
    ))
}

/// Class bigram log-likelihood of `corpus` under a given clustering.
/// Words missing from the clustering use the class of `<unk>`.
pub fn cluster_objective(corpus: &[Sentence], clustering: &WordClustering) -> f64 {
    let bg = Bigrams::new(corpus);
    let k = clustering.k();
    let mut class: Vec<u32> = bg.words.iter().map(|w| clustering.class_of(w)).collect();
    class.push(k as u32);
    class.push(k as u32 + 1);
    State::new(&bg, k, class).objective()
}

/// Replaces every token by its class token `C<id>`.
pub fn map_corpus(corpus: &[Sentence], clustering: &WordClustering) -> Vec<Sentence> {
    corpus
        .iter()
        .map(|s| s.map_tokens(|w| class_token(clustering.class_of(w))))
        .collect()
}
