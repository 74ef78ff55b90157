use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Marker for the empty side of a unit in model files.
pub const EMPTY_SIDE: char = '∅';

const SUM_TOL: f64 = 1e-9;

/// A character unit: one source character, one target character, or a
/// pair of them. Both sides empty is not a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Unit {
    pub src: Option<char>,
    pub tgt: Option<char>,
}

impl Unit {
    pub fn new(src: Option<char>, tgt: Option<char>) -> Result<Self> {
        if src.is_none() && tgt.is_none() {
            return Err(Error::arg("a unit needs at least one character"));
        }
        Ok(Unit { src, tgt })
    }

    pub fn sub(s: char, t: char) -> Self {
        Unit { src: Some(s), tgt: Some(t) }
    }

    pub fn del(s: char) -> Self {
        Unit { src: Some(s), tgt: None }
    }

    pub fn ins(t: char) -> Self {
        Unit { src: None, tgt: Some(t) }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}",
            self.src.unwrap_or(EMPTY_SIDE),
            self.tgt.unwrap_or(EMPTY_SIDE)
        )
    }
}

/// Edge weights of the alignment lattice for one word pair. Node (i, j)
/// means i source and j target characters consumed.
#[derive(Debug, Clone)]
pub(crate) struct Lattice {
    pub n: usize,
    pub m: usize,
    /// `sub[i * m + j]`: unit (src[i], tgt[j])
    pub sub: Vec<f64>,
    pub del: Vec<f64>,
    pub ins: Vec<f64>,
}

impl Lattice {
    fn node(&self, i: usize, j: usize) -> usize {
        i * (self.m + 1) + j
    }

    pub fn forward(&self) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut a = vec![0.0; (n + 1) * (m + 1)];
        a[0] = 1.0;
        for i in 0..=n {
            for j in 0..=m {
                if i == 0 && j == 0 {
                    continue;
                }
                let mut v = 0.0;
                if i > 0 && j > 0 {
                    v += a[self.node(i - 1, j - 1)] * self.sub[(i - 1) * m + j - 1];
                }
                if i > 0 {
                    v += a[self.node(i - 1, j)] * self.del[i - 1];
                }
                if j > 0 {
                    v += a[self.node(i, j - 1)] * self.ins[j - 1];
                }
                a[self.node(i, j)] = v;
            }
        }
        a
    }

    pub fn backward(&self) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut b = vec![0.0; (n + 1) * (m + 1)];
        b[self.node(n, m)] = 1.0;
        for i in (0..=n).rev() {
            for j in (0..=m).rev() {
                if i == n && j == m {
                    continue;
                }
                let mut v = 0.0;
                if i < n && j < m {
                    v += self.sub[i * m + j] * b[self.node(i + 1, j + 1)];
                }
                if i < n {
                    v += self.del[i] * b[self.node(i + 1, j)];
                }
                if j < m {
                    v += self.ins[j] * b[self.node(i, j + 1)];
                }
                b[self.node(i, j)] = v;
            }
        }
        b
    }

    pub fn total(&self) -> f64 {
        self.forward()[(self.n + 1) * (self.m + 1) - 1]
    }
}

/// Joint character-unit model for transliterations, together with the
/// unigram model for unrelated pairs and the prior of the former.
#[derive(Debug, Clone, PartialEq)]
pub struct TransliterationModel {
    units: BTreeMap<Unit, f64>,
    lambda: f64,
    src_unigrams: BTreeMap<char, f64>,
    tgt_unigrams: BTreeMap<char, f64>,
}

fn check_distribution<K>(name: &str, d: &BTreeMap<K, f64>) -> Result<()> {
    if let Some(p) = d.values().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::arg(format!("{name} contains probability {p}")));
    }
    let sum: f64 = d.values().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::arg(format!("{name} sums to {sum}")));
    }
    Ok(())
}

impl TransliterationModel {
    pub fn new(
        units: BTreeMap<Unit, f64>,
        lambda: f64,
        src_unigrams: BTreeMap<char, f64>,
        tgt_unigrams: BTreeMap<char, f64>,
    ) -> Result<Self> {
        if units.keys().any(|u| u.src.is_none() && u.tgt.is_none()) {
            return Err(Error::arg("a unit needs at least one character"));
        }
        check_distribution("unit distribution", &units)?;
        check_distribution("source unigrams", &src_unigrams)?;
        check_distribution("target unigrams", &tgt_unigrams)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::arg(format!("lambda {lambda} is outside [0, 1]")));
        }
        Ok(TransliterationModel {
            units,
            lambda,
            src_unigrams,
            tgt_unigrams,
        })
    }

    pub fn units(&self) -> &BTreeMap<Unit, f64> {
        &self.units
    }

    pub fn unit_prob(&self, u: &Unit) -> f64 {
        self.units.get(u).copied().unwrap_or(0.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn src_unigrams(&self) -> &BTreeMap<char, f64> {
        &self.src_unigrams
    }

    pub fn tgt_unigrams(&self) -> &BTreeMap<char, f64> {
        &self.tgt_unigrams
    }

    pub(crate) fn lattice(&self, src: &[char], tgt: &[char], scale: f64) -> Lattice {
        let mut sub = Vec::with_capacity(src.len() * tgt.len());
        for &s in src {
            sub.extend(tgt.iter().map(|&t| self.unit_prob(&Unit::sub(s, t)) * scale * scale));
        }
        Lattice {
            n: src.len(),
            m: tgt.len(),
            sub,
            del: src.iter().map(|&s| self.unit_prob(&Unit::del(s)) * scale).collect(),
            ins: tgt.iter().map(|&t| self.unit_prob(&Unit::ins(t)) * scale).collect(),
        }
    }

    /// Transliteration likelihood: the sum over all monotone segmentations
    /// of the pair into units of the product of unit probabilities.
    pub fn pair_likelihood(&self, src: &str, tgt: &str) -> f64 {
        let (s, t): (Vec<char>, Vec<char>) = (src.chars().collect(), tgt.chars().collect());
        self.lattice(&s, &t, 1.0).total()
    }

    /// Natural log of [`pair_likelihood`](Self::pair_likelihood), computed
    /// on a rescaled lattice so long words do not underflow.
    pub fn ln_pair_likelihood(&self, src: &str, tgt: &str) -> f64 {
        let (s, t): (Vec<char>, Vec<char>) = (src.chars().collect(), tgt.chars().collect());
        let scale = self.scale();
        self.lattice(&s, &t, scale).total().ln() - (s.len() + t.len()) as f64 * scale.ln()
    }

    /// Each consumed character multiplies a path by this, which keeps
    /// lattice values near one.
    pub(crate) fn scale(&self) -> f64 {
        (self.units.values().filter(|&&p| p > 0.0).count().max(1) as f64).sqrt()
    }

    /// Natural log of the unigram likelihood of an unrelated pair.
    /// Characters missing from the tables give negative infinity.
    pub fn ln_non_translit_likelihood(&self, src: &str, tgt: &str) -> f64 {
        let side = |w: &str, d: &BTreeMap<char, f64>| -> f64 {
            w.chars().map(|c| d.get(&c).copied().unwrap_or(0.0).ln()).sum()
        };
        side(src, &self.src_unigrams) + side(tgt, &self.tgt_unigrams)
    }

    /// Posterior probability that the pair is a transliteration.
    pub fn posterior(&self, src: &str, tgt: &str) -> f64 {
        posterior(
            self.lambda,
            self.ln_pair_likelihood(src, tgt),
            self.ln_non_translit_likelihood(src, tgt),
        )
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "\\lambda")?;
        writeln!(out, "{}", self.lambda)?;
        writeln!(out, "\\units")?;
        for (u, p) in &self.units {
            writeln!(out, "{u}\t{p}")?;
        }
        for (name, table) in [("src", &self.src_unigrams), ("tgt", &self.tgt_unigrams)] {
            writeln!(out, "\\{name}-unigrams")?;
            for (c, p) in table {
                writeln!(out, "{c}\t{p}")?;
            }
        }
        Ok(())
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Lambda,
            Units,
            Src,
            Tgt,
        }
        let mut section = Section::None;
        let mut lambda = None;
        let mut units = BTreeMap::new();
        let (mut src, mut tgt) = (BTreeMap::new(), BTreeMap::new());
        let mut seen = Vec::new();

        for (i, line) in reader.lines().enumerate() {
            let (line, lineno) = (line?, i + 1);
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('\\') {
                section = match name {
                    "lambda" => Section::Lambda,
                    "units" => Section::Units,
                    "src-unigrams" => Section::Src,
                    "tgt-unigrams" => Section::Tgt,
                    _ => return Err(Error::parse(lineno, format!("unknown section \\{name}"))),
                };
                if seen.contains(&name.to_string()) {
                    return Err(Error::parse(lineno, format!("repeated section \\{name}")));
                }
                seen.push(name.to_string());
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let prob = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad probability {s:?}")))
            };
            let side = |s: &str| -> Result<Option<char>> {
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(EMPTY_SIDE), None) => Ok(None),
                    (Some(c), None) => Ok(Some(c)),
                    _ => Err(Error::parse(lineno, format!("{s:?} is not a single character"))),
                }
            };
            match section {
                Section::None => return Err(Error::parse(lineno, "data before the first section")),
                Section::Lambda => {
                    if lambda.is_some() || fields.len() != 1 {
                        return Err(Error::parse(lineno, "the lambda section holds one value"));
                    }
                    lambda = Some(prob(fields[0])?);
                }
                Section::Units => {
                    if fields.len() != 3 {
                        return Err(Error::parse(lineno, "expected src<TAB>tgt<TAB>prob"));
                    }
                    let u = Unit::new(side(fields[0])?, side(fields[1])?).map_err(|e| Error::parse(lineno, e.to_string()))?;
                    if units.insert(u, prob(fields[2])?).is_some() {
                        return Err(Error::parse(lineno, "duplicate unit"));
                    }
                }
                Section::Src | Section::Tgt => {
                    if fields.len() != 2 {
                        return Err(Error::parse(lineno, "expected char<TAB>prob"));
                    }
                    let c = side(fields[0])?.ok_or_else(|| Error::parse(lineno, "empty unigram"))?;
                    let table = if section == Section::Src { &mut src } else { &mut tgt };
                    if table.insert(c, prob(fields[1])?).is_some() {
                        return Err(Error::parse(lineno, "duplicate unigram"));
                    }
                }
            }
        }
        let lambda = lambda.ok_or_else(|| Error::Config("model file has no lambda".into()))?;
        TransliterationModel::new(units, lambda, src, tgt).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Free-function form of [`TransliterationModel::pair_likelihood`].
pub fn pair_likelihood_tr(model: &TransliterationModel, src: &str, tgt: &str) -> f64 {
    model.pair_likelihood(src, tgt)
}

/// λ·p_tr / (λ·p_tr + (1 − λ)·p_ntr) from the two log likelihoods.
pub(crate) fn posterior(lambda: f64, ln_tr: f64, ln_ntr: f64) -> f64 {
    let a = lambda.ln() + ln_tr;
    let b = (1.0 - lambda).ln() + ln_ntr;
    if a == f64::NEG_INFINITY {
        return 0.0;
    }
    if b == f64::NEG_INFINITY {
        return 1.0;
    }
    1.0 / (1.0 + (b - a).exp())
}

/// ln(λ·p_tr + (1 − λ)·p_ntr).
pub(crate) fn ln_mixture(lambda: f64, ln_tr: f64, ln_ntr: f64) -> f64 {
    let a = lambda.ln() + ln_tr;
    let b = (1.0 - lambda).ln() + ln_ntr;
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}
