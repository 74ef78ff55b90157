//! Sentence-length densities and length filtering of tuning bitexts.

use std::io::Write;

use crate::error::{Error, Result};
use crate::textnorm::Sentence;

pub const DEFAULT_BANDWIDTH: f64 = 0.3;
pub const DEFAULT_GRID: usize = 512;

/// A Gaussian kernel density estimate sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthDensity {
    points: Vec<(f64, f64)>,
    bandwidth: f64,
}

impl LengthDensity {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    /// Grid point with the highest density (first one on ties).
    pub fn mode(&self) -> f64 {
        let mut best = self.points[0];
        for &p in &self.points[1..] {
            if p.1 > best.1 {
                best = p;
            }
        }
        best.0
    }

    /// Writes `length,density` CSV with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "length,density")?;
        for (x, d) in &self.points {
            writeln!(out, "{x},{d}")?;
        }
        Ok(())
    }
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Gaussian KDE of `lengths` evaluated at `grid` evenly spaced points
/// from `min − 3·bw` to `max + 3·bw`.
pub fn kde_lengths(lengths: &[usize], bandwidth: f64, grid: usize) -> Result<LengthDensity> {
    if lengths.is_empty() {
        return Err(Error::arg("no lengths to estimate from"));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::arg(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if grid < 2 {
        return Err(Error::arg(format!("grid needs at least 2 points, got {grid}")));
    }
    let lo = *lengths.iter().min().unwrap() as f64 - 3.0 * bandwidth;
    let hi = *lengths.iter().max().unwrap() as f64 + 3.0 * bandwidth;
    let step = (hi - lo) / (grid - 1) as f64;
    let norm = 1.0 / (lengths.len() as f64 * bandwidth);
    let points = (0..grid)
        .map(|i| {
            let x = if i == grid - 1 { hi } else { lo + i as f64 * step };
            let d: f64 = lengths.iter().map(|&l| std_normal_pdf((x - l as f64) / bandwidth)).sum();
            (x, d * norm)
        })
        .collect();
    Ok(LengthDensity { points, bandwidth })
}

/// Inclusive token-count bounds applied to both sides of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LengthFilterSpec {
    min_len: usize,
    max_len: usize,
}

impl Default for LengthFilterSpec {
    fn default() -> Self {
        LengthFilterSpec { min_len: 4, max_len: 25 }
    }
}

impl LengthFilterSpec {
    pub fn new(min_len: usize, max_len: usize) -> Result<Self> {
        if min_len < 1 || min_len > max_len {
            return Err(Error::arg(format!("need 1 <= min <= max, got {min_len}..{max_len}")));
        }
        Ok(LengthFilterSpec { min_len, max_len })
    }

    pub fn min_len(&self) -> usize {
        self.min_len
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn accepts(&self, len: usize) -> bool {
        (self.min_len..=self.max_len).contains(&len)
    }

    pub fn keeps(&self, src: &Sentence, tgt: &Sentence) -> bool {
        self.accepts(src.len()) && self.accepts(tgt.len())
    }
}

/// Pairs whose two sides both fall within the bounds, in input order.
pub fn filter_pairs(bitext: &[(Sentence, Sentence)], spec: LengthFilterSpec) -> Vec<(Sentence, Sentence)> {
    bitext.iter().filter(|(s, t)| spec.keeps(s, t)).cloned().collect()
}

/// [`filter_pairs`] on two parallel sides, which must have equal length.
pub fn filter_bitext(
    src: &[Sentence],
    tgt: &[Sentence],
    spec: LengthFilterSpec,
) -> Result<(Vec<Sentence>, Vec<Sentence>)> {
    if src.len() != tgt.len() {
        return Err(Error::arg(format!(
            "bitext sides differ: {} source vs {} target sentences",
            src.len(),
            tgt.len()
        )));
    }
    Ok(src
        .iter()
        .zip(tgt)
        .filter(|(s, t)| spec.keeps(s, t))
        .map(|(s, t)| (s.clone(), t.clone()))
        .unzip())
}
