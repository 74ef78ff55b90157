use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use super::io::open_maybe_gzip;
use super::row::{join_fields, numbers, split_fields, Number};
use crate::error::{Error, Result};

/// Orientation classes per block (monotone, swap, discontinuous).
pub const DEFAULT_BLOCK_SIZE: usize = 3;

const BLOCK_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ReorderingRow {
    pub src: String,
    pub tgt: String,
    probs: Vec<Number>,
    extra: Vec<String>,
}

impl ReorderingRow {
    /// Parses `src ||| tgt ||| p1 … pk`, checking that each block of
    /// `block_size` probabilities sums to one.
    pub fn parse(line: &str, lineno: usize, block_size: usize) -> Result<Self> {
        let f = split_fields(line, 3, lineno)?;
        let phrase = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
        let (src, tgt) = (phrase(f[0]), phrase(f[1]));
        if src.is_empty() || tgt.is_empty() {
            return Err(Error::parse(lineno, "empty phrase"));
        }
        let probs = numbers(f[2], lineno, "probability", |v| v > 0.0)?;
        if probs.is_empty() || probs.len() % block_size != 0 {
            return Err(Error::parse(
                lineno,
                format!("{} probabilities do not form blocks of {block_size}", probs.len()),
            ));
        }
        for (b, block) in probs.chunks(block_size).enumerate() {
            let sum: f64 = block.iter().map(Number::value).sum();
            if (sum - 1.0).abs() > BLOCK_SUM_TOL {
                return Err(Error::parse(lineno, format!("orientation block {} sums to {sum}", b + 1)));
            }
        }
        Ok(ReorderingRow {
            src,
            tgt,
            probs,
            extra: f[3..].iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn probs(&self) -> &[Number] {
        &self.probs
    }

    pub fn serialize(&self) -> String {
        let probs = self.probs.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
        let mut fields = vec![self.src.clone(), self.tgt.clone(), probs];
        fields.extend(self.extra.iter().cloned());
        join_fields(&fields)
    }
}

impl fmt::Display for ReorderingRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// A lexicalized reordering table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReorderingTable {
    arity: usize,
    block_size: usize,
    rows: Vec<ReorderingRow>,
}

impl ReorderingTable {
    pub fn read<R: BufRead>(reader: R, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::arg("block size must be positive"));
        }
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        let mut arity = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = ReorderingRow::parse(&line, i + 1, block_size)?;
            let n = *arity.get_or_insert(row.probs.len());
            if row.probs.len() != n {
                return Err(Error::parse(i + 1, format!("{} probabilities, expected {n}", row.probs.len())));
            }
            if !seen.insert((row.src.clone(), row.tgt.clone())) {
                return Err(Error::parse(i + 1, "duplicate phrase pair"));
            }
            rows.push(row);
        }
        Ok(ReorderingTable {
            arity: arity.unwrap_or(0),
            block_size,
            rows,
        })
    }

    pub fn read_path(path: &Path, block_size: usize) -> Result<Self> {
        Self::read(open_maybe_gzip(path)?, block_size)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(out, "{}", r.serialize())?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("rows are UTF-8")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn rows(&self) -> &[ReorderingRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Union of both tables by (src, tgt); in-domain rows win. Output is in
/// canonical order.
pub fn reordering_merge(rt_in: &ReorderingTable, rt_out: &ReorderingTable) -> Result<ReorderingTable> {
    let arity = match (rt_in.is_empty(), rt_out.is_empty()) {
        (true, _) => rt_out.arity,
        (_, true) => rt_in.arity,
        _ if rt_in.arity == rt_out.arity => rt_in.arity,
        _ => {
            return Err(Error::arg(format!(
                "reordering tables have {} and {} probabilities per row",
                rt_in.arity, rt_out.arity
            )))
        }
    };
    let known: HashSet<(&str, &str)> = rt_in.rows.iter().map(|r| (r.src.as_str(), r.tgt.as_str())).collect();
    let mut rows: Vec<ReorderingRow> = rt_in
        .rows
        .iter()
        .chain(rt_out.rows.iter().filter(|r| !known.contains(&(r.src.as_str(), r.tgt.as_str()))))
        .cloned()
        .collect();
    rows.sort_by(|a, b| a.src.as_bytes().cmp(b.src.as_bytes()).then_with(|| a.tgt.as_bytes().cmp(b.tgt.as_bytes())));
    Ok(ReorderingTable {
        arity,
        block_size: rt_in.block_size,
        rows,
    })
}
