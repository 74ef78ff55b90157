use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use super::io::open_maybe_gzip;
use super::row::PhraseTableRow;
use crate::error::{Error, Result};

/// Rows with a common feature count and unique (src, tgt) pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhraseTable {
    feature_count: usize,
    rows: Vec<PhraseTableRow>,
}

impl PhraseTable {
    /// Checks the table invariants. An empty table has feature count 0.
    pub fn new(rows: Vec<PhraseTableRow>) -> Result<Self> {
        let feature_count = rows.first().map_or(0, |r| r.features().len());
        let mut seen = HashSet::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.features().len() != feature_count {
                return Err(Error::arg(format!(
                    "row {} has {} features, expected {feature_count}",
                    i + 1,
                    r.features().len()
                )));
            }
            if !seen.insert((r.src.as_str(), r.tgt.as_str())) {
                return Err(Error::arg(format!("duplicate phrase pair {:?} ||| {:?}", r.src, r.tgt)));
            }
        }
        Ok(PhraseTable { feature_count, rows })
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows = Vec::new();
        let mut seen: HashSet<(String, String)> = HashSet::new();
        let mut feature_count = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = PhraseTableRow::parse(&line, i + 1)?;
            let n = *feature_count.get_or_insert(row.features().len());
            if row.features().len() != n {
                return Err(Error::parse(
                    i + 1,
                    format!("row has {} features, expected {n}", row.features().len()),
                ));
            }
            if !seen.insert((row.src.clone(), row.tgt.clone())) {
                return Err(Error::parse(i + 1, "duplicate phrase pair"));
            }
            rows.push(row);
        }
        Ok(PhraseTable {
            feature_count: feature_count.unwrap_or(0),
            rows,
        })
    }

    /// Reads a table file, gzip-compressed or not.
    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read(open_maybe_gzip(path)?)
    }

    /// Writes the rows in their current order, one per line.
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

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn rows(&self) -> &[PhraseTableRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct source phrases.
    pub fn sources(&self) -> HashSet<&str> {
        self.rows.iter().map(|r| r.src.as_str()).collect()
    }

    /// Sorts rows by source, then target, bytewise.
    pub fn sort_canonical(&mut self) {
        self.rows
            .sort_by(|a, b| a.src.as_bytes().cmp(b.src.as_bytes()).then_with(|| a.tgt.as_bytes().cmp(b.tgt.as_bytes())));
    }

    pub(crate) fn from_parts(feature_count: usize, rows: Vec<PhraseTableRow>) -> Self {
        let mut t = PhraseTable { feature_count, rows };
        t.sort_canonical();
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_write_roundtrip() {
        let text = "b ||| y ||| 0.5 ||| 0-0\na c ||| x ||| 0.25 ||| 1-0 ||| 2 1 1\n";
        let t = PhraseTable::read(text.as_bytes()).unwrap();
        assert_eq!(t.feature_count(), 1);
        assert_eq!(t.to_text(), text);
        let mut sorted = t.clone();
        sorted.sort_canonical();
        assert_eq!(sorted.rows()[0].src, "a c");
    }

    #[test]
    fn invariants() {
        let mixed = "a ||| x ||| 0.5\nb ||| y ||| 0.5 0.5\n";
        assert!(matches!(PhraseTable::read(mixed.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let dup = "a ||| x ||| 0.5\na ||| x ||| 0.7\n";
        assert!(matches!(PhraseTable::read(dup.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let rows = PhraseTable::read("a ||| x ||| 0.5\n".as_bytes()).unwrap().rows().to_vec();
        assert!(PhraseTable::new([rows.clone(), rows].concat()).is_err());
        assert_eq!(PhraseTable::read("".as_bytes()).unwrap().feature_count(), 0);
    }
}
