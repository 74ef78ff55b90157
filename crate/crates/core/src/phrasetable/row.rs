use std::fmt;

use crate::error::{Error, Result};

/// A number as it appeared in the file. Rows write back the original
/// spelling so that reading and writing a table is byte-exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Number {
    value: f64,
    text: String,
}

impl Number {
    pub fn parse(text: &str) -> Option<Number> {
        let value: f64 = text.parse().ok()?;
        Some(Number {
            value,
            text: text.to_owned(),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl From<f64> for Number {
    fn from(value: f64) -> Self {
        Number {
            value,
            text: value.to_string(),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Joins fields Moses-style: ` ||| ` between fields, with an empty field
/// written as nothing (so `a ||| ||| b`).
pub fn join_fields<S: AsRef<str>>(fields: &[S]) -> String {
    let mut out = String::new();
    for (i, f) in fields.iter().enumerate() {
        let f = f.as_ref();
        if i > 0 {
            out.push_str(" |||");
            if !f.is_empty() {
                out.push(' ');
            }
        }
        out.push_str(f);
    }
    out
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn phrase(field: &str, what: &str, line: usize) -> Result<String> {
    let toks: Vec<&str> = field.split_whitespace().collect();
    if toks.is_empty() {
        return Err(Error::parse(line, format!("empty {what} phrase")));
    }
    Ok(toks.join(" "))
}

/// Parses a whitespace-separated list of numbers, each checked by `ok`.
pub(crate) fn numbers(field: &str, line: usize, what: &str, ok: impl Fn(f64) -> bool) -> Result<Vec<Number>> {
    field
        .split_whitespace()
        .map(|t| match Number::parse(t) {
            Some(n) if n.value.is_finite() && ok(n.value) => Ok(n),
            Some(_) => Err(Error::parse(line, format!("{what} {t:?} is out of range"))),
            None => Err(Error::parse(line, format!("invalid {what} {t:?}"))),
        })
        .collect()
}

/// Splits a line into trimmed `|||` fields, requiring at least `min`.
pub(crate) fn split_fields(line: &str, min: usize, lineno: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
    if fields.len() < min {
        return Err(Error::parse(
            lineno,
            format!("expected at least {min} ' ||| '-separated fields, got {}", fields.len()),
        ));
    }
    Ok(fields)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhraseTableRow {
    /// Source phrase, tokens joined by single spaces.
    pub src: String,
    pub tgt: String,
    features: Vec<Number>,
    /// `None` when the field is absent; `Some(vec![])` when present but
    /// empty.
    alignment: Option<Vec<(u32, u32)>>,
    counts: Option<Vec<Number>>,
    /// Fields after the counts, verbatim.
    extra: Vec<String>,
}

impl PhraseTableRow {
    /// A row with only the three required fields.
    pub fn new(src: &str, tgt: &str, features: Vec<Number>) -> Result<Self> {
        let line = join_fields(&[src.to_owned(), tgt.to_owned(), join(&features)]);
        Self::parse(&line, 0)
    }

    /// Parses one table line; `lineno` is used in error messages.
    pub fn parse(line: &str, lineno: usize) -> Result<Self> {
        let f = split_fields(line, 3, lineno)?;
        let src = phrase(f[0], "source", lineno)?;
        let tgt = phrase(f[1], "target", lineno)?;
        let features = numbers(f[2], lineno, "feature", |v| v > 0.0)?;
        if features.is_empty() {
            return Err(Error::parse(lineno, "row has no features"));
        }
        let alignment = match f.get(3) {
            None => None,
            Some(a) => {
                let (ns, nt) = (src.split(' ').count() as u32, tgt.split(' ').count() as u32);
                let pairs = a
                    .split_whitespace()
                    .map(|p| {
                        let (i, j) = p
                            .split_once('-')
                            .and_then(|(i, j)| Some((i.parse::<u32>().ok()?, j.parse::<u32>().ok()?)))
                            .ok_or_else(|| Error::parse(lineno, format!("invalid alignment point {p:?}")))?;
                        if i >= ns || j >= nt {
                            return Err(Error::parse(lineno, format!("alignment point {p:?} outside the phrase pair")));
                        }
                        Ok((i, j))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(pairs)
            }
        };
        let counts = match f.get(4) {
            None => None,
            Some(c) => {
                let c = numbers(c, lineno, "count", |v| v >= 0.0)?;
                if !c.is_empty() && !(2..=3).contains(&c.len()) {
                    return Err(Error::parse(lineno, format!("expected 2 or 3 counts, got {}", c.len())));
                }
                Some(c)
            }
        };
        Ok(PhraseTableRow {
            src,
            tgt,
            features,
            alignment,
            counts,
            extra: f.iter().skip(5).map(|s| s.to_string()).collect(),
        })
    }

    pub fn features(&self) -> &[Number] {
        &self.features
    }

    pub fn feature_values(&self) -> Vec<f64> {
        self.features.iter().map(Number::value).collect()
    }

    pub fn alignment(&self) -> Option<&[(u32, u32)]> {
        self.alignment.as_deref()
    }

    pub fn counts(&self) -> Option<&[Number]> {
        self.counts.as_deref()
    }

    pub fn extra(&self) -> &[String] {
        &self.extra
    }

    pub fn src_tokens(&self) -> impl Iterator<Item = &str> {
        self.src.split(' ')
    }

    pub fn tgt_tokens(&self) -> impl Iterator<Item = &str> {
        self.tgt.split(' ')
    }

    /// Copy with `more` appended to the features.
    pub fn with_extra_features(&self, more: &[Number]) -> Self {
        let mut row = self.clone();
        row.features.extend_from_slice(more);
        row
    }

    /// Copy with the last `n` features removed.
    pub fn without_last_features(&self, n: usize) -> Self {
        let mut row = self.clone();
        row.features.truncate(row.features.len().saturating_sub(n));
        row
    }

    /// Canonical single-line form.
    pub fn serialize(&self) -> String {
        let mut fields = vec![self.src.clone(), self.tgt.clone(), join(&self.features)];
        let tail = [
            self.alignment
                .as_ref()
                .map(|a| a.iter().map(|(i, j)| format!("{i}-{j}")).collect::<Vec<_>>().join(" ")),
            self.counts.as_ref().map(|c| join(c)),
        ];
        let n_tail = if self.extra.is_empty() {
            tail.iter().rposition(Option::is_some).map_or(0, |i| i + 1)
        } else {
            2
        };
        fields.extend(tail.into_iter().take(n_tail).map(Option::unwrap_or_default));
        fields.extend(self.extra.iter().cloned());
        join_fields(&fields)
    }
}

impl fmt::Display for PhraseTableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[cfg(test)]
mod tests {
    #![allow(clippy::approx_constant)]

    use super::*;

    #[test]
    fn structured_fields() {
        let line = "a b ||| x ||| 0.5 0.2 0.5 0.2 2.718 ||| 0-0 1-0 ||| 3 2 2";
        let r = PhraseTableRow::parse(line, 1).unwrap();
        assert_eq!(r.src, "a b");
        assert_eq!(r.tgt, "x");
        assert_eq!(r.feature_values(), vec![0.5, 0.2, 0.5, 0.2, 2.718]);
        assert_eq!(r.alignment(), Some(&[(0, 0), (1, 0)][..]));
        assert_eq!(r.counts().unwrap().len(), 3);
        assert_eq!(r.serialize(), line);
    }

    #[test]
    fn moses_trailing_empty_fields() {
        for line in [
            "der ||| the ||| 0.3 0.2 0.4 0.1 ||| 0-0 ||| 10 12 8 ||| |||",
            "a ||| b ||| 1 ||| ||| 1 1",
            "a ||| b ||| 1e-05 0.25",
            "a ||| b ||| 1 ||| 0-0",
            "a ||| b ||| 1 |||",
        ] {
            assert_eq!(PhraseTableRow::parse(line, 1).unwrap().serialize(), line);
        }
    }

    #[test]
    fn rejects_bad_rows() {
        for line in [
            "a ||| b",
            "a ||| b ||| 0.0",
            "a ||| b ||| -1",
            "a ||| b ||| x",
            "a ||| b ||| inf",
            "a ||| b |||",
            " ||| b ||| 1",
            "a ||| b ||| 1 ||| 1-0",
            "a ||| b ||| 1 ||| 0-x",
            "a ||| b ||| 1 ||| 0-0 ||| 1",
            "a ||| b ||| 1 ||| 0-0 ||| -1 1",
        ] {
            let err = PhraseTableRow::parse(line, 7).unwrap_err();
            assert!(matches!(err, Error::Parse { line: 7, .. }), "{line}: {err}");
        }
    }

    #[test]
    fn appended_features_strip_back() {
        let r = PhraseTableRow::parse("a ||| b ||| 0.50 0.25 ||| 0-0", 1).unwrap();
        let ext = r.with_extra_features(&[Number::from(1.0), Number::from(std::f64::consts::E)]);
        assert_eq!(ext.serialize(), "a ||| b ||| 0.50 0.25 1 2.718281828459045 ||| 0-0");
        assert_eq!(ext.without_last_features(2), r);
    }
}
