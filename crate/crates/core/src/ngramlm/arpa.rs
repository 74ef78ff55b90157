//! ARPA backoff model text format.
//!
//! ```text
//! \data\
//! ngram 1=N1
//! ngram 2=N2
//!
//! \1-grams:
//! logprob<TAB>w<TAB>backoff
//! ...
//! \end\
//! ```
//!
//! Values are written with round-trip precision. The reader is strict:
//! section counts must match, sections must appear in order, every
//! n-gram word must have a unigram and every proper prefix of a stored
//! n-gram must itself be stored.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use super::model::{Entry, NGramModel, Table};
use super::vocab::{Vocab, WordId};
use crate::error::{Error, Result};

/// Writes `model` in ARPA format. Entries are sorted by their words so the
/// output is byte-stable.
pub fn write_arpa<W: Write>(model: &NGramModel, mut out: W) -> io::Result<()> {
    writeln!(out, "\\data\\")?;
    for k in 1..=model.order() {
        writeln!(out, "ngram {k}={}", model.ngram_count(k))?;
    }
    for k in 1..=model.order() {
        writeln!(out)?;
        writeln!(out, "\\{k}-grams:")?;
        for (gram, e) in model.sorted_entries(k) {
            write!(out, "{}\t{}", e.logprob, gram.join(" "))?;
            if k < model.order() {
                if let Some(b) = e.backoff {
                    write!(out, "\t{b}")?;
                }
            }
            writeln!(out)?;
        }
    }
    writeln!(out)?;
    writeln!(out, "\\end\\")?;
    Ok(())
}

/// Serializes to a string.
pub fn to_arpa_string(model: &NGramModel) -> String {
    let mut buf = Vec::new();
    write_arpa(model, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ARPA output is UTF-8")
}

enum State {
    Preamble,
    Header,
    Section(usize),
    Done,
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value {s:?}")));
    }
    Ok(v)
}

/// Reads an ARPA model.
pub fn read_arpa<R: BufRead>(reader: R) -> Result<NGramModel> {
    let mut state = State::Preamble;
    let mut declared: Vec<usize> = Vec::new();
    let mut vocab = Vocab::new();
    let mut tables: Vec<Table> = Vec::new();
    let mut last_line = 0;

    let check_section_count = |tables: &[Table], declared: &[usize], k: usize, line: usize| {
        if tables[k - 1].len() != declared[k - 1] {
            return Err(Error::parse(
                line,
                format!(
                    "\\data\\ declares {} {k}-grams but section has {}",
                    declared[k - 1],
                    tables[k - 1].len()
                ),
            ));
        }
        Ok(())
    };

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = line?;
        let trimmed = line.trim();
        match state {
            State::Preamble => {
                if trimmed == "\\data\\" {
                    state = State::Header;
                }
            }
            State::Header => {
                if trimmed.is_empty() {
                    continue;
                }
                if let Some(rest) = trimmed.strip_prefix("ngram ") {
                    let (k, n) = rest
                        .split_once('=')
                        .ok_or_else(|| Error::parse(lineno, "expected `ngram k=N`"))?;
                    let k: usize = k
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(lineno, "bad n-gram order"))?;
                    let n: usize = n
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(lineno, "bad n-gram count"))?;
                    if k != declared.len() + 1 {
                        return Err(Error::parse(lineno, format!("expected order {}", declared.len() + 1)));
                    }
                    declared.push(n);
                } else if trimmed == "\\1-grams:" {
                    if declared.is_empty() {
                        return Err(Error::parse(lineno, "no `ngram k=N` lines in header"));
                    }
                    tables = vec![HashMap::new(); declared.len()];
                    state = State::Section(1);
                } else {
                    return Err(Error::parse(lineno, format!("unexpected header line {trimmed:?}")));
                }
            }
            State::Section(k) => {
                if trimmed.is_empty() {
                    continue;
                }
                if trimmed.starts_with('\\') {
                    check_section_count(&tables, &declared, k, lineno)?;
                    if trimmed == "\\end\\" {
                        if k != declared.len() {
                            return Err(Error::parse(lineno, format!("missing \\{}-grams: section", k + 1)));
                        }
                        state = State::Done;
                    } else if trimmed == format!("\\{}-grams:", k + 1) && k < declared.len() {
                        state = State::Section(k + 1);
                    } else {
                        return Err(Error::parse(lineno, format!("unexpected section marker {trimmed:?}")));
                    }
                    continue;
                }
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                let max_order = declared.len();
                let has_backoff = match fields.len() {
                    n if n == k + 1 => false,
                    n if n == k + 2 && k < max_order => true,
                    _ => {
                        return Err(Error::parse(
                            lineno,
                            format!("expected {k} words in {k}-gram entry, got {} fields", fields.len()),
                        ))
                    }
                };
                let logprob = parse_f64(fields[0], lineno)?;
                if logprob > 0.0 {
                    return Err(Error::parse(lineno, "positive log probability"));
                }
                let backoff = if has_backoff {
                    Some(parse_f64(fields[k + 1], lineno)?)
                } else {
                    None
                };
                let ids: Vec<WordId> = if k == 1 {
                    vec![vocab.insert(fields[1])]
                } else {
                    fields[1..=k]
                        .iter()
                        .map(|w| {
                            vocab
                                .get(w)
                                .filter(|id| tables[0].contains_key([*id].as_slice()))
                                .ok_or_else(|| Error::parse(lineno, format!("word {w:?} has no unigram entry")))
                        })
                        .collect::<Result<_>>()?
                };
                if k > 1 && !tables[k - 2].contains_key(&ids[..k - 1]) {
                    return Err(Error::parse(lineno, "n-gram prefix is not stored at the lower order"));
                }
                if tables[k - 1]
                    .insert(ids.into_boxed_slice(), Entry { logprob, backoff })
                    .is_some()
                {
                    return Err(Error::parse(lineno, "duplicate n-gram"));
                }
            }
            State::Done => {
                if !trimmed.is_empty() {
                    return Err(Error::parse(lineno, "content after \\end\\"));
                }
            }
        }
    }

    match state {
        State::Done => {}
        State::Preamble => return Err(Error::parse(last_line, "missing \\data\\ header")),
        _ => return Err(Error::parse(last_line, "missing \\end\\ marker")),
    }

    Ok(NGramModel::from_parts(declared.len(), vocab, tables))
}

#[cfg(test)]
mod tests {
    #![allow(clippy::approx_constant)]

    use super::*;

    const TINY: &str = "\\data\\
ngram 1=3

\\1-grams:
-0.30103\ta
-0.30103\t</s>
-99\t<s>

\\end\\
";

    #[test]
    fn hand_written_unigram_model() {
        let m = read_arpa(TINY.as_bytes()).unwrap();
        assert_eq!(m.order(), 1);
        assert_eq!(m.ngram_count(1), 3);
        assert_eq!(m.entry(&["a"]).unwrap(), Entry { logprob: -0.30103, backoff: None });
        assert_eq!(m.entry(&["</s>"]).unwrap().logprob, -0.30103);
        assert_eq!(m.entry(&["<s>"]).unwrap().logprob, -99.0);
        assert!(m.entry(&["<unk>"]).is_none());
        assert_eq!(m.predictive_vocab(), vec!["</s>", "a"]);
    }

    #[test]
    fn wrong_count_reports_line() {
        let bad = TINY.replace("ngram 1=3", "ngram 1=4");
        match read_arpa(bad.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 9, "{message}");
                assert!(message.contains("declares 4"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn grammar_violations() {
        let cases = [
            ("no data header", "\\1-grams:\n-1\ta\n\\end\\\n"),
            ("missing end", "\\data\\\nngram 1=1\n\n\\1-grams:\n-1\ta\n"),
            ("bad number", "\\data\\\nngram 1=1\n\n\\1-grams:\nx\ta\n\n\\end\\\n"),
            ("positive prob", "\\data\\\nngram 1=1\n\n\\1-grams:\n0.5\ta\n\n\\end\\\n"),
            (
                "backoff at top order",
                "\\data\\\nngram 1=1\n\n\\1-grams:\n-1\ta\t-0.5\n\n\\end\\\n",
            ),
            (
                "unknown word in bigram",
                "\\data\\\nngram 1=1\nngram 2=1\n\n\\1-grams:\n-1\ta\t0\n\n\\2-grams:\n-1\ta b\n\n\\end\\\n",
            ),
            (
                "missing prefix",
                "\\data\\\nngram 1=2\nngram 2=0\nngram 3=1\n\n\\1-grams:\n-1\ta\t0\n-1\tb\t0\n\n\\2-grams:\n\n\\3-grams:\n-1\ta b a\n\n\\end\\\n",
            ),
            (
                "duplicate",
                "\\data\\\nngram 1=2\n\n\\1-grams:\n-1\ta\n-1\ta\n\n\\end\\\n",
            ),
            (
                "skipped section",
                "\\data\\\nngram 1=1\nngram 2=0\n\n\\1-grams:\n-1\ta\n\n\\end\\\n",
            ),
            ("trailing junk", "\\data\\\nngram 1=1\n\n\\1-grams:\n-1\ta\n\n\\end\\\nmore\n"),
        ];
        for (name, text) in cases {
            assert!(
                matches!(read_arpa(text.as_bytes()), Err(Error::Parse { .. })),
                "{name} should fail"
            );
        }
    }

    #[test]
    fn preamble_text_is_ignored() {
        let text = format!("written by some toolkit\n\n{TINY}");
        assert_eq!(read_arpa(text.as_bytes()).unwrap().ngram_count(1), 3);
    }

    #[test]
    fn writer_omits_top_order_backoff() {
        let m = read_arpa(TINY.as_bytes()).unwrap();
        let text = to_arpa_string(&m);
        assert_eq!(
            text,
            "\\data\\\nngram 1=3\n\n\\1-grams:\n-0.30103\t</s>\n-99\t<s>\n-0.30103\ta\n\n\\end\\\n"
        );
    }
}
