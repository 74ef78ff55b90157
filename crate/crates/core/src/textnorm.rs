//! Cleaning and normalization of informal Arabic/English text.
//!
//! Everything here is a pure function over [`Sentence`] values or single
//! words. Patterns are compiled once into [`EmoticonPatterns`] and
//! [`TagPatterns`]; character rewrite rules live in a [`RewriteRuleSet`].

use std::fmt;
use std::io::BufRead;

use regex::Regex;

use crate::error::{Error, Result};

/// A whitespace-tokenized sentence. Tokens are never empty and never
/// contain whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    /// Splits a line on Unicode whitespace.
    pub fn from_line(line: &str) -> Self {
        Sentence {
            tokens: line.split_whitespace().map(str::to_owned).collect(),
        }
    }

    /// Builds a sentence from tokens, dropping empty ones.
    ///
    /// Tokens containing whitespace are split, so the invariant holds for
    /// any input.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Sentence {
            tokens: tokens
                .into_iter()
                .flat_map(|t| {
                    t.as_ref()
                        .split_whitespace()
                        .map(str::to_owned)
                        .collect::<Vec<_>>()
                })
                .collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Maps every token through `f`, dropping tokens that become empty.
    pub fn map_tokens<F>(&self, mut f: F) -> Sentence
    where
        F: FnMut(&str) -> String,
    {
        Sentence::from_tokens(self.tokens.iter().map(|t| f(t)))
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

impl From<&str> for Sentence {
    fn from(line: &str) -> Self {
        Sentence::from_line(line)
    }
}

/// Reads a corpus: one sentence per line, whitespace-separated tokens.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<Sentence>> {
    reader
        .lines()
        .map(|l| Ok(Sentence::from_line(&l?)))
        .collect()
}

const TATWEEL: char = '\u{0640}';
const ALEF: char = '\u{0627}';
const ALEF_MAKSURA: char = '\u{0649}';
const YEH: char = '\u{064A}';

fn is_arabic_letter(c: char) -> bool {
    ('\u{0621}'..='\u{064A}').contains(&c) && c != TATWEEL
}

/// Switches for [`normalize_arabic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeOptions {
    pub strip_tatweel: bool,
    pub collapse_elongation: bool,
    pub normalize_alef_ya: bool,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            strip_tatweel: true,
            collapse_elongation: true,
            normalize_alef_ya: false,
        }
    }
}

impl NormalizeOptions {
    pub fn all() -> Self {
        NormalizeOptions {
            strip_tatweel: true,
            collapse_elongation: true,
            normalize_alef_ya: true,
        }
    }
}

/// Runs of this many identical Arabic letters or more are collapsed to one.
pub const ELONGATION_RUN: usize = 3;

/// Normalizes a single word. Steps run in a fixed order (tatweel, alef/ya,
/// elongation) so that the result is a fixed point of the function.
pub fn normalize_arabic_word(word: &str, opts: NormalizeOptions) -> String {
    let mut chars: Vec<char> = word
        .chars()
        .filter(|&c| !(opts.strip_tatweel && c == TATWEEL))
        .collect();

    if opts.normalize_alef_ya {
        for c in chars.iter_mut() {
            if matches!(*c, '\u{0623}' | '\u{0625}' | '\u{0622}') {
                *c = ALEF;
            }
        }
        if chars.last() == Some(&ALEF_MAKSURA) {
            *chars.last_mut().unwrap() = YEH;
        }
    }

    if !opts.collapse_elongation {
        return chars.into_iter().collect();
    }

    let mut out = String::with_capacity(word.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut j = i + 1;
        while j < chars.len() && chars[j] == c {
            j += 1;
        }
        let run = j - i;
        if is_arabic_letter(c) && run >= ELONGATION_RUN {
            out.push(c);
        } else {
            out.extend(std::iter::repeat_n(c, run));
        }
        i = j;
    }
    out
}

/// Applies [`normalize_arabic_word`] to every token; tokens that become
/// empty are dropped.
pub fn normalize_arabic(s: &Sentence, opts: NormalizeOptions) -> Sentence {
    s.map_tokens(|t| normalize_arabic_word(t, opts))
}

/// Reserved prefix of emoticon placeholders.
pub const EMOTICON_SENTINEL: &str = "⟦EMO";
const SENTINEL_CLOSE: char = '⟧';

/// A compiled set of emoticon patterns, matched as one alternation.
#[derive(Debug, Clone)]
pub struct EmoticonPatterns {
    re: Regex,
}

impl EmoticonPatterns {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::Config("no emoticon patterns given".into()));
        }
        for p in patterns {
            Regex::new(p.as_ref())
                .map_err(|e| Error::Config(format!("bad emoticon pattern {:?}: {e}", p.as_ref())))?;
        }
        let joined = patterns
            .iter()
            .map(|p| format!("(?:{})", p.as_ref()))
            .collect::<Vec<_>>()
            .join("|");
        let re = Regex::new(&joined).map_err(|e| Error::Config(e.to_string()))?;
        Ok(EmoticonPatterns { re })
    }

    /// Western-style smileys, hearts and a few common variants.
    pub fn default_set() -> Self {
        Self::new(&[
            r"[:;=8xX][\-o\*'^]?[\)\]\(\[dDpP/\\|@3\*oO]+",
            r"[\(\[][\-o\*'^]?[:;=8]",
            r"<3+",
            r"\^_*\^",
            r"[oO-]_[oO-]",
        ])
        .expect("built-in emoticon patterns compile")
    }
}

/// Placeholder-to-emoticon bindings for one sentence, in placeholder order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmoticonMap {
    placeholders: Vec<(String, String)>,
}

impl EmoticonMap {
    pub fn entries(&self) -> &[(String, String)] {
        &self.placeholders
    }

    pub fn len(&self) -> usize {
        self.placeholders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placeholders.is_empty()
    }
}

fn placeholder(n: usize) -> String {
    format!("{EMOTICON_SENTINEL}{n}{SENTINEL_CLOSE}")
}

/// Replaces every emoticon occurrence with a fresh placeholder token.
///
/// Matching is done inside tokens, so an emoticon glued to a word becomes a
/// placeholder glued to that word. Fails if the sentinel already occurs in
/// the input, since the roundtrip could not be exact.
pub fn protect_emoticons(s: &Sentence, patterns: &EmoticonPatterns) -> Result<(Sentence, EmoticonMap)> {
    let mut map = EmoticonMap::default();
    let mut tokens = Vec::with_capacity(s.len());
    for tok in s.iter() {
        if tok.contains(EMOTICON_SENTINEL) {
            return Err(Error::arg(format!(
                "input token {tok:?} contains the reserved placeholder prefix"
            )));
        }
        let mut out = String::with_capacity(tok.len());
        let mut last = 0;
        for m in patterns.re.find_iter(tok) {
            if m.as_str().is_empty() {
                continue;
            }
            out.push_str(&tok[last..m.start()]);
            let ph = placeholder(map.placeholders.len());
            out.push_str(&ph);
            map.placeholders.push((ph, m.as_str().to_owned()));
            last = m.end();
        }
        out.push_str(&tok[last..]);
        tokens.push(out);
    }
    Ok((Sentence { tokens }, map))
}

/// Inverse of [`protect_emoticons`].
pub fn restore_emoticons(s: &Sentence, map: &EmoticonMap) -> Sentence {
    if map.is_empty() {
        return s.clone();
    }
    s.map_tokens(|tok| {
        if !tok.contains(EMOTICON_SENTINEL) {
            return tok.to_owned();
        }
        let mut out = tok.to_owned();
        for (ph, orig) in &map.placeholders {
            if out.contains(ph.as_str()) {
                out = out.replacen(ph.as_str(), orig, 1);
            }
        }
        out
    })
}

/// Whole-token patterns for speech and annotation markup.
#[derive(Debug, Clone)]
pub struct TagPatterns {
    res: Vec<Regex>,
}

impl TagPatterns {
    pub fn new<S: AsRef<str>>(patterns: &[S]) -> Result<Self> {
        let res = patterns
            .iter()
            .map(|p| {
                Regex::new(&format!("^(?:{})$", p.as_ref()))
                    .map_err(|e| Error::Config(format!("bad tag pattern {:?}: {e}", p.as_ref())))
            })
            .collect::<Result<_>>()?;
        Ok(TagPatterns { res })
    }

    fn matches(&self, tok: &str) -> bool {
        self.res.iter().any(|re| re.is_match(tok))
    }
}

/// Drops every token that fully matches one of the tag patterns.
pub fn strip_markup(s: &Sentence, tags: &TagPatterns) -> Sentence {
    Sentence {
        tokens: s.iter().filter(|t| !tags.matches(t)).map(str::to_owned).collect(),
    }
}

/// Keeps the first of several alternative translations on a line.
///
/// An empty delimiter never matches.
pub fn select_intended(line: &str, delimiter: &str) -> String {
    if delimiter.is_empty() {
        return line.trim().to_owned();
    }
    match line.find(delimiter) {
        Some(pos) => line[..pos].trim().to_owned(),
        None => line.trim().to_owned(),
    }
}

/// A single character rewrite rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub pattern: String,
    pub replacement: String,
    pub at_start: bool,
    pub at_end: bool,
}

impl RewriteRule {
    /// Parses a pattern with optional `^`/`$` anchors.
    pub fn new(pattern: &str, replacement: &str) -> Result<Self> {
        let (at_start, rest) = match pattern.strip_prefix('^') {
            Some(r) => (true, r),
            None => (false, pattern),
        };
        let (at_end, core) = match rest.strip_suffix('$') {
            Some(r) => (true, r),
            None => (false, rest),
        };
        if core.is_empty() {
            return Err(Error::Config(format!("empty rewrite pattern {pattern:?}")));
        }
        Ok(RewriteRule {
            pattern: core.to_owned(),
            replacement: replacement.to_owned(),
            at_start,
            at_end,
        })
    }

    /// One left-to-right, non-overlapping pass over `word`.
    fn apply(&self, word: &str) -> String {
        let pat = self.pattern.as_str();
        match (self.at_start, self.at_end) {
            (true, true) => {
                if word == pat {
                    self.replacement.clone()
                } else {
                    word.to_owned()
                }
            }
            (true, false) => match word.strip_prefix(pat) {
                Some(rest) => format!("{}{}", self.replacement, rest),
                None => word.to_owned(),
            },
            (false, true) => match word.strip_suffix(pat) {
                Some(rest) => format!("{}{}", rest, self.replacement),
                None => word.to_owned(),
            },
            (false, false) => word.replace(pat, &self.replacement),
        }
    }
}

/// Ordered rewrite rules; earlier rules have priority.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteRuleSet {
    rules: Vec<RewriteRule>,
}

impl RewriteRuleSet {
    pub fn new(rules: Vec<RewriteRule>) -> Self {
        RewriteRuleSet { rules }
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Reads `pattern<TAB>replacement` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut rules = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (pat, rep) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected pattern<TAB>replacement"))?;
            if rep.contains('\t') {
                return Err(Error::parse(i + 1, "too many fields"));
            }
            let rule = RewriteRule::new(pat, rep).map_err(|e| Error::parse(i + 1, e.to_string()))?;
            rules.push(rule);
        }
        Ok(RewriteRuleSet { rules })
    }
}

/// Applies every rule once, in priority order, each rule seeing the output
/// of the previous one.
pub fn apply_char_rules(word: &str, rules: &RewriteRuleSet) -> String {
    rules
        .rules
        .iter()
        .fold(word.to_owned(), |w, rule| rule.apply(&w))
}
