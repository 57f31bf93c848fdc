//! Letters, symbols, and nanophrases, together with the two-line text format
//!
//! ```text
//! letters: A:b+ B:b+ C:b+ D:b- E:a- F:a-
//! phrase: A B | C D B | D E A | F F C E
//! ```
//!
//! Components are separated by `|`, an empty component is written `.`, and a
//! bare `phrase:` is the phrase with no components. When every letter name is
//! a single character the compact form `phrase: AB|CDB|DEA|FFCE` is accepted too.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, PhraseError};
use crate::homotopy::HomotopyData;

/// An element of the finite set alpha that letters project to.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Symbol(String);

impl Symbol {
    pub fn new(name: impl Into<String>) -> Result<Self, PhraseError> {
        let name = name.into();
        if is_symbol_name(&name) {
            Ok(Self(name))
        } else {
            Err(PhraseError::InvalidProjection(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn is_symbol_name(s: &str) -> bool {
    !s.is_empty()
        && s != "_"
        && !s.contains("<->")
        && s
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, ':' | '|' | ',' | '(' | ')' | '#'))
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Symbol {
    type Error = PhraseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Symbol::new(s)
    }
}

impl From<Symbol> for String {
    fn from(s: Symbol) -> String {
        s.0
    }
}

/// A letter name: starts with an alphanumeric character, continues with
/// alphanumerics or `_`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Letter(String);

impl Letter {
    pub fn new(name: impl Into<String>) -> Result<Self, PhraseError> {
        let name = name.into();
        let mut chars = name.chars();
        let ok = chars.next().is_some_and(char::is_alphanumeric)
            && chars.all(|c| c.is_alphanumeric() || c == '_');
        if ok {
            Ok(Self(name))
        } else {
            Err(PhraseError::InvalidLetterName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Letter {
    type Error = PhraseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Letter::new(s)
    }
}

impl From<Letter> for String {
    fn from(l: Letter) -> String {
        l.0
    }
}

/// 1-based (component, position) of a letter occurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OccurrenceAddress {
    pub component: usize,
    pub position: usize,
}

impl OccurrenceAddress {
    pub fn new(component: usize, position: usize) -> Self {
        Self {
            component,
            position,
        }
    }
}

impl fmt::Display for OccurrenceAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.component, self.position)
    }
}

/// A Gauss phrase over an alphabet with a projection to alpha.
///
/// Values built through [`Nanophrase::new`] or the parser always satisfy the
/// Gauss condition and carry a projection for every letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Nanophrase {
    projection: BTreeMap<Letter, Symbol>,
    components: Vec<Vec<Letter>>,
}

/// Something wrong with a phrase, reported by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    GaussViolation { letter: Letter, count: usize },
    MissingProjection { letter: Letter },
    ProjectionViolation { letter: Letter, symbol: Symbol },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GaussViolation { letter, count } => {
                write!(f, "letter {letter} occurs {count} times")
            }
            Violation::MissingProjection { letter } => {
                write!(f, "letter {letter} has no projection")
            }
            Violation::ProjectionViolation { letter, symbol } => {
                write!(f, "letter {letter} projects to {symbol}, not in alpha")
            }
        }
    }
}

impl Nanophrase {
    pub fn new(
        projection: BTreeMap<Letter, Symbol>,
        components: Vec<Vec<Letter>>,
    ) -> Result<Self, PhraseError> {
        let p = Self {
            projection,
            components,
        };
        match p.structural_violations().into_iter().next() {
            None => Ok(p),
            Some(Violation::GaussViolation { letter, count }) => {
                Err(PhraseError::Gauss { letter, count })
            }
            Some(Violation::MissingProjection { letter }) => {
                Err(PhraseError::MissingProjection(letter))
            }
            Some(Violation::ProjectionViolation { letter, symbol }) => {
                Err(PhraseError::ProjectionOutsideAlpha { letter, symbol })
            }
        }
    }

    /// Builds a phrase without checking the Gauss condition. Intended for
    /// tooling that wants to report violations through [`validate`].
    pub fn from_parts_unchecked(
        projection: BTreeMap<Letter, Symbol>,
        components: Vec<Vec<Letter>>,
    ) -> Self {
        Self {
            projection,
            components,
        }
    }

    /// The phrase with no components.
    pub fn empty() -> Self {
        Self::from_parts_unchecked(BTreeMap::new(), Vec::new())
    }

    /// `n` empty components and no letters.
    pub fn with_empty_components(n: usize) -> Self {
        Self::from_parts_unchecked(BTreeMap::new(), vec![Vec::new(); n])
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<Letter>] {
        &self.components
    }

    /// Component `i`, 1-based.
    pub fn component(&self, i: usize) -> Option<&[Letter]> {
        i.checked_sub(1)
            .and_then(|k| self.components.get(k))
            .map(Vec::as_slice)
    }

    pub fn projections(&self) -> &BTreeMap<Letter, Symbol> {
        &self.projection
    }

    pub fn projection(&self, letter: &Letter) -> Option<&Symbol> {
        self.projection.get(letter)
    }

    pub fn letters(&self) -> impl Iterator<Item = &Letter> {
        self.projection.keys()
    }

    pub fn letter_count(&self) -> usize {
        self.projection.len()
    }

    /// Total number of letter occurrences (twice the letter count for valid phrases).
    pub fn len(&self) -> usize {
        self.components.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, addr: OccurrenceAddress) -> Option<&Letter> {
        self.component(addr.component)
            .and_then(|c| addr.position.checked_sub(1).and_then(|k| c.get(k)))
    }

    /// Occurrence addresses of `letter` in reading order.
    pub fn occurrences(&self, letter: &Letter) -> Vec<OccurrenceAddress> {
        let mut out = Vec::with_capacity(2);
        for (ci, comp) in self.components.iter().enumerate() {
            for (pi, l) in comp.iter().enumerate() {
                if l == letter {
                    out.push(OccurrenceAddress::new(ci + 1, pi + 1));
                }
            }
        }
        out
    }

    pub(crate) fn into_parts(self) -> (BTreeMap<Letter, Symbol>, Vec<Vec<Letter>>) {
        (self.projection, self.components)
    }

    fn structural_violations(&self) -> Vec<Violation> {
        let mut counts: BTreeMap<&Letter, usize> = BTreeMap::new();
        for l in self.components.iter().flatten() {
            *counts.entry(l).or_default() += 1;
        }
        let mut out = Vec::new();
        for (l, &count) in &counts {
            if !self.projection.contains_key(*l) {
                out.push(Violation::MissingProjection {
                    letter: (*l).clone(),
                });
            } else if count != 2 {
                out.push(Violation::GaussViolation {
                    letter: (*l).clone(),
                    count,
                });
            }
        }
        for l in self.projection.keys() {
            if !counts.contains_key(l) {
                out.push(Violation::GaussViolation {
                    letter: l.clone(),
                    count: 0,
                });
            }
        }
        out
    }

    /// Letters renumbered by first occurrence, with projections in that order.
    pub fn canonical_form(&self) -> (Vec<Vec<usize>>, Vec<Symbol>) {
        let mut index: HashMap<&Letter, usize> = HashMap::new();
        let mut symbols = Vec::new();
        let comps = self
            .components
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|l| {
                        *index.entry(l).or_insert_with(|| {
                            symbols.push(self.projection.get(l).cloned());
                            symbols.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let symbols = symbols
            .into_iter()
            .map(|s| s.unwrap_or_else(|| Symbol("?".into())))
            .collect();
        (comps, symbols)
    }
}

impl fmt::Display for Nanophrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_nanophrase(self))
    }
}

impl FromStr for Nanophrase {
    type Err = PhraseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_nanophrase(s)
    }
}

#[derive(Serialize, Deserialize)]
struct LetterEntry {
    name: Letter,
    projection: Symbol,
}

#[derive(Serialize, Deserialize)]
struct PhraseJson {
    letters: Vec<LetterEntry>,
    components: Vec<Vec<Letter>>,
}

impl Serialize for Nanophrase {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PhraseJson {
            letters: self
                .projection
                .iter()
                .map(|(name, projection)| LetterEntry {
                    name: name.clone(),
                    projection: projection.clone(),
                })
                .collect(),
            components: self.components.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Nanophrase {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = PhraseJson::deserialize(deserializer)?;
        let mut projection = BTreeMap::new();
        for e in raw.letters {
            if projection.insert(e.name.clone(), e.projection).is_some() {
                return Err(serde::de::Error::custom(format!(
                    "duplicate letter {}",
                    e.name
                )));
            }
        }
        Nanophrase::new(projection, raw.components).map_err(serde::de::Error::custom)
    }
}

/// Splits on whitespace, yielding each token with its 0-based char column.
fn tokens_with_columns(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (byte, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(b)) => {
                out.push((b, &s[b..byte]));
                start = None;
            }
            (false, None) => start = Some(byte),
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b, &s[b..]));
    }
    out.into_iter()
        .map(|(b, tok)| (s[..b].chars().count(), tok))
        .collect()
}

/// A logical line of a key/value file with comments removed.
pub(crate) struct KeyedLine<'a> {
    pub line: usize,
    /// Column (1-based) where `rest` starts.
    pub column: usize,
    pub key: &'a str,
    pub rest: &'a str,
}

pub(crate) fn keyed_lines<'a>(
    text: &'a str,
    keys: &[&str],
) -> Result<Vec<KeyedLine<'a>>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let lead = line.len() - trimmed.len();
        let Some((key, rest)) = trimmed.split_once(':') else {
            return Err(ParseError::new(idx + 1, lead + 1, "expected `key: value`"));
        };
        let key = key.trim();
        if !keys.contains(&key) {
            return Err(ParseError::new(
                idx + 1,
                lead + 1,
                format!("unknown key {key:?}"),
            ));
        }
        let rest_byte = lead + trimmed.len() - rest.len();
        out.push(KeyedLine {
            line: idx + 1,
            column: line[..rest_byte].chars().count() + 1,
            key,
            rest,
        });
    }
    Ok(out)
}

/// Parses the two-line nanophrase format. Projection tokens may be any
/// symbol name; use [`validate`] to check them against a particular alpha.
pub fn parse_nanophrase(text: &str) -> Result<Nanophrase, PhraseError> {
    let lines = keyed_lines(text, &["letters", "phrase"])?;
    let mut letters_line = None;
    let mut phrase_line = None;
    for l in lines {
        let slot = if l.key == "letters" {
            &mut letters_line
        } else {
            &mut phrase_line
        };
        if slot.is_some() {
            return Err(ParseError::new(l.line, 1, format!("duplicate `{}:` line", l.key)).into());
        }
        *slot = Some(l);
    }
    let end = text.lines().count() + 1;
    let letters_line =
        letters_line.ok_or_else(|| ParseError::new(end, 1, "missing `letters:` line"))?;
    let phrase_line =
        phrase_line.ok_or_else(|| ParseError::new(end, 1, "missing `phrase:` line"))?;

    let mut projection = BTreeMap::new();
    for (col, tok) in tokens_with_columns(letters_line.rest) {
        let at = |msg: String| ParseError::new(letters_line.line, letters_line.column + col, msg);
        let (name, proj) = tok
            .split_once(':')
            .ok_or_else(|| at(format!("expected `name:projection`, found {tok:?}")))?;
        let letter = Letter::new(name).map_err(|_| at(format!("invalid letter name {name:?}")))?;
        let symbol = Symbol::new(proj)
            .map_err(|_| at(format!("unknown projection token {proj:?}")))?;
        if projection.insert(letter, symbol).is_some() {
            return Err(at(format!("letter {name} declared twice")).into());
        }
    }

    let compact = projection.keys().all(|l| l.as_str().chars().count() == 1);
    let mut components = Vec::new();
    let body = phrase_line.rest;
    if !body.trim().is_empty() {
        let mut offset = 0usize;
        for part in body.split('|') {
            let col = phrase_line.column + body[..offset].chars().count();
            offset += part.len() + 1;
            let tokens = tokens_with_columns(part);
            let at = |c: usize, msg: String| ParseError::new(phrase_line.line, col + c, msg);
            let comp = match tokens.as_slice() {
                [] => return Err(at(0, "empty component; write `.`".into()).into()),
                [(_, ".")] | [(_, "∅")] => Vec::new(),
                [(c, tok)] if !projection.contains_key(&Letter(tok.to_string())) && compact => tok
                    .chars()
                    .enumerate()
                    .map(|(k, ch)| {
                        Letter::new(ch.to_string())
                            .map_err(|_| at(c + k, format!("invalid letter {ch:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                _ => tokens
                    .iter()
                    .map(|&(c, tok)| {
                        Letter::new(tok).map_err(|_| at(c, format!("invalid letter name {tok:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            };
            components.push(comp);
        }
    }
    Nanophrase::new(projection, components)
}

/// Canonical text: letters sorted by name, single spaces, `.` for empty components.
pub fn render_nanophrase(p: &Nanophrase) -> String {
    let mut out = String::from("letters:");
    for (l, s) in &p.projection {
        out.push(' ');
        out.push_str(l.as_str());
        out.push(':');
        out.push_str(s.as_str());
    }
    out.push_str("\nphrase:");
    for (k, comp) in p.components.iter().enumerate() {
        out.push_str(if k == 0 { " " } else { " | " });
        if comp.is_empty() {
            out.push('.');
        } else {
            let names: Vec<&str> = comp.iter().map(Letter::as_str).collect();
            out.push_str(&names.join(" "));
        }
    }
    out
}

/// Every way `p` fails to be a nanophrase over `h`'s alpha.
pub fn validate(p: &Nanophrase, h: &HomotopyData) -> Vec<Violation> {
    let mut out = p.structural_violations();
    for (letter, symbol) in &p.projection {
        if !h.contains(symbol) {
            out.push(Violation::ProjectionViolation {
                letter: letter.clone(),
                symbol: symbol.clone(),
            });
        }
    }
    out
}

/// True when a projection-preserving bijection of alphabets carries `a` onto
/// `b` component by component.
pub fn isomorphic(a: &Nanophrase, b: &Nanophrase) -> bool {
    a.component_count() == b.component_count() && a.canonical_form() == b.canonical_form()
}
