//! Line-oriented text formats for structures, coded families and step
//! limits.
//!
//! Every format starts with a `lang` line declaring the signature, e.g.
//! `lang E/2 U/1`. Blank lines and `#` comments are ignored, and `;` may
//! separate statements on one line.
//!
//! ```text
//! # structure                # coded family            # step limit
//! lang R/2                   lang R/2                  lang R/2
//! size 3                     size 3                    resolution 2
//! R 1 2                      R 1|2 1 2                 cell R 1|2 * * 2
//! R 2 3                      R 1,2 3
//! ```
//!
//! Family lines carry the partition of the arity (classes split by `|`,
//! elements by `,`) followed by the coded edge. Limit `cell` lines carry
//! one colour per nonempty subset of `[‖p‖]` (by size, then
//! lexicographically); `*` stands for every colour.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use structlim::coding::{DHypFamily, IndexKey, SetPartition};
use structlim::limit::{CellSignature, StepLimit};
use structlim::{Signature, Structure};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// Non-empty statements with their 1-based line numbers.
fn statements(text: &str) -> Vec<(usize, Vec<&str>)> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for stmt in line.split(';') {
            let words: Vec<&str> = stmt.split_whitespace().collect();
            if !words.is_empty() {
                out.push((n + 1, words));
            }
        }
    }
    out
}

fn parse_number(line: usize, word: &str) -> Result<usize, FormatError> {
    word.parse()
        .map_err(|_| err(line, format!("expected a number, found {word:?}")))
}

struct Header<'a> {
    sig: Signature,
    value: usize,
    body: Vec<(usize, Vec<&'a str>)>,
}

/// Reads `lang ...` followed by `<keyword> <number>`.
fn header<'a>(text: &'a str, keyword: &str) -> Result<Header<'a>, FormatError> {
    let mut stmts = statements(text).into_iter();
    let (line, words) = stmts.next().ok_or_else(|| err(1, "empty document"))?;
    if words[0] != "lang" {
        return Err(err(line, "expected a `lang` line first"));
    }
    let mut symbols = Vec::new();
    for w in &words[1..] {
        let (name, arity) = w
            .rsplit_once('/')
            .ok_or_else(|| err(line, format!("expected name/arity, found {w:?}")))?;
        symbols.push((name.to_string(), parse_number(line, arity)?));
    }
    let sig = Signature::new(symbols).map_err(|e| err(line, e.to_string()))?;

    let (line, words) = stmts
        .next()
        .ok_or_else(|| err(line, format!("missing `{keyword}` line")))?;
    if words[0] != keyword || words.len() != 2 {
        return Err(err(line, format!("expected `{keyword} <n>`")));
    }
    let value = parse_number(line, words[1])?;
    Ok(Header {
        sig,
        value,
        body: stmts.collect(),
    })
}

fn symbol_of(sig: &Signature, line: usize, name: &str) -> Result<usize, FormatError> {
    sig.index_of(name)
        .ok_or_else(|| err(line, format!("unknown symbol {name:?}")))
}

fn entries(line: usize, words: &[&str], size: usize) -> Result<Vec<usize>, FormatError> {
    words
        .iter()
        .map(|w| {
            let v = parse_number(line, w)?;
            if v == 0 || v > size {
                Err(err(line, format!("entry {v} outside [{size}]")))
            } else {
                Ok(v)
            }
        })
        .collect()
}

fn lang_line(sig: &Signature) -> String {
    let mut s = String::from("lang");
    for sym in sig.symbols() {
        write!(s, " {}/{}", sym.name, sym.arity).unwrap();
    }
    s
}

pub fn parse_structure(text: &str) -> Result<Structure, FormatError> {
    let h = header(text, "size")?;
    let mut s = Structure::empty(h.sig.clone(), h.value);
    for (line, words) in h.body {
        let i = symbol_of(&h.sig, line, words[0])?;
        let arity = h.sig.arity(i);
        if words.len() - 1 != arity {
            return Err(err(
                line,
                format!(
                    "{} has arity {arity}, got {} entries",
                    words[0],
                    words.len() - 1
                ),
            ));
        }
        let t = entries(line, &words[1..], h.value)?;
        s.insert(i, t).map_err(|e| err(line, e.to_string()))?;
    }
    Ok(s)
}

/// Canonical text: symbols in signature order, tuples ascending.
pub fn serialize_structure(s: &Structure) -> String {
    let mut out = lang_line(s.signature());
    write!(out, "\nsize {}\n", s.size()).unwrap();
    for (i, t) in s.tuples() {
        out.push_str(s.signature().name(i));
        for v in t {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_key(sig: &Signature, line: usize, words: &[&str]) -> Result<IndexKey, FormatError> {
    if words.len() < 2 {
        return Err(err(line, "expected a symbol and a partition"));
    }
    let i = symbol_of(sig, line, words[0])?;
    let p: SetPartition = words[1]
        .parse()
        .map_err(|e: structlim::Error| err(line, e.to_string()))?;
    IndexKey::new(sig, i, p).map_err(|e| err(line, e.to_string()))
}

pub fn parse_family(text: &str) -> Result<DHypFamily, FormatError> {
    let h = header(text, "size")?;
    let mut edges: BTreeMap<IndexKey, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for (line, words) in h.body {
        let key = parse_key(&h.sig, line, &words)?;
        if words.len() - 2 != key.width() {
            return Err(err(
                line,
                format!("partition {} needs {} entries", key.partition, key.width()),
            ));
        }
        let e = entries(line, &words[2..], h.value)?;
        let mut seen = BTreeSet::new();
        if !e.iter().all(|v| seen.insert(*v)) {
            return Err(err(line, format!("edge {e:?} repeats an entry")));
        }
        edges.entry(key).or_default().insert(e);
    }
    DHypFamily::new(h.sig, h.value, edges).map_err(|e| err(0, e.to_string()))
}

pub fn serialize_family(d: &DHypFamily) -> String {
    let mut out = lang_line(d.signature());
    write!(out, "\nsize {}\n", d.size()).unwrap();
    for (key, set) in d.nonempty() {
        for e in set {
            write!(out, "{} {}", d.signature().name(key.symbol), key.partition).unwrap();
            for v in e {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_limit(text: &str) -> Result<StepLimit, FormatError> {
    let h = header(text, "resolution")?;
    let l = u32::try_from(h.value).map_err(|_| err(2, "resolution too large"))?;
    let mut f = StepLimit::empty(h.sig.clone(), l).map_err(|e| err(2, e.to_string()))?;
    for (line, words) in h.body {
        if words[0] != "cell" {
            return Err(err(line, format!("expected `cell`, found {:?}", words[0])));
        }
        let key = parse_key(&h.sig, line, &words[1..])?;
        let t = key.width();
        let slots = &words[3..];
        if slots.len() != (1 << t) - 1 {
            return Err(err(
                line,
                format!("partition {} needs {} colours", key.partition, (1 << t) - 1),
            ));
        }
        let choices: Vec<Vec<u32>> = slots
            .iter()
            .map(|w| {
                if *w == "*" {
                    Ok((1..=l).collect())
                } else {
                    let c = parse_number(line, w)? as u32;
                    if c == 0 || c > l {
                        Err(err(line, format!("colour {c} outside [{l}]")))
                    } else {
                        Ok(vec![c])
                    }
                }
            })
            .collect::<Result<_, _>>()?;
        for colors in expand_choices(&choices) {
            let cell = CellSignature::new(t, colors, l).map_err(|e| err(line, e.to_string()))?;
            f.select(key.clone(), cell)
                .map_err(|e| err(line, e.to_string()))?;
        }
    }
    Ok(f)
}

fn expand_choices(choices: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut acc = vec![Vec::new()];
    for options in choices {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    acc
}

/// One explicit `cell` line per selected signature.
pub fn serialize_limit(f: &StepLimit) -> String {
    let mut out = lang_line(f.signature());
    write!(out, "\nresolution {}\n", f.resolution()).unwrap();
    for (key, cells) in f.selected() {
        for c in cells {
            writeln!(
                out,
                "cell {} {} {}",
                f.signature().name(key.symbol),
                key.partition,
                c
            )
            .unwrap();
        }
    }
    out
}
