//! The line-oriented presentation file format.
//!
//! ```text
//! # dense linear order
//! name dlo
//! claim homogeneous
//! signature </2
//! forbid
//! size 1
//! rel <: (0,0)
//! size 2
//! size 2
//! rel <: (0,1); (1,0)
//! ```
//!
//! The grammar is documented in `docs/presentation-format.md`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::presentation::{AgeMode, Claims, ClassPresentation};
use crate::structure::{FinStructure, Signature, Tuple};

const KEYWORDS: [&str; 7] = ["name", "claim", "signature", "forbid", "age", "size", "rel"];

#[derive(PartialEq)]
enum Section {
    Header,
    Signature,
    Structures,
}

struct RawStructure {
    size: usize,
    line: usize,
    tuples: Vec<(String, Tuple, usize, usize)>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a line into tokens with 1-based start columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(s, t)| (line[..s].chars().count() + 1, t))
        .collect()
}

fn parse_symbol(tok: &str, line: usize, col: usize) -> Result<(String, usize)> {
    let (name, arity) = tok
        .rsplit_once('/')
        .ok_or_else(|| parse_err(line, col, format!("expected `name/arity`, found `{tok}`")))?;
    if name.is_empty() {
        return Err(parse_err(line, col, "empty symbol name"));
    }
    if let Some(bad) = name.chars().find(|c| ":,;()#".contains(*c)) {
        return Err(parse_err(line, col, format!("character `{bad}` not allowed in a symbol name")));
    }
    let arity: usize = arity
        .parse()
        .map_err(|_| parse_err(line, col + name.len() + 1, format!("invalid arity `{arity}`")))?;
    Ok((name.to_string(), arity))
}

fn parse_usize(text: &str, line: usize, col: usize, what: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| parse_err(line, col, format!("invalid {what} `{}`", text.trim())))
}

/// Parses the tuple list of a `rel` line: `(0,1); (1,2)`. `offset` is the
/// 1-based column of the first character of `text`.
fn parse_tuples(text: &str, line: usize, offset: usize) -> Result<Vec<(Tuple, usize)>> {
    let mut out = Vec::new();
    let mut pos = 0;
    let bytes: Vec<char> = text.chars().collect();
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_whitespace() {
            *pos += 1;
        }
    };
    skip_ws(&mut pos);
    if pos == bytes.len() {
        return Ok(out);
    }
    loop {
        skip_ws(&mut pos);
        let start = pos;
        if pos >= bytes.len() || bytes[pos] != '(' {
            return Err(parse_err(line, offset + pos, "expected `(`"));
        }
        let close = bytes[pos..]
            .iter()
            .position(|&c| c == ')')
            .map(|i| i + pos)
            .ok_or_else(|| parse_err(line, offset + pos, "unclosed `(`"))?;
        let inner: String = bytes[pos + 1..close].iter().collect();
        let mut tuple = Vec::new();
        let mut col = offset + pos + 1;
        for part in inner.split(',') {
            tuple.push(parse_usize(part, line, col, "tuple entry")?);
            col += part.chars().count() + 1;
        }
        out.push((tuple, offset + start));
        pos = close + 1;
        skip_ws(&mut pos);
        if pos == bytes.len() {
            return Ok(out);
        }
        if bytes[pos] != ';' {
            return Err(parse_err(line, offset + pos, "expected `;` between tuples"));
        }
        pos += 1;
    }
}

pub fn parse_presentation(text: &str) -> Result<ClassPresentation> {
    let mut section = Section::Header;
    let mut name = None;
    let mut claims = Claims::default();
    let mut symbols: Vec<(String, usize)> = Vec::new();
    let mut mode: Option<(bool, usize)> = None;
    let mut structures: Vec<RawStructure> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(&(col, head)) = toks.first() else {
            continue;
        };
        let keyword = KEYWORDS.contains(&head).then_some(head);
        match keyword {
            Some("name") => {
                if section != Section::Header {
                    return Err(parse_err(line_no, col, "`name` must precede `signature`"));
                }
                if toks.len() != 2 {
                    return Err(parse_err(line_no, col, "`name` takes exactly one identifier"));
                }
                name = Some(toks[1].1.to_string());
            }
            Some("claim") => {
                if toks.len() < 2 {
                    return Err(parse_err(line_no, col, "`claim` needs `homogeneous` or `transitive`"));
                }
                for &(c, t) in &toks[1..] {
                    match t {
                        "homogeneous" => claims.homogeneous = true,
                        "transitive" => claims.transitive = true,
                        _ => return Err(parse_err(line_no, c, format!("unknown claim `{t}`"))),
                    }
                }
            }
            Some("signature") => {
                if section != Section::Header {
                    return Err(parse_err(line_no, col, "duplicate `signature` block"));
                }
                section = Section::Signature;
                for &(c, t) in &toks[1..] {
                    symbols.push(parse_symbol(t, line_no, c)?);
                }
            }
            Some(kw @ ("forbid" | "age")) => {
                if section != Section::Signature {
                    return Err(parse_err(
                        line_no,
                        col,
                        format!("`{kw}` must follow the signature block and appear once"),
                    ));
                }
                section = Section::Structures;
                if kw == "forbid" {
                    if toks.len() != 1 {
                        return Err(parse_err(line_no, toks[1].0, "`forbid` takes no arguments"));
                    }
                    mode = Some((true, 0));
                } else {
                    if toks.len() != 2 {
                        return Err(parse_err(line_no, col, "`age` needs a size bound"));
                    }
                    mode = Some((false, parse_usize(toks[1].1, line_no, toks[1].0, "age bound")?));
                }
            }
            Some("size") => {
                if section != Section::Structures {
                    return Err(parse_err(line_no, col, "`size` outside a `forbid` or `age` block"));
                }
                if toks.len() != 2 {
                    return Err(parse_err(line_no, col, "`size` takes exactly one number"));
                }
                structures.push(RawStructure {
                    size: parse_usize(toks[1].1, line_no, toks[1].0, "size")?,
                    line: line_no,
                    tuples: Vec::new(),
                });
            }
            Some("rel") => {
                let Some(current) = structures.last_mut() else {
                    return Err(parse_err(line_no, col, "`rel` before any `size` line"));
                };
                let body_start = line.find("rel").expect("keyword present") + 3;
                let body = &line[body_start..];
                let (sym, rest) = body
                    .split_once(':')
                    .ok_or_else(|| parse_err(line_no, col, "expected `rel name: tuples`"))?;
                let sym_name = sym.trim();
                if sym_name.is_empty() {
                    return Err(parse_err(line_no, col + 4, "missing symbol name"));
                }
                let offset = line[..body_start + sym.len() + 1].chars().count() + 1;
                for (t, c) in parse_tuples(rest, line_no, offset)? {
                    current.tuples.push((sym_name.to_string(), t, line_no, c));
                }
            }
            _ => {
                if section == Section::Signature {
                    for &(c, t) in &toks {
                        symbols.push(parse_symbol(t, line_no, c)?);
                    }
                } else {
                    return Err(parse_err(line_no, col, format!("unexpected `{head}`")));
                }
            }
        }
    }

    if section == Section::Header {
        return Err(parse_err(1, 1, "missing `signature` block"));
    }
    let signature = Signature::new(symbols).map_err(|e| Error::Validation(vec![e.to_string()]))?;
    let mut built = Vec::with_capacity(structures.len());
    for raw in structures {
        let mut tuples = Vec::with_capacity(raw.tuples.len());
        for (sym, t, line, col) in raw.tuples {
            let idx = signature
                .index_of(&sym)
                .ok_or_else(|| parse_err(line, col, format!("unknown symbol `{sym}`")))?;
            tuples.push((idx, t));
        }
        let s = FinStructure::from_tuples(&signature, raw.size, tuples).map_err(|e| {
            Error::Validation(vec![format!("structure at line {}: {e}", raw.line)])
        })?;
        built.push(s);
    }
    let p = match mode {
        None | Some((true, _)) => ClassPresentation::forbidden(signature, built)?,
        Some((false, bound)) => ClassPresentation::explicit(signature, built, bound)?,
    };
    let p = p.with_claims(claims);
    Ok(match name {
        Some(n) => p.with_name(n),
        None => p,
    })
}

pub fn read_presentation(path: impl AsRef<Path>) -> Result<ClassPresentation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_presentation(&text)
}

fn write_structure(out: &mut String, sig: &Signature, s: &FinStructure) {
    out.push_str(&format!("size {}\n", s.size()));
    for (sym, symbol) in sig.symbols().iter().enumerate() {
        let rel = s.relation(sym);
        if rel.is_empty() {
            continue;
        }
        let tuples: Vec<String> = rel
            .iter()
            .map(|t| {
                let entries: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                format!("({})", entries.join(","))
            })
            .collect();
        out.push_str(&format!("rel {}: {}\n", symbol.name, tuples.join("; ")));
    }
}

/// Renders a presentation in the file format; parsing the output yields an
/// equal presentation.
pub fn write_presentation(p: &ClassPresentation) -> String {
    let mut out = String::new();
    if let Some(name) = p.name() {
        out.push_str(&format!("name {name}\n"));
    }
    let claims = p.claims();
    if claims.homogeneous {
        out.push_str("claim homogeneous\n");
    }
    if claims.transitive {
        out.push_str("claim transitive\n");
    }
    out.push_str("signature");
    for s in p.signature().symbols() {
        out.push_str(&format!(" {}/{}", s.name, s.arity));
    }
    out.push('\n');
    let sig = p.signature();
    match p.mode() {
        AgeMode::Forbidden(list) => {
            out.push_str("forbid\n");
            for s in list {
                write_structure(&mut out, sig, s);
            }
        }
        AgeMode::ExplicitAge { members, bound } => {
            out.push_str(&format!("age {bound}\n"));
            for s in members {
                write_structure(&mut out, sig, s);
            }
        }
    }
    out
}
