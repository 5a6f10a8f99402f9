//! Text formats for designs and sequencings.
//!
//! Design file:
//!
//! ```text
//! <kind> <v> <b>        kind is `sts` or `psts`
//! a b c                 exactly b lines, 0-based, a < b < c
//! ```
//!
//! Sequencing file: one line of `v` space-separated 0-based points,
//! optionally followed by `# key=value` metadata comment lines.
//!
//! In both formats blank lines and lines starting with `#` are ignored
//! (except that sequencing metadata is read from `# key=value` comments).

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::design::{Block, Kind, Point, SeqMeta, Sequencing, TripleSystem};

/// Grammar summary shown in CLI help.
pub const GRAMMAR: &str = "\
Design file (UTF-8 text): line 1 = `<kind> <v> <b>` where kind is sts or psts;
then exactly b lines of three space-separated 0-based integers in strictly
increasing order; `#`-prefixed lines and blank lines are ignored.
Sequencing file: one line of v space-separated 0-based integers, optional
trailing `# key=value` metadata comments.";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("empty input")]
    Empty,
    #[error("malformed header `{0}` (expected `<sts|psts> <v> <b>`)")]
    BadHeader(String),
    #[error("expected three integers, got `{0}`")]
    BadBlockLine(String),
    #[error("point {point} out of range for v = {v}")]
    PointOutOfRange { point: u64, v: usize },
    #[error("block `{0}` is not in strictly increasing order")]
    NonCanonical(String),
    #[error("duplicate block {0}")]
    DuplicateBlock(Block),
    #[error("header declares {declared} blocks, found {found}")]
    BlockCountMismatch { declared: usize, found: usize },
    #[error("not an integer: `{0}`")]
    BadInteger(String),
    #[error("not a permutation of 0..{len}: {detail}")]
    NotPermutation { len: usize, detail: String },
    #[error("more than one sequencing line")]
    ExtraLine,
    #[error("malformed metadata `{0}`")]
    BadMeta(String),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn load_design(text: &str) -> Result<TripleSystem, ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| err(1, ParseErrorKind::Empty))?;
    let bad_header = || err(hline, ParseErrorKind::BadHeader(header.to_string()));
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [kind, v, b] = fields[..] else {
        return Err(bad_header());
    };
    let kind = match kind {
        "sts" => Kind::Sts,
        "psts" => Kind::Psts,
        _ => return Err(bad_header()),
    };
    let v: usize = v.parse().map_err(|_| bad_header())?;
    let declared: usize = b.parse().map_err(|_| bad_header())?;

    let mut blocks = Vec::with_capacity(declared);
    let mut seen = HashSet::new();
    let mut last_line = hline;
    for (n, line) in lines {
        last_line = n;
        let nums: Vec<&str> = line.split_whitespace().collect();
        if nums.len() != 3 {
            return Err(err(n, ParseErrorKind::BadBlockLine(line.to_string())));
        }
        let mut pts = [0 as Point; 3];
        for (slot, s) in pts.iter_mut().zip(&nums) {
            let x: u64 = s.parse().map_err(|_| err(n, ParseErrorKind::BadInteger(s.to_string())))?;
            if x >= v as u64 {
                return Err(err(n, ParseErrorKind::PointOutOfRange { point: x, v }));
            }
            *slot = x as Point;
        }
        if !(pts[0] < pts[1] && pts[1] < pts[2]) {
            return Err(err(n, ParseErrorKind::NonCanonical(line.to_string())));
        }
        let block = Block::new(pts[0], pts[1], pts[2]).expect("strictly increasing");
        if !seen.insert(block) {
            return Err(err(n, ParseErrorKind::DuplicateBlock(block)));
        }
        blocks.push(block);
        if blocks.len() > declared {
            return Err(err(n, ParseErrorKind::BlockCountMismatch { declared, found: blocks.len() }));
        }
    }
    if blocks.len() != declared {
        return Err(err(last_line, ParseErrorKind::BlockCountMismatch { declared, found: blocks.len() }));
    }
    Ok(TripleSystem::new(kind, v, blocks))
}

pub fn store_design(system: &TripleSystem) -> String {
    let mut out = format!("{} {} {}\n", system.kind(), system.v(), system.blocks().len());
    for b in system.blocks() {
        let [x, y, z] = b.points();
        let _ = writeln!(out, "{x} {y} {z}");
    }
    out
}

/// Like [`store_design`], with `# key=value` comments after the header.
pub fn store_design_with_comments(system: &TripleSystem, comments: &[(&str, String)]) -> String {
    let body = store_design(system);
    let (header, blocks) = body.split_once('\n').expect("header line");
    let mut out = format!("{header}\n");
    for (k, val) in comments {
        let _ = writeln!(out, "# {k}={val}");
    }
    out.push_str(blocks);
    out
}

pub fn load_sequencing(text: &str) -> Result<Sequencing, ParseError> {
    let mut order: Option<(usize, Vec<Point>)> = None;
    let mut meta = SeqMeta::default();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if order.is_some() {
                if let Some((k, val)) = comment.split_once('=') {
                    set_meta(&mut meta, k.trim(), val.trim())
                        .map_err(|_| err(n, ParseErrorKind::BadMeta(comment.to_string())))?;
                }
            }
            continue;
        }
        if order.is_some() {
            return Err(err(n, ParseErrorKind::ExtraLine));
        }
        let pts = line
            .split_whitespace()
            .map(|s| s.parse::<Point>().map_err(|_| err(n, ParseErrorKind::BadInteger(s.to_string()))))
            .collect::<Result<Vec<_>, _>>()?;
        order = Some((n, pts));
    }
    let (n, pts) = order.ok_or_else(|| err(1, ParseErrorKind::Empty))?;
    Sequencing::with_meta(pts, meta).map_err(|e| match e {
        crate::design::DesignError::NotPermutation { len, detail } => {
            err(n, ParseErrorKind::NotPermutation { len, detail })
        }
        other => unreachable!("{other}"),
    })
}

fn set_meta(meta: &mut SeqMeta, key: &str, val: &str) -> Result<(), ()> {
    match key {
        "method" => meta.method = Some(val.to_string()),
        "ell" => meta.ell = Some(val.parse().map_err(|_| ())?),
        "seed" if val == "none" => meta.seed = None,
        "seed" => meta.seed = Some(val.parse().map_err(|_| ())?),
        _ => {
            meta.extra.insert(key.to_string(), val.to_string());
        }
    }
    Ok(())
}

pub fn store_sequencing(seq: &Sequencing) -> String {
    let mut out = seq.order().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
    out.push('\n');
    let meta = &seq.meta;
    if let Some(m) = &meta.method {
        let _ = writeln!(out, "# method={m}");
    }
    if let Some(ell) = meta.ell {
        let _ = writeln!(out, "# ell={ell}");
    }
    if meta.method.is_some() || meta.seed.is_some() {
        match meta.seed {
            Some(s) => {
                let _ = writeln!(out, "# seed={s}");
            }
            None => {
                let _ = writeln!(out, "# seed=none");
            }
        }
    }
    for (k, val) in &meta.extra {
        let _ = writeln!(out, "# {k}={val}");
    }
    out
}
