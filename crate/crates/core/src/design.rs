//! Points, blocks, triple systems and the third-point table.
//!
//! Points are 0-based indices `0..v`. Positions inside a sequencing are
//! 0-based in code; only [`Violation::window_start`] is reported 1-based.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

pub type Point = u32;

/// A 3-subset of points, stored in strictly increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block([Point; 3]);

impl Block {
    /// Canonicalizes `{a, b, c}`. Fails if any point repeats.
    pub fn new(a: Point, b: Point, c: Point) -> Result<Self, DesignError> {
        let mut pts = [a, b, c];
        pts.sort_unstable();
        if pts[0] == pts[1] || pts[1] == pts[2] {
            return Err(DesignError::RepeatedPoint([a, b, c]));
        }
        Ok(Block(pts))
    }

    pub fn points(&self) -> [Point; 3] {
        self.0
    }

    pub fn contains(&self, p: Point) -> bool {
        self.0.contains(&p)
    }

    pub fn pairs(&self) -> [(Point, Point); 3] {
        let [a, b, c] = self.0;
        [(a, b), (a, c), (b, c)]
    }

    pub fn max_point(&self) -> Point {
        self.0[2]
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.0[0], self.0[1], self.0[2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// Every pair in exactly one block.
    Sts,
    /// Every pair in at most one block.
    Psts,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Sts => "sts",
            Kind::Psts => "psts",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A structural defect found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fault {
    PointOutOfRange { block: Block, v: usize },
    DuplicateBlock { block: Block },
    /// A pair lies in more than one block.
    RepeatedPair { pair: (Point, Point), blocks: Vec<Block> },
    /// A pair lies in no block (only a fault for [`Kind::Sts`]).
    UncoveredPair { pair: (Point, Point) },
    /// STS orders must be 1 or 3 mod 6.
    InadmissibleOrder { v: usize },
    BlockCount { expected: usize, found: usize },
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fault::PointOutOfRange { block, v } => {
                write!(f, "block {block} has a point outside 0..{v}")
            }
            Fault::DuplicateBlock { block } => write!(f, "block {block} occurs more than once"),
            Fault::RepeatedPair { pair, blocks } => {
                write!(f, "pair {{{},{}}} occurs in {} blocks:", pair.0, pair.1, blocks.len())?;
                for b in blocks {
                    write!(f, " {b}")?;
                }
                Ok(())
            }
            Fault::UncoveredPair { pair } => {
                write!(f, "pair {{{},{}}} is in no block", pair.0, pair.1)
            }
            Fault::InadmissibleOrder { v } => {
                write!(f, "no STS of order {v} exists (v mod 6 = {})", v % 6)
            }
            Fault::BlockCount { expected, found } => {
                write!(f, "expected {expected} blocks, found {found}")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DesignError {
    #[error("triple {0:?} repeats a point")]
    RepeatedPoint([Point; 3]),
    #[error("design is invalid: {}", .0.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Fault>),
    #[error("sequence is not a permutation of 0..{len}: {detail}")]
    NotPermutation { len: usize, detail: String },
}

/// A (partial) Steiner triple system. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleSystem {
    kind: Kind,
    v: usize,
    blocks: Vec<Block>,
}

impl TripleSystem {
    /// No validation happens here; see [`validate`].
    pub fn new(kind: Kind, v: usize, blocks: Vec<Block>) -> Self {
        TripleSystem { kind, v, blocks }
    }

    pub fn from_triples(kind: Kind, v: usize, triples: &[[Point; 3]]) -> Result<Self, DesignError> {
        let blocks = triples
            .iter()
            .map(|&[a, b, c]| Block::new(a, b, c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TripleSystem::new(kind, v, blocks))
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Same points and blocks, declared with another kind.
    pub fn with_kind(&self, kind: Kind) -> Self {
        TripleSystem { kind, ..self.clone() }
    }

    pub fn validate(&self) -> Vec<Fault> {
        validate(self)
    }

    pub fn is_valid(&self) -> bool {
        validate(self).is_empty()
    }

    pub fn ensure_valid(&self) -> Result<(), DesignError> {
        let faults = validate(self);
        if faults.is_empty() {
            Ok(())
        } else {
            Err(DesignError::Invalid(faults))
        }
    }

    pub fn third_table(&self) -> Result<ThirdTable, DesignError> {
        build_third_table(self)
    }

    /// Blocks through each point, indexed by point.
    pub fn blocks_by_point(&self) -> Vec<Vec<Block>> {
        let mut index = vec![Vec::new(); self.v];
        for b in &self.blocks {
            for p in b.points() {
                if (p as usize) < self.v {
                    index[p as usize].push(*b);
                }
            }
        }
        index
    }
}

/// Checks the invariants of `system` for its declared kind. Faults are
/// returned as data; an empty list means the system is valid.
pub fn validate(system: &TripleSystem) -> Vec<Fault> {
    let v = system.v;
    let mut faults = Vec::new();
    let mut seen = HashSet::new();
    let mut owners: HashMap<(Point, Point), Vec<Block>> = HashMap::new();

    for block in &system.blocks {
        if block.max_point() as usize >= v {
            faults.push(Fault::PointOutOfRange { block: *block, v });
            continue;
        }
        if !seen.insert(*block) {
            faults.push(Fault::DuplicateBlock { block: *block });
            continue;
        }
        for pair in block.pairs() {
            owners.entry(pair).or_default().push(*block);
        }
    }

    let mut repeated: Vec<_> = owners
        .iter()
        .filter(|(_, bs)| bs.len() > 1)
        .map(|(pair, bs)| Fault::RepeatedPair { pair: *pair, blocks: bs.clone() })
        .collect();
    repeated.sort_by_key(|f| match f {
        Fault::RepeatedPair { pair, .. } => *pair,
        _ => unreachable!(),
    });
    faults.extend(repeated);

    if system.kind == Kind::Sts {
        if v % 6 != 1 && v % 6 != 3 {
            faults.push(Fault::InadmissibleOrder { v });
        }
        let expected = v * v.saturating_sub(1) / 6;
        if system.blocks.len() != expected {
            faults.push(Fault::BlockCount { expected, found: system.blocks.len() });
        }
        for x in 0..v as Point {
            for y in x + 1..v as Point {
                if !owners.contains_key(&(x, y)) {
                    faults.push(Fault::UncoveredPair { pair: (x, y) });
                }
            }
        }
    }
    faults
}

const NONE: Point = Point::MAX;

/// Dense `v × v` realization of `third(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThirdTable {
    v: usize,
    cells: Vec<Point>,
}

impl ThirdTable {
    pub fn v(&self) -> usize {
        self.v
    }

    /// The point completing `{x, y}` to a block, if any. `None` on the diagonal.
    #[inline]
    pub fn get(&self, x: Point, y: Point) -> Option<Point> {
        match self.cells[x as usize * self.v + y as usize] {
            NONE => None,
            z => Some(z),
        }
    }

    #[inline]
    pub fn is_block(&self, a: Point, b: Point, c: Point) -> bool {
        a != b && self.get(a, b) == Some(c)
    }

    /// Whether some block lies inside `points`.
    pub fn contains_block(&self, points: &[Point]) -> bool {
        let n = points.len();
        for i in 0..n {
            for j in i + 1..n {
                if let Some(z) = self.get(points[i], points[j]) {
                    if points[j + 1..].contains(&z) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Number of ordered off-diagonal pairs with no third point.
    pub fn uncovered_ordered_pairs(&self) -> usize {
        let mut n = 0;
        for x in 0..self.v as Point {
            for y in 0..self.v as Point {
                if x != y && self.get(x, y).is_none() {
                    n += 1;
                }
            }
        }
        n
    }
}

/// Builds the third-point table. Rejects systems with an out-of-range
/// point, a duplicate block or a pair in more than one block.
pub fn build_third_table(system: &TripleSystem) -> Result<ThirdTable, DesignError> {
    let faults: Vec<_> = system
        .with_kind(Kind::Psts)
        .validate()
        .into_iter()
        .collect();
    if !faults.is_empty() {
        return Err(DesignError::Invalid(faults));
    }
    let v = system.v;
    let mut cells = vec![NONE; v * v];
    for block in &system.blocks {
        let [a, b, c] = block.points();
        for (x, y, z) in [(a, b, c), (a, c, b), (b, c, a)] {
            cells[x as usize * v + y as usize] = z;
            cells[y as usize * v + x as usize] = z;
        }
    }
    Ok(ThirdTable { v, cells })
}

/// Provenance carried alongside a sequencing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeqMeta {
    pub method: Option<String>,
    pub ell: Option<usize>,
    pub seed: Option<u64>,
    /// Any further `key=value` pairs, kept in key order.
    pub extra: BTreeMap<String, String>,
}

/// A permutation of the points `0..v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequencing {
    order: Vec<Point>,
    pub meta: SeqMeta,
}

impl Sequencing {
    pub fn new(order: Vec<Point>) -> Result<Self, DesignError> {
        Self::with_meta(order, SeqMeta::default())
    }

    pub fn with_meta(order: Vec<Point>, meta: SeqMeta) -> Result<Self, DesignError> {
        let len = order.len();
        let mut seen = vec![false; len];
        for &p in &order {
            let slot = seen.get_mut(p as usize).ok_or_else(|| DesignError::NotPermutation {
                len,
                detail: format!("point {p} out of range"),
            })?;
            if *slot {
                return Err(DesignError::NotPermutation { len, detail: format!("point {p} repeated") });
            }
            *slot = true;
        }
        Ok(Sequencing { order, meta })
    }

    pub fn identity(v: usize) -> Self {
        Sequencing { order: (0..v as Point).collect(), meta: SeqMeta::default() }
    }

    pub fn order(&self) -> &[Point] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `positions()[p]` is the 0-based position of point `p`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &p) in self.order.iter().enumerate() {
            pos[p as usize] = i;
        }
        pos
    }

    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        Sequencing { order, meta: self.meta.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// A single block lies inside the window.
    WindowBlock,
    /// The window's points split exactly into disjoint blocks.
    WindowPartition,
}

/// Witness that a sequencing fails a window property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// 1-based position of the window's first point.
    pub window_start: usize,
    pub window_len: usize,
    pub witness: Vec<Block>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::WindowBlock => "contains block",
            ViolationKind::WindowPartition => "is partitioned by blocks",
        };
        write!(
            f,
            "window {}..{} (length {}) {what}",
            self.window_start,
            self.window_start + self.window_len - 1,
            self.window_len
        )?;
        for b in &self.witness {
            write!(f, " {b}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Good,
    Violated(Violation),
}

impl Verdict {
    pub fn is_good(&self) -> bool {
        matches!(self, Verdict::Good)
    }

    pub fn violation(&self) -> Option<&Violation> {
        match self {
            Verdict::Good => None,
            Verdict::Violated(v) => Some(v),
        }
    }
}
