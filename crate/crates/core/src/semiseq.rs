//! Window partitions and w-semi-sequenceability.
//!
//! A sequencing witnesses w-semi-sequenceability when no `t` consecutive
//! points (`t ≡ 0 mod 3`, `t ≤ w`) split exactly into `t/3` blocks.

use std::fmt::Write as _;

use thiserror::Error;

use crate::design::{Block, Point, Sequencing, TripleSystem, Verdict, Violation, ViolationKind};
use crate::format::{store_design, store_sequencing};
use crate::sequencer::{verify_ell_good, SequencerError};

#[derive(Debug, Error)]
pub enum SemiseqError {
    #[error("window length {0} is not a positive multiple of 3")]
    BadWindowLength(usize),
    #[error("window repeats point {0}")]
    RepeatedPoint(Point),
    #[error("point {point} outside 0..{v}")]
    PointOutOfRange { point: Point, v: usize },
    #[error("w = {w} is outside 3..{v}")]
    WOutOfRange { w: usize, v: usize },
    #[error("u must be at least 1")]
    ZeroU,
    #[error("sequencing is not {ell}-good: {violation}")]
    NotGood { ell: usize, violation: Violation },
    #[error(transparent)]
    Sequencer(#[from] SequencerError),
}

/// A window of `t` distinct points, `t` a positive multiple of 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionQuery {
    window: Vec<Point>,
}

impl PartitionQuery {
    pub fn new(window: Vec<Point>) -> Result<Self, SemiseqError> {
        let t = window.len();
        if t < 3 || t % 3 != 0 {
            return Err(SemiseqError::BadWindowLength(t));
        }
        let mut sorted = window.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(SemiseqError::RepeatedPoint(w[0]));
        }
        Ok(PartitionQuery { window })
    }

    pub fn t(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[Point] {
        &self.window
    }
}

/// Exact-cover search of windows by blocks, with a per-point block index.
pub struct Partitioner<'a> {
    system: &'a TripleSystem,
    by_point: Vec<Vec<Block>>,
    inside: Vec<bool>,
}

impl<'a> Partitioner<'a> {
    pub fn new(system: &'a TripleSystem) -> Self {
        Partitioner { system, by_point: system.blocks_by_point(), inside: vec![false; system.v()] }
    }

    /// Disjoint blocks covering `window` exactly, if any exist.
    pub fn partition(&mut self, window: &[Point]) -> Result<Option<Vec<Block>>, SemiseqError> {
        let v = self.system.v();
        if let Some(&point) = window.iter().find(|&&p| p as usize >= v) {
            return Err(SemiseqError::PointOutOfRange { point, v });
        }
        for &p in window {
            self.inside[p as usize] = true;
        }
        let mut chosen = Vec::with_capacity(window.len() / 3);
        let found = self.cover(window.len(), &mut chosen);
        for &p in window {
            self.inside[p as usize] = false;
        }
        Ok(found.then_some(chosen))
    }

    fn cover(&mut self, left: usize, chosen: &mut Vec<Block>) -> bool {
        if left == 0 {
            return true;
        }
        let Some(p) = self.inside.iter().position(|&b| b) else {
            return false;
        };
        for i in 0..self.by_point[p].len() {
            let block = self.by_point[p][i];
            let pts = block.points();
            if !pts.iter().all(|&q| self.inside[q as usize]) {
                continue;
            }
            for q in pts {
                self.inside[q as usize] = false;
            }
            chosen.push(block);
            if self.cover(left - 3, chosen) {
                // restore membership so the caller can clear it uniformly
                for b in chosen.iter() {
                    for q in b.points() {
                        self.inside[q as usize] = true;
                    }
                }
                return true;
            }
            chosen.pop();
            for q in pts {
                self.inside[q as usize] = true;
            }
        }
        false
    }
}

/// Decides whether the query window splits into disjoint blocks.
pub fn window_partitionable(
    system: &TripleSystem,
    query: &PartitionQuery,
) -> Result<Option<Vec<Block>>, SemiseqError> {
    Partitioner::new(system).partition(query.window())
}

/// Checks every window of length `t ∈ {3, 6, .., ≤ w}`. The first violation
/// in `(t, window start)` order is returned.
pub fn is_w_semi(system: &TripleSystem, seq: &Sequencing, w: usize) -> Result<Verdict, SemiseqError> {
    let v = system.v();
    if w < 3 || w >= v {
        return Err(SemiseqError::WOutOfRange { w, v });
    }
    if seq.len() != v {
        return Err(SequencerError::LengthMismatch { seq_len: seq.len(), v }.into());
    }
    let mut part = Partitioner::new(system);
    let order = seq.order();
    for t in (3..=w).step_by(3) {
        for start in 0..=v - t {
            if let Some(mut witness) = part.partition(&order[start..start + t])? {
                witness.sort_unstable();
                return Ok(Verdict::Violated(Violation {
                    kind: ViolationKind::WindowPartition,
                    window_start: start + 1,
                    window_len: t,
                    witness,
                }));
            }
        }
    }
    Ok(Verdict::Good)
}

/// Data falsifying "(2u+1)-good implies 3u-semi-sequenceable".
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub system: TripleSystem,
    pub sequencing: Sequencing,
    pub u: usize,
    pub violation: Violation,
}

impl Counterexample {
    /// Self-contained dump: the design file, the sequencing file and the violation.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# counterexample u={} violation: {}", self.u, self.violation);
        let _ = writeln!(s, "# --- design ---");
        s.push_str(&store_design(&self.system));
        let _ = writeln!(s, "# --- sequencing ---");
        s.push_str(&store_sequencing(&self.sequencing));
        s
    }
}

#[derive(Clone, Debug)]
pub enum TheoremCheck {
    Pass,
    Counterexample(Box<Counterexample>),
}

impl TheoremCheck {
    pub fn is_pass(&self) -> bool {
        matches!(self, TheoremCheck::Pass)
    }
}

/// For a `(2u+1)`-good `seq`, confirms that it is also `3u`-semi-sequenceable.
pub fn check_theorem_2u1(system: &TripleSystem, seq: &Sequencing, u: usize) -> Result<TheoremCheck, SemiseqError> {
    if u == 0 {
        return Err(SemiseqError::ZeroU);
    }
    let ell = 2 * u + 1;
    if let Verdict::Violated(violation) = verify_ell_good(system, seq, ell)? {
        return Err(SemiseqError::NotGood { ell, violation });
    }
    Ok(match is_w_semi(system, seq, 3 * u)? {
        Verdict::Good => TheoremCheck::Pass,
        Verdict::Violated(violation) => TheoremCheck::Counterexample(Box::new(Counterexample {
            system: system.clone(),
            sequencing: seq.clone(),
            u,
            violation,
        })),
    })
}
