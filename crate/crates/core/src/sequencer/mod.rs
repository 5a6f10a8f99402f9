//! Constructing and checking ℓ-good sequencings.
//!
//! A sequencing is ℓ-good when no `ℓ` consecutive points contain a block.

mod exhaustive;
mod greedy3;
mod greedy4;
mod verify;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::design::{DesignError, Point};

pub use exhaustive::{exhaustive_search, exhaustive_sequencer, ExhaustiveOutcome, SearchOptions, ValueOrder};
pub use greedy3::greedy_3good;
pub use greedy4::{endgame_triples, greedy_4good, EndgameState, FourGoodRun, PreplacementPlan, LOOKAHEAD_POINTS};
pub use verify::{verify_ell_good, verify_ell_good_naive};

/// How a greedy step picks among permissible points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyPolicy {
    /// Smallest permissible index.
    LexSmallest,
    /// Uniform choice among permissible points, from a seeded stream.
    SeededRandom(u64),
}

impl GreedyPolicy {
    pub fn seed(&self) -> Option<u64> {
        match self {
            GreedyPolicy::LexSmallest => None,
            GreedyPolicy::SeededRandom(s) => Some(*s),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GreedyPolicy::LexSmallest => "lex",
            GreedyPolicy::SeededRandom(_) => "random",
        }
    }
}

#[derive(Debug, Error)]
pub enum SequencerError {
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("sequencing has {seq_len} points but the design has {v}")]
    LengthMismatch { seq_len: usize, v: usize },
    #[error("ell = {ell} is outside 3..={v}")]
    EllOutOfRange { ell: usize, v: usize },
    #[error("order v = {v} is too small (need v >= {min})")]
    OrderTooSmall { v: usize, min: usize },
    #[error("the 4-good construction needs a full STS")]
    NotSts,
    #[error("insufficient order: v = {v}, need v >= {needed}{}", .m.map(|m| format!(" (m = {m})")).unwrap_or_default())]
    InsufficientOrder { v: usize, m: Option<usize>, needed: usize },
    #[error("no permissible point at position {position}\n{state}")]
    Stuck { position: usize, state: String },
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

/// Candidate selection shared by the greedy constructions.
pub(crate) struct Chooser {
    rng: Option<ChaCha8Rng>,
    scratch: Vec<Point>,
}

impl Chooser {
    pub(crate) fn new(policy: GreedyPolicy) -> Self {
        let rng = match policy {
            GreedyPolicy::LexSmallest => None,
            GreedyPolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Chooser { rng, scratch: Vec::new() }
    }

    /// Picks from `candidates`, which must be yielded in ascending order.
    pub(crate) fn pick(&mut self, candidates: impl Iterator<Item = Point>) -> Option<Point> {
        match &mut self.rng {
            None => candidates.into_iter().next(),
            Some(rng) => {
                self.scratch.clear();
                self.scratch.extend(candidates);
                self.scratch.choose(rng).copied()
            }
        }
    }

    /// The policy's base order of `0..v`: identity or a seeded shuffle.
    pub(crate) fn base_order(&mut self, v: usize) -> Vec<Point> {
        let mut order: Vec<Point> = (0..v as Point).collect();
        if let Some(rng) = &mut self.rng {
            order.shuffle(rng);
        }
        order
    }

    pub(crate) fn shuffle<T>(&mut self, items: &mut [T]) {
        if let Some(rng) = &mut self.rng {
            items.shuffle(rng);
        }
    }
}
