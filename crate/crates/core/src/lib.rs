//! Steiner triple systems and their ℓ-good point sequencings.
//!
//! - [`design`]: points, blocks, triple systems, the third-point table.
//! - [`format`]: design and sequencing text files.
//! - [`generators`]: Fano, Bose, Skolem and random partial systems.
//! - [`sequencer`]: the ℓ-good verifier, greedy 3- and 4-good
//!   constructions, and exhaustive search.
//! - [`semiseq`]: window partitions and w-semi-sequenceability.
//! - [`census`]: exact and sampled counts of forbidden permutations.
//! - [`cli`]: the `tripleseq` command line.

pub mod census;
pub mod cli;
pub mod design;
pub mod format;
pub mod generators;
pub mod semiseq;
pub mod sequencer;

pub use design::{Block, Kind, Point, Sequencing, ThirdTable, TripleSystem, Verdict, Violation, ViolationKind};
