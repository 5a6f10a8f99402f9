use crate::design::{Block, Sequencing, TripleSystem, Verdict, Violation, ViolationKind};

use super::SequencerError;

pub(crate) fn check_inputs(system: &TripleSystem, seq: &Sequencing, ell: usize) -> Result<(), SequencerError> {
    let v = system.v();
    if seq.len() != v {
        return Err(SequencerError::LengthMismatch { seq_len: seq.len(), v });
    }
    if ell < 3 || ell > v {
        return Err(SequencerError::EllOutOfRange { ell, v });
    }
    Ok(())
}

/// Checks that no window of `ell` consecutive positions contains a block.
///
/// A block fits in such a window iff its positional span
/// (max position − min position) is at most `ell − 1`. On failure the
/// violation with the smallest window start is returned, ties broken by the
/// smallest block.
pub fn verify_ell_good(system: &TripleSystem, seq: &Sequencing, ell: usize) -> Result<Verdict, SequencerError> {
    check_inputs(system, seq, ell)?;
    let pos = seq.positions();
    let mut worst: Option<(usize, Block)> = None;
    for block in system.blocks() {
        let ps = block.points().map(|p| pos[p as usize]);
        let lo = *ps.iter().min().unwrap();
        let hi = *ps.iter().max().unwrap();
        if hi - lo < ell {
            // 1-based start of the earliest window covering [lo, hi]
            let start = (hi + 2).saturating_sub(ell).max(1);
            if worst.map_or(true, |w| (start, *block) < w) {
                worst = Some((start, *block));
            }
        }
    }
    Ok(match worst {
        None => Verdict::Good,
        Some((window_start, block)) => Verdict::Violated(Violation {
            kind: ViolationKind::WindowBlock,
            window_start,
            window_len: ell,
            witness: vec![block],
        }),
    })
}

/// Window-by-window reference check: every triple inside every window is
/// looked up in the block list. Quadratic-plus; meant for cross-checking.
pub fn verify_ell_good_naive(system: &TripleSystem, seq: &Sequencing, ell: usize) -> Result<Verdict, SequencerError> {
    check_inputs(system, seq, ell)?;
    let blocks: std::collections::HashSet<Block> = system.blocks().iter().copied().collect();
    let order = seq.order();
    for start in 0..=order.len() - ell {
        let w = &order[start..start + ell];
        let mut found: Vec<Block> = Vec::new();
        for i in 0..ell {
            for j in i + 1..ell {
                for k in j + 1..ell {
                    let b = Block::new(w[i], w[j], w[k]).expect("window points are distinct");
                    if blocks.contains(&b) {
                        found.push(b);
                    }
                }
            }
        }
        if let Some(b) = found.into_iter().min() {
            return Ok(Verdict::Violated(Violation {
                kind: ViolationKind::WindowBlock,
                window_start: start + 1,
                window_len: ell,
                witness: vec![b],
            }));
        }
    }
    Ok(Verdict::Good)
}
