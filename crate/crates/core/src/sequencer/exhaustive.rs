use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::{Point, SeqMeta, Sequencing, ThirdTable, TripleSystem};

use super::SequencerError;

/// Value order tried at each position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueOrder {
    /// Ascending; the first hit is the lexicographically first ℓ-good sequencing.
    Lex,
    /// A fresh seeded shuffle at every node. Useful for random restarts.
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of placements tried; `None` is unbounded.
    pub budget: Option<u64>,
    pub order: ValueOrder,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: None, order: ValueOrder::Lex }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExhaustiveOutcome {
    Found { sequencing: Sequencing, nodes: u64 },
    /// The whole tree was explored without success.
    NoSequencing { nodes: u64 },
    BudgetExhausted { nodes: u64 },
}

impl ExhaustiveOutcome {
    pub fn nodes(&self) -> u64 {
        match self {
            ExhaustiveOutcome::Found { nodes, .. }
            | ExhaustiveOutcome::NoSequencing { nodes }
            | ExhaustiveOutcome::BudgetExhausted { nodes } => *nodes,
        }
    }

    pub fn sequencing(&self) -> Option<&Sequencing> {
        match self {
            ExhaustiveOutcome::Found { sequencing, .. } => Some(sequencing),
            _ => None,
        }
    }
}

/// Lexicographically first ℓ-good sequencing, or a proof that none exists.
pub fn exhaustive_sequencer(
    system: &TripleSystem,
    ell: usize,
    budget: Option<u64>,
) -> Result<ExhaustiveOutcome, SequencerError> {
    exhaustive_search(system, ell, SearchOptions { budget, order: ValueOrder::Lex })
}

/// Depth-first placement in position order. A branch is cut as soon as a
/// block lies inside the last `ell` placed positions.
///
/// Reversal symmetry is not exploited: with [`ValueOrder::Lex`] the first
/// hit already has `x1 < xv`, and the pruning it would add only bites at the
/// last position.
pub fn exhaustive_search(
    system: &TripleSystem,
    ell: usize,
    opts: SearchOptions,
) -> Result<ExhaustiveOutcome, SequencerError> {
    let v = system.v();
    if ell < 3 || ell > v {
        return Err(SequencerError::EllOutOfRange { ell, v });
    }
    system.ensure_valid()?;
    let table = system.third_table()?;
    let mut search = Search {
        table: &table,
        ell,
        v,
        order: Vec::with_capacity(v),
        used: vec![false; v],
        nodes: 0,
        budget: opts.budget.unwrap_or(u64::MAX),
        rng: match opts.order {
            ValueOrder::Lex => None,
            ValueOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        },
    };
    let outcome = match search.descend() {
        Step::Found => {
            let (method, seed) = match opts.order {
                ValueOrder::Lex => ("exhaustive", None),
                ValueOrder::Shuffled(s) => ("exhaustive-shuffled", Some(s)),
            };
            let mut meta = SeqMeta { method: Some(method.into()), ell: Some(ell), seed, ..Default::default() };
            meta.extra.insert("nodes".into(), search.nodes.to_string());
            ExhaustiveOutcome::Found {
                sequencing: Sequencing::with_meta(search.order, meta)?,
                nodes: search.nodes,
            }
        }
        Step::Exhausted => ExhaustiveOutcome::NoSequencing { nodes: search.nodes },
        Step::OutOfBudget => ExhaustiveOutcome::BudgetExhausted { nodes: search.nodes },
    };
    Ok(outcome)
}

enum Step {
    Found,
    Exhausted,
    OutOfBudget,
}

struct Search<'a> {
    table: &'a ThirdTable,
    ell: usize,
    v: usize,
    order: Vec<Point>,
    used: Vec<bool>,
    nodes: u64,
    budget: u64,
    rng: Option<ChaCha8Rng>,
}

impl Search<'_> {
    /// Thirds of pairs among the last `ell - 1` placed points.
    fn forbidden(&self) -> Vec<Point> {
        let n = self.order.len();
        let tail = &self.order[n.saturating_sub(self.ell - 1)..];
        let mut out = Vec::new();
        for i in 0..tail.len() {
            for j in i + 1..tail.len() {
                if let Some(z) = self.table.get(tail[i], tail[j]) {
                    out.push(z);
                }
            }
        }
        out
    }

    fn descend(&mut self) -> Step {
        if self.order.len() == self.v {
            return Step::Found;
        }
        let forbidden = self.forbidden();
        let mut candidates: Vec<Point> = (0..self.v as Point)
            .filter(|&p| !self.used[p as usize] && !forbidden.contains(&p))
            .collect();
        if let Some(rng) = &mut self.rng {
            candidates.shuffle(rng);
        }
        for p in candidates {
            if self.nodes >= self.budget {
                return Step::OutOfBudget;
            }
            self.nodes += 1;
            self.order.push(p);
            self.used[p as usize] = true;
            match self.descend() {
                Step::Exhausted => {}
                done => return done,
            }
            self.order.pop();
            self.used[p as usize] = false;
        }
        Step::Exhausted
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Kind;
    use crate::generators::{bose, fano, trivial_sts3};
    use crate::sequencer::verify_ell_good;

    /// Lexicographically first ℓ-good permutation by plain enumeration.
    fn brute_first(system: &TripleSystem, ell: usize) -> Option<Vec<Point>> {
        let v = system.v();
        let mut perm: Vec<Point> = (0..v as Point).collect();
        loop {
            let seq = Sequencing::new(perm.clone()).unwrap();
            if verify_ell_good(system, &seq, ell).unwrap().is_good() {
                return Some(perm);
            }
            // lexicographic successor
            let Some(i) = (0..v - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
                return None;
            };
            let j = (i + 1..v).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
    }

    #[test]
    fn fano_3good_matches_brute_force() {
        let f = fano();
        let out = exhaustive_sequencer(&f, 3, None).unwrap();
        let seq = out.sequencing().unwrap();
        assert!(verify_ell_good(&f, seq, 3).unwrap().is_good());
        assert_eq!(Some(seq.order().to_vec()), brute_first(&f, 3));
    }

    #[test]
    fn fano_4good_matches_brute_force() {
        let f = fano();
        let out = exhaustive_sequencer(&f, 4, None).unwrap();
        assert_eq!(out.sequencing().map(|s| s.order().to_vec()), brute_first(&f, 4));
    }

    #[test]
    fn bose1_3good() {
        let b = bose(1);
        let out = exhaustive_sequencer(&b, 3, None).unwrap();
        let seq = out.sequencing().unwrap();
        assert!(verify_ell_good(&b, seq, 3).unwrap().is_good());
        assert_eq!(Some(seq.order().to_vec()), brute_first(&b, 3));
    }

    #[test]
    fn sts3_has_none() {
        let out = exhaustive_sequencer(&trivial_sts3(), 3, None).unwrap();
        assert!(matches!(out, ExhaustiveOutcome::NoSequencing { .. }));
    }

    #[test]
    fn budget_is_reported() {
        let out = exhaustive_sequencer(&bose(2), 7, Some(10)).unwrap();
        assert_eq!(out, ExhaustiveOutcome::BudgetExhausted { nodes: 10 });
    }

    #[test]
    fn blockless_gives_identity() {
        let s = TripleSystem::new(Kind::Psts, 5, vec![]);
        let out = exhaustive_sequencer(&s, 5, None).unwrap();
        assert_eq!(out.sequencing().unwrap().order(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn shuffled_is_seed_deterministic_and_good() {
        let b = bose(1);
        let opts = SearchOptions { budget: None, order: ValueOrder::Shuffled(3) };
        let a = exhaustive_search(&b, 3, opts).unwrap();
        assert_eq!(a, exhaustive_search(&b, 3, opts).unwrap());
        assert!(verify_ell_good(&b, a.sequencing().unwrap(), 3).unwrap().is_good());
    }
}
