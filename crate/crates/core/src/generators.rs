//! Concrete STS and PSTS instances.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::{Block, Kind, Point, TripleSystem};

fn block(a: usize, b: usize, c: usize) -> Block {
    Block::new(a as Point, b as Point, c as Point).expect("generator produced a degenerate triple")
}

/// The cyclic Fano plane: translates of `{0, 1, 3}` mod 7.
pub fn fano() -> TripleSystem {
    let blocks = (0..7).map(|i| block(i, (i + 1) % 7, (i + 3) % 7)).collect();
    TripleSystem::new(Kind::Sts, 7, blocks)
}

/// The unique STS(3), a single block.
pub fn trivial_sts3() -> TripleSystem {
    TripleSystem::new(Kind::Sts, 3, vec![block(0, 1, 2)])
}

/// Bose construction of an STS(6n + 3).
///
/// Points are `(x, i)` with `x` in `Z_{2n+1}` and `i` in `Z_3`, indexed as
/// `x + i * (2n + 1)`. Uses the idempotent commutative quasigroup
/// `x ∘ y = (x + y) / 2` over `Z_{2n+1}`.
pub fn bose(n: usize) -> TripleSystem {
    assert!(n >= 1, "bose(n) needs n >= 1");
    let q = 2 * n + 1;
    let half = (q + 1) / 2;
    let op = |x: usize, y: usize| (x + y) * half % q;
    let pt = |x: usize, i: usize| x + (i % 3) * q;

    let mut blocks = Vec::with_capacity(q * (3 * q - 1) / 2);
    for x in 0..q {
        blocks.push(block(pt(x, 0), pt(x, 1), pt(x, 2)));
    }
    for x in 0..q {
        for y in x + 1..q {
            for i in 0..3 {
                blocks.push(block(pt(x, i), pt(y, i), pt(op(x, y), i + 1)));
            }
        }
    }
    TripleSystem::new(Kind::Sts, 3 * q, blocks)
}

/// Skolem construction of an STS(6n + 1).
///
/// Points are `(x, i)` with `x` in `Z_{2n}`, `i` in `Z_3`, indexed as
/// `x + i * 2n`, plus a point at infinity with index `6n`. The half-idempotent
/// commutative quasigroup is `x ∘ y = σ(x + y mod 2n)` with `σ(2k) = k` and
/// `σ(2k + 1) = n + k`, so `x ∘ x = (x + n) ∘ (x + n) = x` for `x < n`.
pub fn skolem(n: usize) -> TripleSystem {
    assert!(n >= 1, "skolem(n) needs n >= 1");
    let m = 2 * n;
    let sigma = |s: usize| if s % 2 == 0 { s / 2 } else { n + s / 2 };
    let op = |x: usize, y: usize| sigma((x + y) % m);
    let pt = |x: usize, i: usize| x + (i % 3) * m;
    let inf = 3 * m;

    let mut blocks = Vec::with_capacity(n * (6 * n + 1));
    for x in 0..n {
        blocks.push(block(pt(x, 0), pt(x, 1), pt(x, 2)));
        for i in 0..3 {
            blocks.push(block(inf, pt(x + n, i), pt(x, i + 1)));
        }
    }
    for x in 0..m {
        for y in x + 1..m {
            for i in 0..3 {
                blocks.push(block(pt(x, i), pt(y, i), pt(op(x, y), i + 1)));
            }
        }
    }
    TripleSystem::new(Kind::Sts, 3 * m + 1, blocks)
}

/// STS of order `v` from whichever of Bose/Skolem applies, for `v >= 7`.
pub fn sts(v: usize) -> Option<TripleSystem> {
    match v % 6 {
        1 if v >= 7 => Some(skolem((v - 1) / 6)),
        3 if v >= 9 => Some(bose((v - 3) / 6)),
        3 if v == 3 => Some(trivial_sts3()),
        _ => None,
    }
}

/// Result of [`random_psts`].
#[derive(Clone, Debug)]
pub struct Packing {
    pub system: TripleSystem,
    pub target: usize,
    pub achieved: usize,
}

/// Seeded random greedy packing: shuffle all triples of `0..v`, then accept
/// each triple whose pairs are all still free until `target_blocks` are in.
pub fn random_psts(v: usize, target_blocks: usize, seed: u64) -> Packing {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for a in 0..v {
        for b in a + 1..v {
            for c in b + 1..v {
                triples.push((a, b, c));
            }
        }
    }
    triples.shuffle(&mut rng);

    let mut used = vec![false; v * v];
    let mut blocks = Vec::new();
    for (a, b, c) in triples {
        if blocks.len() >= target_blocks {
            break;
        }
        if used[a * v + b] || used[a * v + c] || used[b * v + c] {
            continue;
        }
        used[a * v + b] = true;
        used[a * v + c] = true;
        used[b * v + c] = true;
        blocks.push(block(a, b, c));
    }
    let achieved = blocks.len();
    Packing { system: TripleSystem::new(Kind::Psts, v, blocks), target: target_blocks, achieved }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fano_is_sts7() {
        let f = fano();
        assert!(f.is_valid());
        assert_eq!(f.blocks().len(), 7);
        assert_eq!(f.third_table().unwrap().uncovered_ordered_pairs(), 0);
    }

    #[test]
    fn small_bose_and_skolem() {
        let b = bose(1);
        assert_eq!((b.v(), b.blocks().len()), (9, 12));
        assert!(b.is_valid());
        let s = skolem(1);
        assert_eq!((s.v(), s.blocks().len()), (7, 7));
        assert!(s.is_valid());
        assert_eq!(bose(12).v(), 75);
        assert_eq!(skolem(12).v(), 73);
    }

    #[test]
    fn generated_orders_are_valid() {
        for n in 1..=20 {
            let b = bose(n);
            assert_eq!(b.v() % 6, 3);
            assert!(b.is_valid(), "bose({n}): {:?}", b.validate());
            let s = skolem(n);
            assert_eq!(s.v() % 6, 1);
            assert!(s.is_valid(), "skolem({n}): {:?}", s.validate());
        }
    }

    #[test]
    fn sts_by_order() {
        assert_eq!(sts(3).unwrap().blocks().len(), 1);
        assert_eq!(sts(13).unwrap().v(), 13);
        assert_eq!(sts(15).unwrap().v(), 15);
        assert!(sts(11).is_none());
    }

    #[test]
    fn random_psts_is_valid_and_bounded() {
        assert!(random_psts(4, 0, 1).system.blocks().is_empty());
        for seed in 0..100 {
            let p = random_psts(7, 7, seed);
            assert!(p.system.is_valid(), "seed {seed}");
            assert!(p.achieved <= 7);
            if p.achieved == 7 {
                assert!(p.system.with_kind(Kind::Sts).is_valid());
            }
            let q = random_psts(9, 100, seed);
            assert!(q.achieved <= 12);
            assert!(q.system.is_valid());
        }
    }

    #[test]
    fn random_psts_is_deterministic() {
        assert_eq!(random_psts(12, 15, 42).system, random_psts(12, 15, 42).system);
    }
}
