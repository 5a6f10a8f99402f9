//! Greedy 4-good construction for full Steiner triple systems.
//!
//! Positions below are 1-based in docs and field names, 0-based in code.
//!
//! Stages:
//! 1. `x1..x11` greedily under the 4-window rule.
//! 2. `Y` (thirds of pairs among `x1..x11` at distance ≤ 3, minus those
//!    points) is pre-placed at positions `14, 16, .., 2m + 12`; the gaps
//!    `12, 13, 15, .., 2m + 11` are filled by the same rule applied to every
//!    already-assigned position, including the pre-placed ones ahead.
//! 3. Plain greedy through `x_{v-3}`.
//! 4. Endgame: the three unplaced points are arranged, a swap partner `x_κ`
//!    with `κ ≤ 8` is found, and positions `v-2, v-1, v` are filled.
//!
//! The look-ahead rule used in stage 2: a point chosen for position `p` must
//! differ from `third(x_q, x_r)` for every pair of assigned positions
//! `q, r ≠ p` with `max(p, q, r) − min(p, q, r) ≤ 3`. Every triple inside a
//! 4-window is thereby checked when its last position is assigned, because
//! no three pre-placed points fit in one 4-window.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::design::{Kind, Point, SeqMeta, Sequencing, ThirdTable, TripleSystem};

use super::{verify_ell_good, Chooser, GreedyPolicy, SequencerError};

/// Number of leading positions whose windows the swap can disturb.
pub const LOOKAHEAD_POINTS: usize = 11;
const SWAP_CANDIDATES: usize = 8;
const MAX_LOOKAHEAD: usize = 27;
/// `2m + 18` with `m = 0`.
const MIN_ORDER: usize = 18;

/// The pre-placed look-ahead points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreplacementPlan {
    /// `y_1..y_m` in ascending point order.
    pub y: Vec<Point>,
}

impl PreplacementPlan {
    pub fn m(&self) -> usize {
        self.y.len()
    }

    /// 1-based positions: `y_j` sits at `2j + 12`.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.y.len()).map(|j| 2 * j + 12)
    }
}

/// Values computed while filling the last three positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndgameState {
    /// Unplaced points after stage 3, in the arrangement that was used.
    pub alpha: [Point; 3],
    /// `third(x_{v-5}, x_{v-4})`, `third(x_{v-5}, x_{v-3})`, `third(x_{v-4}, x_{v-3})`.
    pub beta: [Point; 3],
    /// `third(α2, x_{v-3})`
    pub gamma: Point,
    /// `third(α2, x_{v-4})`
    pub delta: Point,
    /// `third(α3, x_{v-3})`
    pub epsilon: Point,
    /// `third(α2, α3)`
    pub eta: Point,
    /// The point moved to position `v-2`.
    pub chi: Point,
    /// 1-based position in `1..=8` that received `α1`.
    pub kappa: usize,
}

/// A successful 4-good construction with its intermediate data.
#[derive(Clone, Debug)]
pub struct FourGoodRun {
    pub sequencing: Sequencing,
    pub plan: PreplacementPlan,
    pub endgame: EndgameState,
}

/// The ten triples over the last six positions that lie inside a 4-window.
pub fn endgame_triples(order: &[Point]) -> [[Point; 3]; 10] {
    let n = order.len();
    assert!(n >= 6, "need at least six points");
    let tail = &order[n - 6..];
    let mut out = [[0; 3]; 10];
    let mut k = 0;
    for i in 0..6 {
        for j in i + 1..6 {
            for l in j + 1..6 {
                if l - i <= 3 {
                    out[k] = [tail[i], tail[j], tail[l]];
                    k += 1;
                }
            }
        }
    }
    debug_assert_eq!(k, 10);
    out
}

struct Builder<'a> {
    table: &'a ThirdTable,
    v: usize,
    slots: Vec<Option<Point>>,
    used: Vec<bool>,
    chooser: Chooser,
}

impl<'a> Builder<'a> {
    fn assign(&mut self, pos: usize, p: Point) {
        debug_assert!(self.slots[pos].is_none() && !self.used[p as usize]);
        self.slots[pos] = Some(p);
        self.used[p as usize] = true;
    }

    /// Thirds that position `pos` must avoid given the current assignment.
    fn forbidden_at(&self, pos: usize) -> Vec<Point> {
        let lo = pos.saturating_sub(3);
        let hi = (pos + 3).min(self.v - 1);
        let mut out = Vec::new();
        for q in lo..=hi {
            let Some(xq) = self.slots[q] else { continue };
            if q == pos {
                continue;
            }
            for r in q + 1..=hi {
                if r == pos {
                    continue;
                }
                let Some(xr) = self.slots[r] else { continue };
                if r.max(pos) - q.min(pos) > 3 {
                    continue;
                }
                if let Some(z) = self.table.get(xq, xr) {
                    out.push(z);
                }
            }
        }
        out
    }

    fn fill(&mut self, pos: usize, stage: u8) -> Result<Point, SequencerError> {
        let forbidden = self.forbidden_at(pos);
        let used = &self.used;
        let pick = self
            .chooser
            .pick((0..self.v as Point).filter(|&p| !used[p as usize] && !forbidden.contains(&p)));
        match pick {
            Some(p) => {
                self.assign(pos, p);
                Ok(p)
            }
            None => Err(SequencerError::Stuck {
                position: pos + 1,
                state: self.dump(stage, &forbidden),
            }),
        }
    }

    fn dump(&self, stage: u8, forbidden: &[Point]) -> String {
        let mut s = format!("stage {stage}, v = {}\nslots:", self.v);
        for (i, slot) in self.slots.iter().enumerate() {
            match slot {
                Some(p) => {
                    let _ = write!(s, " {}:{p}", i + 1);
                }
                None => {
                    let _ = write!(s, " {}:_", i + 1);
                }
            }
        }
        let _ = write!(s, "\nforbidden thirds: {forbidden:?}");
        s
    }

    fn get(&self, pos: usize) -> Point {
        self.slots[pos].expect("position assigned")
    }
}

fn third(table: &ThirdTable, x: Point, y: Point) -> Result<Point, SequencerError> {
    table
        .get(x, y)
        .ok_or_else(|| SequencerError::Internal(format!("pair {{{x},{y}}} has no third point")))
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), SequencerError> {
    if cond {
        Ok(())
    } else {
        Err(SequencerError::Internal(what()))
    }
}

/// Builds a 4-good sequencing of a full STS.
///
/// Requires `v ≥ 2m + 18`, where `m` is the size of the look-ahead set
/// computed in stage 1; below that the last six positions would overlap the
/// pre-placed region and [`SequencerError::InsufficientOrder`] is returned.
/// `m ≤ 27` always, so every STS with `v > 71` qualifies.
pub fn greedy_4good(system: &TripleSystem, policy: GreedyPolicy) -> Result<FourGoodRun, SequencerError> {
    if system.kind() != Kind::Sts {
        return Err(SequencerError::NotSts);
    }
    system.ensure_valid()?;
    let v = system.v();
    if v < MIN_ORDER {
        return Err(SequencerError::InsufficientOrder { v, m: None, needed: MIN_ORDER });
    }
    let table = system.third_table()?;
    let mut b = Builder {
        table: &table,
        v,
        slots: vec![None; v],
        used: vec![false; v],
        chooser: Chooser::new(policy),
    };

    // stage 1
    for pos in 0..LOOKAHEAD_POINTS {
        b.fill(pos, 1)?;
    }

    // stage 2
    let head: Vec<Point> = (0..LOOKAHEAD_POINTS).map(|i| b.get(i)).collect();
    let mut y = BTreeSet::new();
    for i in 0..LOOKAHEAD_POINTS {
        for j in i + 1..(i + 4).min(LOOKAHEAD_POINTS) {
            let z = third(&table, head[i], head[j])?;
            if !head.contains(&z) {
                y.insert(z);
            }
        }
    }
    let plan = PreplacementPlan { y: y.into_iter().collect() };
    let m = plan.m();
    ensure(m <= MAX_LOOKAHEAD, || format!("look-ahead set has {m} > {MAX_LOOKAHEAD} points"))?;
    let needed = 2 * m + 18;
    if v < needed {
        return Err(SequencerError::InsufficientOrder { v, m: Some(m), needed });
    }
    for (pos1, &yj) in plan.positions().zip(&plan.y) {
        b.assign(pos1 - 1, yj);
    }
    let gaps = std::iter::once(12).chain(std::iter::once(13)).chain((15..=2 * m + 11).step_by(2));
    for pos1 in gaps {
        b.fill(pos1 - 1, 2)?;
    }

    // stage 3
    for pos in 2 * m + 12..v - 3 {
        b.fill(pos, 3)?;
    }
    ensure(b.slots[..v - 3].iter().all(Option::is_some), || {
        format!("positions left open before the endgame\n{}", b.dump(3, &[]))
    })?;

    // stage 4
    let endgame = endgame(&mut b)?;
    let order: Vec<Point> = b.slots.iter().map(|s| s.expect("all positions filled")).collect();

    let mut extra = std::collections::BTreeMap::new();
    extra.insert("policy".to_string(), policy.name().to_string());
    extra.insert("m".to_string(), m.to_string());
    extra.insert("kappa".to_string(), endgame.kappa.to_string());
    let meta = SeqMeta { method: Some("greedy4".into()), ell: Some(4), seed: policy.seed(), extra };
    let sequencing = Sequencing::with_meta(order, meta)?;

    if let Some(violation) = verify_ell_good(system, &sequencing, 4)?.violation() {
        return Err(SequencerError::Internal(format!(
            "greedy4 output fails: {violation}\nplan: {plan:?}\nendgame: {endgame:?}\norder: {:?}",
            sequencing.order()
        )));
    }
    for t in endgame_triples(sequencing.order()) {
        ensure(!table.is_block(t[0], t[1], t[2]), || format!("endgame triple {t:?} is a block"))?;
    }
    Ok(FourGoodRun { sequencing, plan, endgame })
}

fn endgame(b: &mut Builder<'_>) -> Result<EndgameState, SequencerError> {
    let v = b.v;
    let table = b.table;
    let (x5, x4, x3) = (b.get(v - 6), b.get(v - 5), b.get(v - 4));
    let beta = [third(table, x5, x4)?, third(table, x5, x3)?, third(table, x4, x3)?];
    ensure(beta[0] != beta[1] && beta[0] != beta[2] && beta[1] != beta[2], || {
        format!("beta values {beta:?} not distinct")
    })?;

    let free: Vec<Point> = (0..v as Point).filter(|&p| !b.used[p as usize]).collect();
    ensure(free.len() == 3, || format!("expected three unplaced points, found {free:?}"))?;
    const ARRANGEMENTS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let alpha = ARRANGEMENTS
        .iter()
        .map(|ix| ix.map(|i| free[i]))
        .find(|a| a[1] != beta[2] && table.get(a[1], a[2]) != Some(x3))
        .ok_or_else(|| SequencerError::Internal(format!("no arrangement of {free:?} avoids beta3 = {}", beta[2])))?;

    let gamma = third(table, alpha[1], x3)?;
    let delta = third(table, alpha[1], x4)?;
    let epsilon = third(table, alpha[2], x3)?;
    let eta = third(table, alpha[1], alpha[2])?;
    let avoid = [beta[0], beta[1], beta[2], gamma, delta, epsilon, eta];

    let k = (0..SWAP_CANDIDATES)
        .find(|&k| !avoid.contains(&b.get(k)))
        .ok_or_else(|| SequencerError::Internal(format!("all of x1..x8 lie in {avoid:?}")))?;
    let chi = b.get(k);
    ensure(![x5, x4, x3].contains(&chi), || format!("chi = {chi} repeats a tail point"))?;

    b.slots[k] = Some(alpha[0]);
    b.slots[v - 3] = Some(chi);
    b.slots[v - 2] = Some(alpha[1]);
    b.slots[v - 1] = Some(alpha[2]);
    for a in alpha {
        b.used[a as usize] = true;
    }

    Ok(EndgameState { alpha, beta, gamma, delta, epsilon, eta, chi, kappa: k + 1 })
}
