//! Counting forbidden permutations.
//!
//! A permutation is *i-forbidden* when its window of `ell` positions
//! starting at `i` (1-based) contains a block, and *forbidden* when it is
//! i-forbidden for some `i`. With `ell = 3` the good permutations are
//! exactly the 3-good sequencings, and for an STS each `forbidden(i)` has
//! size `v!/(v-2)`.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::design::{DesignError, Point, ThirdTable, TripleSystem};

/// Largest order enumerated without an explicit override (9! = 362880).
pub const DEFAULT_CAP: usize = 9;

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("v = {v} exceeds the enumeration cap {cap}")]
    CapExceeded { v: usize, cap: usize },
    #[error("ell = {ell} is outside 3..={v}")]
    EllOutOfRange { ell: usize, v: usize },
    #[error("need at least one sample")]
    NoSamples,
    #[error("need at least one worker")]
    NoWorkers,
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// A frequency with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    /// Binomial proportion `hits / n`.
    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Estimate { mean: p, std_err: (p * (1.0 - p) / n as f64).sqrt() }
    }

    /// Whether `target` lies within `k` standard errors.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CensusMode {
    Exact,
    MonteCarlo {
        samples: u64,
        seed: u64,
        workers: usize,
        /// Per-window forbidden frequency averaged over all windows, with a
        /// standard error from the per-sample spread.
        pooled: Estimate,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusReport {
    pub v: usize,
    pub ell: usize,
    pub total_permutations: BigUint,
    /// Index `i - 1` holds the count for window start `i`. Exact counts in
    /// exact mode, sample hits in Monte Carlo mode.
    pub per_i_forbidden: Vec<u64>,
    pub total_forbidden: u64,
    pub mode: CensusMode,
    /// Prefix `a b c d e` from blocks `{a,b,c}`, `{c,d,e}` meeting in one
    /// point; any permutation starting with it is 1- and 3-forbidden.
    /// Present for `ell = 3` when such blocks exist.
    pub witness: Option<[Point; 5]>,
}

impl CensusReport {
    pub fn is_exact(&self) -> bool {
        self.mode == CensusMode::Exact
    }

    /// Number of samples (Monte Carlo) or `v!` (exact).
    fn population(&self) -> f64 {
        match &self.mode {
            CensusMode::Exact => self.total_permutations.to_f64().unwrap_or(f64::INFINITY),
            CensusMode::MonteCarlo { samples, .. } => *samples as f64,
        }
    }

    pub fn sum_per_i(&self) -> u64 {
        self.per_i_forbidden.iter().sum()
    }

    /// `v! - |forbidden|`, exact mode only.
    pub fn good_count(&self) -> Option<BigUint> {
        self.is_exact().then(|| &self.total_permutations - BigUint::from(self.total_forbidden))
    }

    pub fn per_i_estimates(&self) -> Vec<Estimate> {
        match &self.mode {
            CensusMode::Exact => {
                let n = self.population();
                self.per_i_forbidden.iter().map(|&c| Estimate { mean: c as f64 / n, std_err: 0.0 }).collect()
            }
            CensusMode::MonteCarlo { samples, .. } => {
                self.per_i_forbidden.iter().map(|&c| Estimate::proportion(c, *samples)).collect()
            }
        }
    }

    pub fn forbidden_estimate(&self) -> Estimate {
        match &self.mode {
            CensusMode::Exact => Estimate { mean: self.total_forbidden as f64 / self.population(), std_err: 0.0 },
            CensusMode::MonteCarlo { samples, .. } => Estimate::proportion(self.total_forbidden, *samples),
        }
    }

    /// `|forbidden| < Σ |forbidden(i)|`: the union bound is not tight.
    pub fn union_bound_strict(&self) -> bool {
        self.total_forbidden < self.sum_per_i()
    }

    /// Machine-readable `key=value` lines with stable names.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "v={}", self.v);
        let _ = writeln!(s, "ell={}", self.ell);
        let _ = writeln!(s, "total_permutations={}", self.total_permutations);
        match &self.mode {
            CensusMode::Exact => {
                let _ = writeln!(s, "mode=exact");
                for (i, c) in self.per_i_forbidden.iter().enumerate() {
                    let _ = writeln!(s, "forbidden_{}={c}", i + 1);
                }
                let _ = writeln!(s, "sum_per_i={}", self.sum_per_i());
                let _ = writeln!(s, "total_forbidden={}", self.total_forbidden);
                let _ = writeln!(s, "good_count={}", self.good_count().unwrap());
                let _ = writeln!(s, "union_bound_strict={}", self.union_bound_strict());
            }
            CensusMode::MonteCarlo { samples, seed, workers, pooled } => {
                let _ = writeln!(s, "mode=monte_carlo");
                let _ = writeln!(s, "samples={samples}");
                let _ = writeln!(s, "seed={seed}");
                let _ = writeln!(s, "workers={workers}");
                for (i, (c, e)) in self.per_i_forbidden.iter().zip(self.per_i_estimates()).enumerate() {
                    let _ = writeln!(s, "forbidden_hits_{}={c}", i + 1);
                    let _ = writeln!(s, "forbidden_freq_{}={:.6}", i + 1, e.mean);
                    let _ = writeln!(s, "forbidden_se_{}={:.6}", i + 1, e.std_err);
                }
                let f = self.forbidden_estimate();
                let _ = writeln!(s, "total_forbidden_hits={}", self.total_forbidden);
                let _ = writeln!(s, "total_forbidden_freq={:.6}", f.mean);
                let _ = writeln!(s, "total_forbidden_se={:.6}", f.std_err);
                let _ = writeln!(s, "pooled_freq={:.6}", pooled.mean);
                let _ = writeln!(s, "pooled_se={:.6}", pooled.std_err);
            }
        }
        if let Some(w) = self.witness {
            let _ = writeln!(s, "witness_prefix={} {} {} {} {}", w[0], w[1], w[2], w[3], w[4]);
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let windows = self.per_i_forbidden.len();
        match &self.mode {
            CensusMode::Exact => {
                let _ = writeln!(
                    s,
                    "exact census of {} permutations (v = {}, ell = {}, {windows} windows)",
                    self.total_permutations, self.v, self.ell
                );
                for (i, c) in self.per_i_forbidden.iter().enumerate() {
                    let _ = writeln!(s, "  |forbidden({})| = {c}", i + 1);
                }
                let _ = writeln!(
                    s,
                    "  |forbidden| = {} (union bound {}), good = {}",
                    self.total_forbidden,
                    self.sum_per_i(),
                    self.good_count().unwrap()
                );
            }
            CensusMode::MonteCarlo { samples, seed, pooled, .. } => {
                let _ = writeln!(
                    s,
                    "monte carlo census, {samples} samples, seed {seed} (v = {}, ell = {})",
                    self.v, self.ell
                );
                for (i, e) in self.per_i_estimates().iter().enumerate() {
                    let _ = writeln!(s, "  Pr[{}-forbidden] = {:.6} ± {:.6}", i + 1, e.mean, e.std_err);
                }
                let f = self.forbidden_estimate();
                let _ = writeln!(s, "  Pr[forbidden] = {:.6} ± {:.6}", f.mean, f.std_err);
                let _ = writeln!(s, "  pooled per-window = {:.6} ± {:.6}", pooled.mean, pooled.std_err);
            }
        }
        if let Some(w) = self.witness {
            let _ = writeln!(s, "  1- and 3-forbidden prefix: {} {} {} {} {}", w[0], w[1], w[2], w[3], w[4]);
        }
        s
    }
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

fn intersecting_witness(system: &TripleSystem) -> Option<[Point; 5]> {
    let blocks = system.blocks();
    for (i, p) in blocks.iter().enumerate() {
        for q in &blocks[i + 1..] {
            let shared: Vec<Point> = p.points().into_iter().filter(|&x| q.contains(x)).collect();
            if let [c] = shared[..] {
                let [a, b] = <[Point; 2]>::try_from(
                    p.points().into_iter().filter(|&x| x != c).collect::<Vec<_>>(),
                )
                .unwrap();
                let [d, e] = <[Point; 2]>::try_from(
                    q.points().into_iter().filter(|&x| x != c).collect::<Vec<_>>(),
                )
                .unwrap();
                return Some([a, b, c, d, e]);
            }
        }
    }
    None
}

/// Marks which windows of `perm` contain a block; returns how many did.
#[inline]
fn scan(table: &ThirdTable, perm: &[Point], ell: usize, hits: &mut [u64]) -> u32 {
    let mut k = 0;
    for (i, hit) in hits.iter_mut().enumerate() {
        let forbidden = if ell == 3 {
            table.get(perm[i], perm[i + 1]) == Some(perm[i + 2])
        } else {
            table.contains_block(&perm[i..i + ell])
        };
        if forbidden {
            *hit += 1;
            k += 1;
        }
    }
    k
}

fn next_permutation(a: &mut [Point]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| a[i] < a[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| a[j] > a[i]).unwrap();
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

fn check(system: &TripleSystem, ell: usize) -> Result<ThirdTable, CensusError> {
    let v = system.v();
    if ell < 3 || ell > v {
        return Err(CensusError::EllOutOfRange { ell, v });
    }
    system.ensure_valid()?;
    Ok(system.third_table()?)
}

/// Enumerates all `v!` permutations. The space is split by first point
/// and the parts are counted in parallel; counts are additive.
pub fn census_exact(system: &TripleSystem, ell: usize, cap: usize) -> Result<CensusReport, CensusError> {
    let v = system.v();
    if v > cap {
        return Err(CensusError::CapExceeded { v, cap });
    }
    let table = check(system, ell)?;
    let windows = v + 1 - ell;

    let (per_i, total) = (0..v as Point)
        .into_par_iter()
        .map(|first| {
            let mut perm: Vec<Point> = std::iter::once(first).chain((0..v as Point).filter(|&p| p != first)).collect();
            let mut hits = vec![0u64; windows];
            let mut total = 0u64;
            loop {
                if scan(&table, &perm, ell, &mut hits) > 0 {
                    total += 1;
                }
                if !next_permutation(&mut perm[1..]) {
                    break;
                }
            }
            (hits, total)
        })
        .reduce(
            || (vec![0u64; windows], 0u64),
            |(mut a, ta), (b, tb)| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                (a, ta + tb)
            },
        );

    Ok(CensusReport {
        v,
        ell,
        total_permutations: factorial(v),
        per_i_forbidden: per_i,
        total_forbidden: total,
        mode: CensusMode::Exact,
        witness: if ell == 3 { intersecting_witness(system) } else { None },
    })
}

/// Single-worker Monte Carlo census.
pub fn census_sample(system: &TripleSystem, ell: usize, samples: u64, seed: u64) -> Result<CensusReport, CensusError> {
    census_sample_parallel(system, ell, samples, seed, 1)
}

/// Uniform random permutations split over `workers`; worker `w` draws from
/// ChaCha8 stream `w` of `seed`, so results depend only on
/// `(seed, samples, workers)`.
pub fn census_sample_parallel(
    system: &TripleSystem,
    ell: usize,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<CensusReport, CensusError> {
    if samples == 0 {
        return Err(CensusError::NoSamples);
    }
    if workers == 0 {
        return Err(CensusError::NoWorkers);
    }
    let table = check(system, ell)?;
    let v = system.v();
    let windows = v + 1 - ell;

    struct Tally {
        hits: Vec<u64>,
        forbidden: u64,
        sum_k: u64,
        sum_k2: u64,
    }

    let tallies: Vec<Tally> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let n = samples / workers as u64 + u64::from((w as u64) < samples % workers as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            let mut perm: Vec<Point> = (0..v as Point).collect();
            let mut t = Tally { hits: vec![0; windows], forbidden: 0, sum_k: 0, sum_k2: 0 };
            for _ in 0..n {
                perm.shuffle(&mut rng);
                let k = scan(&table, &perm, ell, &mut t.hits) as u64;
                t.forbidden += u64::from(k > 0);
                t.sum_k += k;
                t.sum_k2 += k * k;
            }
            t
        })
        .collect();

    let mut hits = vec![0u64; windows];
    let (mut forbidden, mut sum_k, mut sum_k2) = (0u64, 0u64, 0u64);
    for t in tallies {
        hits.iter_mut().zip(&t.hits).for_each(|(a, b)| *a += b);
        forbidden += t.forbidden;
        sum_k += t.sum_k;
        sum_k2 += t.sum_k2;
    }
    let n = samples as f64;
    let w = windows as f64;
    let mean_k = sum_k as f64 / n;
    let var_k = if samples > 1 { (sum_k2 as f64 - n * mean_k * mean_k) / (n - 1.0) } else { 0.0 };
    let pooled = Estimate { mean: mean_k / w, std_err: (var_k.max(0.0) / n).sqrt() / w };

    Ok(CensusReport {
        v,
        ell,
        total_permutations: factorial(v),
        per_i_forbidden: hits,
        total_forbidden: forbidden,
        mode: CensusMode::MonteCarlo { samples, seed, workers, pooled },
        witness: if ell == 3 { intersecting_witness(system) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Kind;
    use crate::generators::{fano, trivial_sts3};

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigUint::one());
        assert_eq!(factorial(7), BigUint::from(5040u32));
        assert_eq!(factorial(25).to_string(), "15511210043330985984000000");
    }

    #[test]
    fn successor_enumerates_all() {
        let mut a = [0, 1, 2, 3];
        let mut n = 1;
        while next_permutation(&mut a) {
            n += 1;
        }
        assert_eq!(n, 24);
        assert_eq!(a, [3, 2, 1, 0]);
    }

    #[test]
    fn fano_exact() {
        let r = census_exact(&fano(), 3, DEFAULT_CAP).unwrap();
        assert_eq!(r.per_i_forbidden, vec![1008; 5]);
        assert!(r.total_forbidden < 5040);
        assert!(r.union_bound_strict());
        let w = r.witness.unwrap();
        let t = fano().third_table().unwrap();
        assert!(t.is_block(w[0], w[1], w[2]) && t.is_block(w[2], w[3], w[4]));
    }

    #[test]
    fn sts3_all_forbidden() {
        let r = census_exact(&trivial_sts3(), 3, DEFAULT_CAP).unwrap();
        assert_eq!(r.per_i_forbidden, vec![6]);
        assert_eq!(r.good_count().unwrap(), BigUint::from(0u32));
        assert_eq!(r.witness, None);
    }

    #[test]
    fn cap_enforced() {
        let s = TripleSystem::new(Kind::Psts, 10, vec![]);
        assert!(matches!(census_exact(&s, 3, DEFAULT_CAP), Err(CensusError::CapExceeded { v: 10, cap: 9 })));
    }

    #[test]
    fn blockless_samples_never_forbidden() {
        let s = TripleSystem::new(Kind::Psts, 8, vec![]);
        let r = census_sample(&s, 3, 1000, 1).unwrap();
        assert_eq!(r.forbidden_estimate().mean, 0.0);
    }

    #[test]
    fn sampling_reproducible_per_seed_and_workers() {
        let f = fano();
        let a = census_sample_parallel(&f, 3, 5000, 7, 3).unwrap();
        let b = census_sample_parallel(&f, 3, 5000, 7, 3).unwrap();
        assert_eq!(a, b);
        let one = census_sample(&f, 3, 5000, 7).unwrap();
        assert_eq!(one.per_i_forbidden.iter().sum::<u64>() > 0, true);
    }

    #[test]
    fn key_values_are_stable() {
        let r = census_exact(&fano(), 3, DEFAULT_CAP).unwrap();
        let kv = r.to_key_values();
        assert!(kv.starts_with("v=7\nell=3\ntotal_permutations=5040\nmode=exact\nforbidden_1=1008\n"));
        assert!(kv.contains("sum_per_i=5040\n"));
    }

    #[test]
    fn ell4_counts_are_consistent() {
        let r = census_exact(&fano(), 4, DEFAULT_CAP).unwrap();
        assert_eq!(r.per_i_forbidden.len(), 4);
        assert!(r.total_forbidden <= r.sum_per_i());
        assert!(r.witness.is_none());
    }
}
