//! Acceptance gate. Run with `cargo test -p tripleseq --test acceptance`.
//! Prints one line per criterion and exits nonzero if any fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tripleseq::census::{census_exact, census_sample, DEFAULT_CAP};
use tripleseq::generators::{bose, fano, random_psts, skolem, trivial_sts3};
use tripleseq::semiseq::{check_theorem_2u1, TheoremCheck};
use tripleseq::sequencer::{
    exhaustive_search, exhaustive_sequencer, greedy_3good, greedy_4good, verify_ell_good, verify_ell_good_naive,
    ExhaustiveOutcome, GreedyPolicy, SearchOptions, ValueOrder,
};
use tripleseq::{Block, Point, Sequencing, TripleSystem, Verdict};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(limit: Duration, took: Duration, what: &str) -> Result<(), String> {
    if took < limit {
        Ok(())
    } else {
        Err(format!("{what} took {took:?}, limit {limit:?}"))
    }
}

fn block_set(system: &TripleSystem) -> HashSet<[Point; 3]> {
    system.blocks().iter().map(|b| b.points()).collect()
}

fn sorted3(mut t: [Point; 3]) -> [Point; 3] {
    t.sort_unstable();
    t
}

/// Good permutations counted by running the verifier on each one.
fn recount_good(system: &TripleSystem) -> u64 {
    let v = system.v();
    let mut perm: Vec<Point> = (0..v as Point).collect();
    let mut good = 0;
    loop {
        if verify_ell_good(system, &Sequencing::new(perm.clone()).unwrap(), 3).unwrap().is_good() {
            good += 1;
        }
        let Some(i) = (0..v - 1).rev().find(|&i| perm[i] < perm[i + 1]) else { return good };
        let j = (i + 1..v).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

fn c1_fano_example() -> Check {
    let f = fano();
    let id = Sequencing::identity(7);
    let start = Instant::now();
    let at3 = verify_ell_good(&f, &id, 3).map_err(|e| e.to_string())?;
    let at4 = verify_ell_good(&f, &id, 4).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure!(at3 == Verdict::Good, "ell=3 gave {at3:?}");
    let v = at4.violation().ok_or("ell=4 reported good")?;
    ensure!(v.window_start == 1, "window start {}", v.window_start);
    ensure!(v.witness == vec![Block::new(0, 1, 3).unwrap()], "witness {:?}", v.witness);
    within(Duration::from_millis(1), took, "two verifications")?;
    Ok(format!("ell=3 good, ell=4 {v}, {took:?}"))
}

fn c2_counting_identity() -> Check {
    let mut notes = Vec::new();
    for (name, system, per_i, limit) in
        [("fano", fano(), 1008u64, Duration::from_secs(1)), ("bose(1)", bose(1), 51840, Duration::from_secs(30))]
    {
        let start = Instant::now();
        let r = census_exact(&system, 3, DEFAULT_CAP).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        ensure!(r.per_i_forbidden.iter().all(|&c| c == per_i), "{name}: per-i {:?}", r.per_i_forbidden);
        ensure!(r.per_i_forbidden.len() == system.v() - 2, "{name}: {} windows", r.per_i_forbidden.len());
        let good = r.good_count().unwrap();
        ensure!(r.total_permutations > r.total_forbidden.into(), "{name}: every permutation forbidden");
        ensure!(r.total_forbidden < r.sum_per_i(), "{name}: union bound tight");
        ensure!(good > 0u32.into(), "{name}: no good permutations");
        within(limit, took, name)?;
        let recount = recount_good(&system);
        ensure!(good == recount.into(), "{name}: good {good} vs recount {recount}");
        notes.push(format!("{name} total={} good={good} {took:.2?}", r.total_forbidden));
    }
    Ok(notes.join("; "))
}

fn c3_psts_strict() -> Check {
    let mut used = Vec::new();
    let mut seed = 0u64;
    while used.len() < 20 {
        let p = random_psts(7, 7, seed);
        if p.system.blocks().len() < 7 {
            let r = census_exact(&p.system, 3, DEFAULT_CAP).map_err(|e| e.to_string())?;
            ensure!(
                r.per_i_forbidden.iter().all(|&c| c < 1008),
                "seed {seed} ({} blocks): per-i {:?}",
                p.system.blocks().len(),
                r.per_i_forbidden
            );
            used.push(seed);
        }
        seed += 1;
    }
    Ok(format!("20 packings, seeds {}..={}", used[0], used[19]))
}

fn c4_greedy3() -> Check {
    let start = Instant::now();
    let mut systems: Vec<(String, TripleSystem)> = Vec::new();
    for n in 1..=16 {
        systems.push((format!("bose({n})"), bose(n)));
        systems.push((format!("skolem({n})"), skolem(n)));
    }
    for s in 0..100u64 {
        let v = 8 + (s % 23) as usize;
        systems.push((format!("psts({v}) seed {s}"), random_psts(v, v * (v - 1) / 6, s).system));
    }
    let mut runs = 0;
    for (name, system) in &systems {
        for policy in [GreedyPolicy::LexSmallest, GreedyPolicy::SeededRandom(7)] {
            let seq = greedy_3good(system, policy).map_err(|e| format!("{name}: {e}"))?;
            let verdict = verify_ell_good(system, &seq, 3).map_err(|e| e.to_string())?;
            ensure!(verdict.is_good(), "{name} {}: {verdict:?}", policy.name());
            runs += 1;
        }
    }
    let took = start.elapsed();
    within(Duration::from_secs(60), took, "suite")?;
    Ok(format!("{runs}/{runs} runs good, {took:.2?}"))
}

fn four_good_systems() -> Vec<TripleSystem> {
    (12..=16).flat_map(|n| [skolem(n), bose(n)]).collect()
}

fn c5_greedy4() -> Check {
    let start = Instant::now();
    let (mut ok, mut max_m, mut max_kappa) = (0, 0, 0);
    let mut orders = Vec::new();
    for system in four_good_systems() {
        orders.push(system.v());
        for seed in 0..25 {
            let run = greedy_4good(&system, GreedyPolicy::SeededRandom(seed))
                .map_err(|e| format!("v={} seed {seed}: {e}", system.v()))?;
            let verdict = verify_ell_good(&system, &run.sequencing, 4).map_err(|e| e.to_string())?;
            ensure!(verdict.is_good(), "v={} seed {seed}: {verdict:?}", system.v());
            ensure!(run.plan.m() <= 27, "v={} seed {seed}: m={}", system.v(), run.plan.m());
            ensure!((1..=8).contains(&run.endgame.kappa), "v={} seed {seed}: kappa={}", system.v(), run.endgame.kappa);
            max_m = max_m.max(run.plan.m());
            max_kappa = max_kappa.max(run.endgame.kappa);
            ok += 1;
        }
    }
    orders.sort_unstable();
    ensure!(orders == [73, 75, 79, 81, 85, 87, 91, 93, 97, 99], "orders {orders:?}");
    let took = start.elapsed();
    within(Duration::from_secs(120), took, "suite")?;
    Ok(format!("{ok}/250 good, max m={max_m}, max kappa={max_kappa}, {took:.2?}"))
}

/// Index triples over the last six positions that fit in 4 consecutive places.
const ENDGAME: [[usize; 3]; 10] = [
    [0, 1, 2],
    [0, 1, 3],
    [0, 2, 3],
    [1, 2, 3],
    [1, 2, 4],
    [1, 3, 4],
    [2, 3, 4],
    [2, 3, 5],
    [2, 4, 5],
    [3, 4, 5],
];

fn c6_endgame() -> Check {
    let mut checked = 0;
    for system in four_good_systems() {
        let blocks = block_set(&system);
        for seed in 0..25 {
            let run = greedy_4good(&system, GreedyPolicy::SeededRandom(seed)).map_err(|e| e.to_string())?;
            let order = run.sequencing.order();
            let tail = &order[order.len() - 6..];
            for idx in ENDGAME {
                let t = sorted3([tail[idx[0]], tail[idx[1]], tail[idx[2]]]);
                ensure!(!blocks.contains(&t), "v={} seed {seed}: block {t:?} at tail {idx:?}", system.v());
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} endgame triples, none a block"))
}

fn c7_exhaustive() -> Check {
    let start = Instant::now();
    for (name, system) in [("fano", fano()), ("bose(1)", bose(1))] {
        let out = exhaustive_sequencer(&system, 3, None).map_err(|e| e.to_string())?;
        let seq = out.sequencing().ok_or(format!("{name}: {out:?}"))?;
        ensure!(verify_ell_good(&system, seq, 3).unwrap().is_good(), "{name}: found sequencing is not 3-good");
    }
    let out = exhaustive_sequencer(&trivial_sts3(), 3, None).map_err(|e| e.to_string())?;
    ensure!(matches!(out, ExhaustiveOutcome::NoSequencing { .. }), "v=3: {out:?}");
    let out = exhaustive_sequencer(&fano(), 4, None).map_err(|e| e.to_string())?;
    let answer = match &out {
        ExhaustiveOutcome::NoSequencing { nodes } => format!("fano ell=4 none ({nodes} nodes)"),
        other => return Err(format!("fano ell=4: expected none, got {other:?}")),
    };
    let took = start.elapsed();
    within(Duration::from_secs(60), took, "exhaustive runs")?;
    Ok(format!("{answer}, {took:.2?}"))
}

fn theorem_on(system: &TripleSystem, seq: &Sequencing, label: &str) -> Result<(), String> {
    match check_theorem_2u1(system, seq, 2).map_err(|e| format!("{label}: {e}"))? {
        TheoremCheck::Pass => Ok(()),
        TheoremCheck::Counterexample(c) => {
            let path = std::env::temp_dir().join(format!("tripleseq-counterexample-{label}.txt"));
            let _ = std::fs::write(&path, c.to_text());
            Err(format!("{label}: counterexample written to {}", path.display()))
        }
    }
}

fn c8_theorem() -> Check {
    let s13 = skolem(2);
    let budget = Some(100_000_000);
    let out = exhaustive_sequencer(&s13, 5, budget).map_err(|e| e.to_string())?;
    let mut found = 0;
    let s13_note = match &out {
        ExhaustiveOutcome::Found { sequencing, .. } => {
            theorem_on(&s13, sequencing, "skolem2-lex")?;
            found += 1;
            "skolem(2) found".to_string()
        }
        ExhaustiveOutcome::NoSequencing { nodes } => format!("skolem(2) none ({nodes} nodes)"),
        ExhaustiveOutcome::BudgetExhausted { nodes } => return Err(format!("skolem(2) budget exhausted at {nodes}")),
    };
    let b15 = bose(2);
    let mut distinct = HashSet::new();
    let orders = std::iter::once(ValueOrder::Lex).chain((0..30).map(ValueOrder::Shuffled));
    for order in orders {
        let out = exhaustive_search(&b15, 5, SearchOptions { budget: Some(10_000_000), order })
            .map_err(|e| e.to_string())?;
        if let Some(seq) = out.sequencing() {
            theorem_on(&b15, seq, &format!("bose2-{order:?}"))?;
            found += 1;
            distinct.insert(seq.order().to_vec());
        }
    }
    ensure!(found > 0, "no 5-good sequencing was tested");
    Ok(format!("{s13_note}; {found} 5-good sequencings of bose(2) ({} distinct) all pass", distinct.len()))
}

fn c9_monte_carlo() -> Check {
    const SEED: u64 = 20;
    let mut notes = Vec::new();
    for (name, system, target) in [("fano", fano(), 0.2), ("bose(2)", bose(2), 1.0 / 13.0)] {
        let r = census_sample(&system, 3, 1_000_000, SEED).map_err(|e| e.to_string())?;
        let mut worst: f64 = 0.0;
        for (i, e) in r.per_i_estimates().iter().enumerate() {
            ensure!(e.within(target, 3.0), "{name} i={}: {:.5} ± {:.5} vs {target:.5}", i + 1, e.mean, e.std_err);
            worst = worst.max((e.mean - target).abs() / e.std_err);
        }
        notes.push(format!("{name} worst {worst:.2} s.e."));
    }
    Ok(notes.join("; "))
}

/// First window (in start order) whose points contain a block, and the
/// smallest such block; found by testing every triple of every window.
fn window_oracle(blocks: &HashSet<[Point; 3]>, order: &[Point], ell: usize) -> Option<(usize, [Point; 3])> {
    for start in 0..=order.len() - ell {
        let w = &order[start..start + ell];
        let mut best: Option<[Point; 3]> = None;
        for a in 0..ell {
            for b in a + 1..ell {
                for c in b + 1..ell {
                    let t = sorted3([w[a], w[b], w[c]]);
                    if blocks.contains(&t) && best.is_none_or(|x| t < x) {
                        best = Some(t);
                    }
                }
            }
        }
        if let Some(t) = best {
            return Some((start + 1, t));
        }
    }
    None
}

fn c10_verifier_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut violated = 0;
    for k in 0..1000 {
        let v = rng.gen_range(5..=15usize);
        let ell = rng.gen_range(3..=5usize);
        let max = v * (v - 1) / 6;
        let system = random_psts(v, rng.gen_range(0..=max), rng.gen()).system;
        let mut order: Vec<Point> = (0..v as Point).collect();
        order.shuffle(&mut rng);
        let seq = Sequencing::new(order.clone()).unwrap();
        let fast = verify_ell_good(&system, &seq, ell).map_err(|e| e.to_string())?;
        let naive = verify_ell_good_naive(&system, &seq, ell).map_err(|e| e.to_string())?;
        let oracle = window_oracle(&block_set(&system), &order, ell);
        let fast_key = fast.violation().map(|x| (x.window_start, x.witness[0].points()));
        ensure!(fast == naive, "instance {k}: span {fast:?} vs naive {naive:?}");
        ensure!(fast_key == oracle, "instance {k}: span {fast_key:?} vs oracle {oracle:?}");
        violated += usize::from(oracle.is_some());
    }
    Ok(format!("1000 instances agree ({violated} with a violation)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("Fano example reproduction", c1_fano_example),
        ("exact counting identity", c2_counting_identity),
        ("PSTS strict inequality", c3_psts_strict),
        ("greedy 3-good totality", c4_greedy3),
        ("greedy 4-good at v > 71", c5_greedy4),
        ("endgame triple re-check", c6_endgame),
        ("exhaustive oracle agreement", c7_exhaustive),
        ("(2u+1)-good implies 3u-semi, u=2", c8_theorem),
        ("Monte Carlo consistency", c9_monte_carlo),
        ("verifier oracle equivalence", c10_verifier_oracle),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(note) => println!("[PASS] criterion {}: {name}: {note}", n + 1),
            Err(why) => {
                println!("[FAIL] criterion {}: {name}: {why}", n + 1);
                failed += 1;
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
