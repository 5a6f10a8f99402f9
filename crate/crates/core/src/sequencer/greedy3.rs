use crate::design::{Point, SeqMeta, Sequencing, TripleSystem};

use super::{verify_ell_good, Chooser, GreedyPolicy, SequencerError};

/// Greedy 3-good sequencing of an STS or PSTS with `v > 5`.
///
/// Starts from a block `{b, c, e}` laid out as `a b c d e`, so that
/// `x5 = third(x2, x3)`; then every later point avoids the third of its two
/// predecessors. If the final three points form a block, `x1` and `xv` are
/// interchanged. A blockless PSTS gets the policy's base permutation.
pub fn greedy_3good(system: &TripleSystem, policy: GreedyPolicy) -> Result<Sequencing, SequencerError> {
    let v = system.v();
    if v <= 5 {
        return Err(SequencerError::OrderTooSmall { v, min: 6 });
    }
    system.ensure_valid()?;
    let (order, swapped) = build_order(system, policy)?;
    let mut meta = SeqMeta {
        method: Some("greedy3".into()),
        ell: Some(3),
        seed: policy.seed(),
        extra: [("policy".to_string(), policy.name().to_string())].into(),
    };
    if swapped {
        meta.extra.insert("swapped".into(), "true".into());
    }
    let seq = Sequencing::with_meta(order, meta)?;
    if let Some(violation) = verify_ell_good(system, &seq, 3)?.violation() {
        return Err(SequencerError::Internal(format!(
            "greedy3 output {:?} fails: {violation}",
            seq.order()
        )));
    }
    Ok(seq)
}

/// Runs the construction; the flag reports whether the final interchange fired.
fn build_order(system: &TripleSystem, policy: GreedyPolicy) -> Result<(Vec<Point>, bool), SequencerError> {
    let v = system.v();
    let table = system.third_table()?;
    let mut chooser = Chooser::new(policy);
    if system.blocks().is_empty() {
        return Ok((chooser.base_order(v), false));
    }
    let first = match policy {
        GreedyPolicy::LexSmallest => *system.blocks().iter().min().unwrap(),
        GreedyPolicy::SeededRandom(_) => {
            let i = chooser.pick(0..system.blocks().len() as Point).unwrap();
            system.blocks()[i as usize]
        }
    };
    let mut bce = first.points();
    chooser.shuffle(&mut bce);
    let [b, c, e] = bce;

    let mut used = vec![false; v];
    for p in bce {
        used[p as usize] = true;
    }
    let a = chooser.pick((0..v as Point).filter(|&p| !used[p as usize])).unwrap();
    used[a as usize] = true;
    let d = chooser.pick((0..v as Point).filter(|&p| !used[p as usize])).unwrap();
    used[d as usize] = true;

    let mut x = Vec::with_capacity(v);
    x.extend([a, b, c, d, e]);
    while x.len() < v - 1 {
        let avoid = table.get(x[x.len() - 2], x[x.len() - 1]);
        let next = chooser
            .pick((0..v as Point).filter(|&p| !used[p as usize] && Some(p) != avoid))
            .ok_or_else(|| SequencerError::Stuck {
                position: x.len() + 1,
                state: format!("placed: {x:?}\navoid: {avoid:?}"),
            })?;
        used[next as usize] = true;
        x.push(next);
    }
    let last = (0..v as Point).find(|&p| !used[p as usize]).unwrap();
    x.push(last);
    let swapped = table.is_block(x[v - 3], x[v - 2], x[v - 1]);
    if swapped {
        x.swap(0, v - 1);
    }
    Ok((x, swapped))
}
