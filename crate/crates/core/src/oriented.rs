//! The oriented long-range graph on `Z^d x Z_+`: bonds
//! `<(x, m), (x + n e_i, m + 1)>` for every axis `i` and every `n != 0`,
//! open with probability `p_|n|`.
//!
//! Survival is proxied by reaching level `H`. The primary search is a
//! depth-first walk with a dead-vertex memo, which stops at the first vertex
//! on level `H`; [`reachable_levels`] is the plain level-by-level frontier
//! expansion, kept as an independent reference.

use std::time::Instant;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::sampler::{BondConfig, ConfigSeed, Coords, Cutoff, EdgeId};
use crate::sequences::ProbSequence;
use crate::stats::EstimateResult;

/// A vertex `(x, m)` of the oriented graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedVertex {
    pub x: Coords,
    pub m: u64,
}

impl OrientedVertex {
    pub fn origin(d: usize) -> Self {
        OrientedVertex { x: std::iter::repeat_n(0, d).collect(), m: 0 }
    }
}

/// `(axis, signed step)` pairs with `1 <= |n| <= cutoff`, shortest first.
fn steps(cutoff: u64, d: usize) -> Vec<(u32, i64)> {
    let mut out = Vec::with_capacity(2 * cutoff as usize * d);
    for n in 1..=cutoff as i64 {
        for axis in 0..d as u32 {
            out.push((axis, n));
            out.push((axis, -n));
        }
    }
    out
}

/// Steps whose length has positive probability; closed bonds are skipped.
fn live_steps(seq: &ProbSequence, cutoff: u64, d: usize) -> Vec<(u32, i64)> {
    steps(cutoff, d).into_iter().filter(|&(_, n)| seq.p(n.unsigned_abs()) > 0.0).collect()
}

fn validate(cutoff: u64, d: usize) -> Result<()> {
    if cutoff == 0 {
        return Err(Error::domain("truncation range K must be >= 1"));
    }
    if d == 0 {
        return Err(Error::domain("dimension d must be >= 1"));
    }
    Ok(())
}

/// All bonds leaving `v` under truncation `cutoff`; there are `2 K d` of them.
pub fn out_edges(v: &OrientedVertex, cutoff: u64, d: usize) -> Result<Vec<EdgeId>> {
    validate(cutoff, d)?;
    if v.x.len() != d {
        return Err(Error::domain(format!("vertex has dimension {}, expected {d}", v.x.len())));
    }
    Ok(steps(cutoff, d).into_iter().map(|(axis, n)| EdgeId::oriented(v.x.clone(), v.m, axis, n)).collect())
}

/// Whether an open oriented path leads from the origin to level `height`.
pub fn reaches_level(cfg: ConfigSeed, seq: &ProbSequence, cutoff: u64, height: u64, d: usize) -> Result<bool> {
    validate(cutoff, d)?;
    if height == 0 {
        return Err(Error::domain("height H must be >= 1"));
    }
    let view = BondConfig::new(cfg, seq, Cutoff::Finite(cutoff));
    Ok(search(&view, &live_steps(seq, cutoff, d), height, d))
}

fn search(view: &BondConfig<'_>, steps: &[(u32, i64)], height: u64, d: usize) -> bool {
    struct Frame {
        x: Coords,
        m: u64,
        next: usize,
    }
    let origin = OrientedVertex::origin(d);
    let mut seen: FxHashSet<(Coords, u64)> = FxHashSet::default();
    seen.insert((origin.x.clone(), 0));
    let mut stack = vec![Frame { x: origin.x, m: 0, next: 0 }];
    while let Some(top) = stack.last_mut() {
        if top.m == height {
            return true;
        }
        let mut child = None;
        while top.next < steps.len() {
            let (axis, n) = steps[top.next];
            top.next += 1;
            let e = EdgeId::Oriented { x: top.x.clone(), m: top.m, axis, step: n };
            if !view.open(&e) {
                continue;
            }
            let mut y = top.x.clone();
            y[axis as usize] += n;
            if seen.insert((y.clone(), top.m + 1)) {
                child = Some(Frame { x: y, m: top.m + 1, next: 0 });
                break;
            }
        }
        match child {
            Some(f) => stack.push(f),
            None => {
                stack.pop();
            }
        }
    }
    false
}

/// Level-by-level reachable sets `R_0 = {origin}, R_1, ..., R_height`.
/// Stops early (shorter result) when a level is empty.
pub fn reachable_levels(
    cfg: ConfigSeed,
    seq: &ProbSequence,
    cutoff: u64,
    height: u64,
    d: usize,
) -> Result<Vec<FxHashSet<Coords>>> {
    validate(cutoff, d)?;
    let view = BondConfig::new(cfg, seq, Cutoff::Finite(cutoff));
    let all = steps(cutoff, d);
    let mut levels = Vec::with_capacity(height as usize + 1);
    let mut current: FxHashSet<Coords> = FxHashSet::default();
    current.insert(OrientedVertex::origin(d).x);
    levels.push(current);
    for m in 0..height {
        let mut next = FxHashSet::default();
        for x in levels.last().expect("nonempty") {
            for &(axis, n) in &all {
                let e = EdgeId::oriented(x.clone(), m, axis, n);
                if view.open(&e) {
                    let mut y = x.clone();
                    y[axis as usize] += n;
                    next.insert(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    Ok(levels)
}

/// One-dimensional reachability from `(0, 0)` restricted to columns
/// `lo..=hi`, for levels `0..=levels`. Row `m` of the result flags reachable
/// columns (index `x - lo`). Any path found inside the strip is an open path
/// of the full graph.
pub fn reachable_strip(view: &BondConfig<'_>, cutoff: u64, lo: i64, hi: i64, levels: u64) -> Vec<Vec<bool>> {
    assert!(lo <= 0 && 0 <= hi, "strip must contain the origin");
    let width = (hi - lo + 1) as usize;
    let steps: Vec<i64> =
        (1..=cutoff as i64).flat_map(|n| [n, -n]).filter(|n| view.sequence().p(n.unsigned_abs()) > 0.0).collect();
    let mut rows = Vec::with_capacity(levels as usize + 1);
    let mut row = vec![false; width];
    row[(-lo) as usize] = true;
    rows.push(row);
    for m in 0..levels {
        let prev = rows.last().expect("nonempty");
        let mut next = vec![false; width];
        for (i, _) in prev.iter().enumerate().filter(|(_, &r)| r) {
            let x = lo + i as i64;
            for &n in &steps {
                let y = x + n;
                if y < lo || y > hi || next[(y - lo) as usize] {
                    continue;
                }
                if view.open(&EdgeId::oriented1(x, m, n)) {
                    next[(y - lo) as usize] = true;
                }
            }
        }
        rows.push(next);
    }
    rows
}

/// Monte Carlo estimate of `P^K(origin reaches level H)`.
pub fn estimate_survival(
    seq: &ProbSequence,
    cutoff: u64,
    height: u64,
    d: usize,
    trials: u64,
    seed: u64,
) -> Result<EstimateResult> {
    validate(cutoff, d)?;
    if height == 0 {
        return Err(Error::domain("height H must be >= 1"));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let start = Instant::now();
    let steps = live_steps(seq, cutoff, d);
    let successes = parallel::count_trials(trials, |t| {
        let view = BondConfig::new(ConfigSeed::new(seed, t), seq, Cutoff::Finite(cutoff));
        search(&view, &steps, height, d)
    });
    Ok(EstimateResult::from_counts(successes, trials, seed)?.with_wall_time(start.elapsed()))
}

/// Survival at several truncation levels with shared trial seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffSweep {
    pub cutoffs: Vec<u64>,
    pub rows: Vec<EstimateResult>,
    /// Trials that survive at some `K` but die at a larger `K'`.
    pub monotonicity_violations: u64,
}

/// Evaluates every cutoff on the same trials; `cutoffs` must increase.
pub fn survival_sweep(
    seq: &ProbSequence,
    cutoffs: &[u64],
    height: u64,
    d: usize,
    trials: u64,
    seed: u64,
) -> Result<CutoffSweep> {
    if cutoffs.is_empty() {
        return Err(Error::domain("cutoff list is empty"));
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("cutoffs must be strictly increasing"));
    }
    for &k in cutoffs {
        validate(k, d)?;
    }
    if height == 0 || trials == 0 {
        return Err(Error::domain("height and trials must be >= 1"));
    }
    let start = Instant::now();
    let step_sets: Vec<_> = cutoffs.iter().map(|&k| live_steps(seq, k, d)).collect();
    let outcomes: Vec<Vec<bool>> = parallel::map_trials(trials, |t| {
        let cfg = ConfigSeed::new(seed, t);
        cutoffs
            .iter()
            .zip(&step_sets)
            .map(|(&k, steps)| search(&BondConfig::new(cfg, seq, Cutoff::Finite(k)), steps, height, d))
            .collect()
    });
    let violations = outcomes.iter().filter(|o| o.windows(2).any(|w| w[0] && !w[1])).count() as u64;
    let elapsed = start.elapsed();
    let rows = (0..cutoffs.len())
        .map(|i| {
            let s = outcomes.iter().filter(|o| o[i]).count() as u64;
            EstimateResult::from_counts(s, trials, seed).map(|r| r.with_wall_time(elapsed))
        })
        .collect::<Result<_>>()?;
    Ok(CutoffSweep { cutoffs: cutoffs.to_vec(), rows, monotonicity_violations: violations })
}
