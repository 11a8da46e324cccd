//! Connection probabilities on the long-range line graph and crossing
//! probabilities of the nearest-neighbour anisotropic square lattice.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::sampler::{BondConfig, ConfigSeed, Cutoff, EdgeId};
use crate::sequences::ProbSequence;
use crate::stats::EstimateResult;
use crate::unionfind::DisjointSet;

/// Grows the line graph on `{0..=L}` vertex by vertex and records, for each
/// requested `L` (increasing), whether `{0..=l}` is connected by then.
fn kw_trial(view: &BondConfig<'_>, l: u64, lens: &[u64]) -> Vec<bool> {
    let top = *lens.last().expect("nonempty");
    let mut sets = DisjointSet::new(top as usize + 1);
    // number of marked vertices in each root's component
    let mut marked: Vec<u64> = (0..=top).map(|v| (v <= l) as u64).collect();
    let mut out = Vec::with_capacity(lens.len());
    for j in 0..=top as usize {
        for i in 0..j {
            if view.open(&EdgeId::line(i as i64, j as i64)) {
                let (ri, rj) = (sets.find(i), sets.find(j));
                if ri != rj {
                    let m = marked[ri] + marked[rj];
                    sets.union(ri, rj);
                    let r = sets.find(ri);
                    marked[r] = m;
                }
            }
        }
        let connected = marked[sets.find(0)] == l + 1;
        while out.len() < lens.len() && lens[out.len()] == j as u64 {
            out.push(connected);
        }
        if connected {
            // adding vertices and bonds cannot disconnect the marked set
            out.resize(lens.len(), true);
            break;
        }
    }
    out
}

/// Monte Carlo estimate that `{0, ..., l}` is connected inside `{0, ..., L}`.
pub fn kw_connect_prob(seq: &ProbSequence, l: u64, big_l: u64, trials: u64, seed: u64) -> Result<EstimateResult> {
    let sweep = kw_sweep(seq, l, &[big_l], trials, seed)?;
    Ok(sweep.rows.into_iter().next().expect("one row"))
}

/// Connection estimates at several window sizes on shared trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwSweep {
    pub l: u64,
    pub windows: Vec<u64>,
    pub rows: Vec<EstimateResult>,
    /// Trials connected at some `L` but not at a larger one.
    pub monotonicity_violations: u64,
}

pub fn kw_sweep(seq: &ProbSequence, l: u64, windows: &[u64], trials: u64, seed: u64) -> Result<KwSweep> {
    if l == 0 {
        return Err(Error::domain("l must be >= 1"));
    }
    if windows.is_empty() || windows.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("window sizes must be nonempty and strictly increasing"));
    }
    if windows[0] < l {
        return Err(Error::domain(format!("window L = {} is smaller than l = {l}", windows[0])));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let start = Instant::now();
    let outcomes = parallel::map_trials(trials, |t| {
        kw_trial(&BondConfig::new(ConfigSeed::new(seed, t), seq, Cutoff::Infinite), l, windows)
    });
    let elapsed = start.elapsed();
    let violations = outcomes.iter().filter(|o| o.windows(2).any(|w| w[0] && !w[1])).count() as u64;
    let rows = (0..windows.len())
        .map(|i| {
            let s = outcomes.iter().filter(|o| o[i]).count() as u64;
            EstimateResult::from_counts(s, trials, seed).map(|r| r.with_wall_time(elapsed))
        })
        .collect::<Result<_>>()?;
    Ok(KwSweep { l, windows: windows.to_vec(), rows, monotonicity_violations: violations })
}

/// Left-right crossing of the `n x n` box in nearest-neighbour bond
/// percolation with horizontal parameter `p_h` and vertical `p_v`.
pub fn kesten_crossing(p_v: f64, p_h: f64, n: u64, trials: u64, seed: u64) -> Result<EstimateResult> {
    if n < 2 {
        return Err(Error::domain("box side must be >= 2"));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    if !(0.0..=1.0).contains(&p_v) {
        return Err(Error::domain(format!("p_v = {p_v} outside [0,1]")));
    }
    let horizontal = ProbSequence::constant(p_h)?;
    let start = Instant::now();
    let side = n as usize;
    let successes = parallel::count_trials(trials, |t| {
        let view = BondConfig::new(ConfigSeed::new(seed, t), &horizontal, Cutoff::Finite(1))
            .with_delta(p_v)
            .expect("p_v validated above");
        let left = side * side;
        let right = left + 1;
        let mut sets = DisjointSet::new(side * side + 2);
        let at = |x: usize, y: usize| y * side + x;
        for y in 0..side {
            sets.union(left, at(0, y));
            sets.union(right, at(side - 1, y));
            for x in 0..side {
                if x + 1 < side && view.open(&EdgeId::horizontal(x as i64, x as i64 + 1, y as i64)) {
                    sets.union(at(x, y), at(x + 1, y));
                }
                if y + 1 < side && view.open(&EdgeId::vertical(x as i64, y as i64)) {
                    sets.union(at(x, y), at(x, y + 1));
                }
            }
        }
        sets.same(left, right)
    });
    Ok(EstimateResult::from_counts(successes, trials, seed)?.with_wall_time(start.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: f64) -> ProbSequence {
        ProbSequence::constant(p).unwrap()
    }

    /// Connectivity of `{0..=l}` by depth-first search over all open bonds.
    fn oracle(view: &BondConfig<'_>, l: u64, big_l: u64) -> bool {
        let n = big_l as usize + 1;
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for (b, s) in seen.iter_mut().enumerate() {
                if !*s && b != a && view.open(&EdgeId::line(a as i64, b as i64)) {
                    *s = true;
                    stack.push(b);
                }
            }
        }
        seen[..=l as usize].iter().all(|&s| s)
    }

    #[test]
    fn line_graph_extremes() {
        assert_eq!(kw_connect_prob(&c(1.0), 5, 20, 50, 0).unwrap().estimate, 1.0);
        assert_eq!(kw_connect_prob(&c(0.0), 5, 20, 50, 0).unwrap().estimate, 0.0);
        assert!(kw_connect_prob(&c(0.5), 0, 20, 50, 0).is_err());
        assert!(kw_connect_prob(&c(0.5), 5, 4, 50, 0).is_err());
        assert!(kw_sweep(&c(0.5), 2, &[10, 10], 5, 0).is_err());
    }

    #[test]
    fn incremental_trial_matches_search() {
        let seq = ProbSequence::power_law(0.3, 1.0).unwrap();
        let lens = [6, 9, 15, 30];
        for t in 0..300 {
            let view = BondConfig::new(ConfigSeed::new(4, t), &seq, Cutoff::Infinite);
            let got = kw_trial(&view, 3, &lens);
            let want: Vec<bool> = lens.iter().map(|&big| oracle(&view, 3, big)).collect();
            assert_eq!(got, want, "trial {t}");
        }
    }

    #[test]
    fn sweep_is_monotone_per_trial() {
        let seq = ProbSequence::power_law(0.5, 1.0).unwrap();
        let s = kw_sweep(&seq, 5, &[20, 80, 320], 300, 1).unwrap();
        assert_eq!(s.monotonicity_violations, 0);
        assert!(s.rows.windows(2).all(|w| w[0].successes <= w[1].successes));
    }

    #[test]
    fn crossing_extremes() {
        assert_eq!(kesten_crossing(1.0, 1.0, 8, 20, 0).unwrap().estimate, 1.0);
        assert_eq!(kesten_crossing(0.0, 0.0, 8, 20, 0).unwrap().estimate, 0.0);
        // a full horizontal row suffices, vertical bonds are not needed
        assert_eq!(kesten_crossing(0.0, 1.0, 8, 20, 0).unwrap().estimate, 1.0);
        assert!(kesten_crossing(0.5, 0.5, 1, 20, 0).is_err());
        assert!(kesten_crossing(1.5, 0.5, 8, 20, 0).is_err());
    }

    #[test]
    fn crossing_increases_with_horizontal_parameter() {
        let lo = kesten_crossing(0.3, 0.5, 16, 2000, 2).unwrap();
        let hi = kesten_crossing(0.3, 0.9, 16, 2000, 2).unwrap();
        assert!(lo.below(&hi));
    }
}
