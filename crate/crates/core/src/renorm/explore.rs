use std::collections::BTreeSet;
use std::time::Instant;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::events::{nominal_footprint, BlockEvent, Probe, Sign};
use super::params::{choose_block_params, prob_t_exact, BlockParams};
use super::wedge::{next_vertex, RenormVertex};
use crate::error::{Error, Result};
use crate::oriented::reachable_strip;
use crate::parallel;
use crate::sampler::{uniform_site, BondConfig, ConfigSeed, Cutoff, EdgeId};
use crate::sequences::{ProbSequence, DEFAULT_HORIZON};
use crate::stats::EstimateResult;

/// Reference value of the oriented site percolation threshold on the
/// two-successor lattice. Empirical; see [`site_threshold_ratio`].
pub const ORIENTED_SITE_THRESHOLD: f64 = 0.7055;

/// Decay exponent of the critical survival probability in 1+1 dimensional
/// directed percolation, `P(reach level t) ~ t^-0.1595`.
const SURVIVAL_EXPONENT: f64 = 0.1595;

/// Block anchor `(2kv, 2(M+1)u)` of a renormalized vertex, and the sign of
/// its block event (`+` on even `v`).
pub fn block_anchor(bp: &BlockParams, w: RenormVertex) -> (i64, u64, Sign) {
    let x = 2 * bp.step as i64 * w.v as i64;
    let m = bp.height() * w.u;
    let sign = if w.v.is_multiple_of(2) { Sign::Plus } else { Sign::Minus };
    (x, m, sign)
}

/// One step of an exploration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub vertex: RenormVertex,
    pub accepted: bool,
    /// Edges read while deciding this vertex.
    pub footprint: Vec<EdgeId>,
}

/// Record of a finished exploration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationState {
    pub accepted: BTreeSet<RenormVertex>,
    pub rejected: BTreeSet<RenormVertex>,
    pub visits: Vec<Visit>,
    pub seed: ConfigSeed,
    pub params: BlockParams,
    /// Unvisited boundary vertices remained when the step budget ran out.
    pub alive: bool,
}

impl ExplorationState {
    pub fn steps(&self) -> usize {
        self.visits.len()
    }
}

/// Accepted set, rejected set, visit order and survival flag.
type Run<T> = (BTreeSet<RenormVertex>, BTreeSet<RenormVertex>, Vec<(RenormVertex, bool, T)>, bool);

fn run_exploration<T>(max_steps: u64, mut test: impl FnMut(RenormVertex) -> (bool, T)) -> Run<T> {
    let mut accepted = BTreeSet::new();
    let mut rejected = BTreeSet::new();
    // always equal to the exterior boundary of `accepted` minus `rejected`
    let mut candidates = BTreeSet::new();
    let mut visits = Vec::new();
    let mut current = Some(RenormVertex::ROOT);
    while let Some(w) = current {
        if visits.len() as u64 == max_steps {
            return (accepted, rejected, visits, true);
        }
        let (ok, extra) = test(w);
        if ok {
            accepted.insert(w);
            for c in w.children() {
                if !accepted.contains(&c) && !rejected.contains(&c) {
                    candidates.insert(c);
                }
            }
        } else {
            rejected.insert(w);
        }
        visits.push((w, ok, extra));
        current = candidates.pop_first();
    }
    (accepted, rejected, visits, false)
}

/// `(accepted, rejected, visit order, alive)` of a site exploration.
pub type SiteExploration = (BTreeSet<RenormVertex>, BTreeSet<RenormVertex>, Vec<(RenormVertex, bool)>, bool);

/// Runs the exploration with an arbitrary acceptance rule.
pub fn explore_sites(max_steps: u64, mut accept: impl FnMut(RenormVertex) -> bool) -> SiteExploration {
    let (a, b, visits, alive) = run_exploration(max_steps, |w| (accept(w), ()));
    (a, b, visits.into_iter().map(|(w, ok, ())| (w, ok)).collect(), alive)
}

/// Explores the renormalized wedge on trial `cfg`: the root is tested with
/// `T+` at the origin, then each least unvisited boundary vertex is tested
/// with its block event.
pub fn explore(seq: &ProbSequence, bp: &BlockParams, cfg: ConfigSeed, max_steps: u64) -> Result<ExplorationState> {
    if max_steps == 0 {
        return Err(Error::domain("max_steps must be >= 1"));
    }
    let view = BondConfig::new(cfg, seq, Cutoff::Finite(bp.cutoff));
    let (accepted, rejected, visits, alive) = run_exploration(max_steps, |w| {
        let (x, m, sign) = block_anchor(bp, w);
        let mut probe = Probe::new(&view, true);
        let ok = probe.event(bp, BlockEvent::T(sign), x, m);
        (ok, probe.into_log())
    });
    Ok(ExplorationState {
        accepted,
        rejected,
        visits: visits.into_iter().map(|(vertex, accepted, footprint)| Visit { vertex, accepted, footprint }).collect(),
        seed: cfg,
        params: *bp,
        alive,
    })
}

/// Survival flag only; skips footprint logging.
fn explore_alive(view: &BondConfig<'_>, bp: &BlockParams, max_steps: u64) -> bool {
    run_exploration(max_steps, |w| {
        let (x, m, sign) = block_anchor(bp, w);
        (Probe::new(view, false).event(bp, BlockEvent::T(sign), x, m), ())
    })
    .3
}

/// Outcome of [`verify_coupling`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingReport {
    /// Pairs of visits whose nominal footprints were compared.
    pub footprint_checks: u64,
    /// Edges shared between nominal footprints of distinct visits, plus
    /// recorded edges outside their visit's nominal footprint.
    pub footprint_overlaps: u64,
    /// Open-path confirmations attempted.
    pub path_checks: u64,
    pub path_violations: u64,
    /// Visits that were not the least unvisited boundary vertex, or whose
    /// outcome does not replay.
    pub ordering_violations: u64,
}

impl CouplingReport {
    pub fn violations(&self) -> u64 {
        self.footprint_overlaps + self.path_violations + self.ordering_violations
    }
}

/// Independently re-checks an exploration: visit order, footprint
/// disjointness, and for every accepted `(v,u)` open paths from the origin
/// to `(2kv, 2(M+1)(u+1))` and `(2k(v+1), 2(M+1)(u+1))`.
pub fn verify_coupling(
    state: &ExplorationState,
    seq: &ProbSequence,
    cfg: ConfigSeed,
    bp: &BlockParams,
) -> Result<CouplingReport> {
    if state.seed != cfg || state.params != *bp {
        return Err(Error::Contract("exploration state was produced with a different seed or parameters".into()));
    }
    let view = BondConfig::new(cfg, seq, Cutoff::Finite(bp.cutoff));
    let mut report = CouplingReport::default();

    let mut a = BTreeSet::new();
    let mut b = BTreeSet::new();
    let mut owner: FxHashSet<EdgeId> = FxHashSet::default();
    for (i, visit) in state.visits.iter().enumerate() {
        let expected = if i == 0 { Some(RenormVertex::ROOT) } else { next_vertex(&a, &b) };
        let (x, m, sign) = block_anchor(bp, visit.vertex);
        let replay = Probe::new(&view, false).event(bp, BlockEvent::T(sign), x, m);
        if expected != Some(visit.vertex) || replay != visit.accepted {
            report.ordering_violations += 1;
        }
        let nominal = nominal_footprint(bp, BlockEvent::T(sign), x, m);
        let own: FxHashSet<&EdgeId> = nominal.iter().collect();
        report.footprint_overlaps += visit.footprint.iter().filter(|e| !own.contains(e)).count() as u64;
        report.footprint_checks += i as u64;
        for e in nominal {
            if !owner.insert(e) {
                report.footprint_overlaps += 1;
            }
        }
        if visit.accepted {
            a.insert(visit.vertex);
        } else {
            b.insert(visit.vertex);
        }
    }
    if a != state.accepted || b != state.rejected {
        report.ordering_violations += 1;
    }

    let (Some(vmax), Some(umax)) = (state.accepted.iter().map(|w| w.v).max(), state.accepted.iter().map(|w| w.u).max())
    else {
        return Ok(report);
    };
    let k = bp.step as i64;
    let lo = -(bp.cutoff as i64);
    let hi = 2 * k * (vmax as i64 + 1) + bp.cutoff as i64;
    let rows = reachable_strip(&view, bp.cutoff, lo, hi, bp.height() * (umax + 1));
    for w in &state.accepted {
        let top = &rows[(bp.height() * (w.u + 1)) as usize];
        for col in [2 * k * w.v as i64, 2 * k * (w.v as i64 + 1)] {
            report.path_checks += 1;
            if !top[(col - lo) as usize] {
                report.path_violations += 1;
            }
        }
    }
    Ok(report)
}

/// Fraction of explorations still alive after `max_steps` visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationSurvival {
    pub params: BlockParams,
    pub estimate: EstimateResult,
    pub one_minus_epsilon: f64,
    /// Exact probability that a single block event occurs.
    pub event_probability: f64,
    pub threshold_reference: f64,
}

pub fn estimate_exploration_survival(
    seq: &ProbSequence,
    epsilon: f64,
    trials: u64,
    max_steps: u64,
    seed: u64,
) -> Result<ExplorationSurvival> {
    if trials == 0 || max_steps == 0 {
        return Err(Error::domain("trials and max_steps must be >= 1"));
    }
    let bp = choose_block_params(seq, epsilon, DEFAULT_HORIZON)?;
    let start = Instant::now();
    let successes = parallel::count_trials(trials, |t| {
        let view = BondConfig::new(ConfigSeed::new(seed, t), seq, Cutoff::Finite(bp.cutoff));
        explore_alive(&view, &bp, max_steps)
    });
    Ok(ExplorationSurvival {
        params: bp,
        estimate: EstimateResult::from_counts(successes, trials, seed)?.with_wall_time(start.elapsed()),
        one_minus_epsilon: 1.0 - epsilon,
        event_probability: prob_t_exact(seq, &bp)?,
        threshold_reference: ORIENTED_SITE_THRESHOLD,
    })
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("site probability {p} outside [0,1]")));
    }
    Ok(())
}

/// Survival of the same exploration when each vertex is accepted
/// independently with probability `p`: the plain oriented site model the
/// block construction dominates.
pub fn site_survival(p: f64, max_steps: u64, trials: u64, seed: u64) -> Result<EstimateResult> {
    check_probability(p)?;
    if trials == 0 || max_steps == 0 {
        return Err(Error::domain("trials and max_steps must be >= 1"));
    }
    let start = Instant::now();
    let successes = parallel::count_trials(trials, |t| {
        let cfg = ConfigSeed::new(seed, t);
        explore_sites(max_steps, |w| uniform_site(&cfg, &[w.v as i64, w.u as i64]) < p).3
    });
    Ok(EstimateResult::from_counts(successes, trials, seed)?.with_wall_time(start.elapsed()))
}

/// Whether the open site cluster of the root reaches level `levels`.
fn site_reaches(cfg: &ConfigSeed, p: f64, levels: u64) -> bool {
    let open = |v: u64, u: u64| uniform_site(cfg, &[v as i64, u as i64]) < p;
    if !open(0, 0) {
        return false;
    }
    let mut row = vec![true];
    for u in 1..=levels {
        let mut next = vec![false; u as usize + 1];
        let mut any = false;
        for v in 0..=u as usize {
            let fed = row.get(v).copied().unwrap_or(false) || (v > 0 && row[v - 1]);
            if fed && open(v as u64, u) {
                next[v] = true;
                any = true;
            }
        }
        if !any {
            return false;
        }
        row = next;
    }
    true
}

/// Survival ratio `P(reach 2H) / P(reach H)` of the oriented site model.
/// At criticality it equals `2^-0.1595`; above it tends to 1.
pub fn site_threshold_ratio(p: f64, levels: u64, trials: u64, seed: u64) -> Result<f64> {
    check_probability(p)?;
    if levels == 0 || trials == 0 {
        return Err(Error::domain("levels and trials must be >= 1"));
    }
    let outcomes = parallel::map_trials(trials, |t| {
        let cfg = ConfigSeed::new(seed, t);
        (site_reaches(&cfg, p, levels), site_reaches(&cfg, p, 2 * levels))
    });
    let short = outcomes.iter().filter(|o| o.0).count();
    let long = outcomes.iter().filter(|o| o.1).count();
    if short == 0 {
        return Ok(0.0);
    }
    Ok(long as f64 / short as f64)
}

/// Bisection for the site threshold using the critical survival ratio.
pub fn estimate_site_threshold(levels: u64, trials: u64, iterations: u32, seed: u64) -> Result<f64> {
    let target = 2f64.powf(-SURVIVAL_EXPONENT);
    let (mut lo, mut hi) = (0.6, 0.8);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if site_threshold_ratio(mid, levels, trials, seed)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
