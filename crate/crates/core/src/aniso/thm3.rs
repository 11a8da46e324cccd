//! Red sites: a coarse site is red when a horizontal window cluster exists
//! and two vertical detours lead from it into the windows of both
//! successor blocks, two rows up.

use std::collections::BTreeMap;
use std::time::Instant;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::{AnisoParams, Region};
use crate::error::{Error, Result};
use crate::parallel;
use crate::renorm::{EventOutcome, Sign};
use crate::sampler::{BondConfig, ConfigSeed, Cutoff, EdgeId, Recorder};
use crate::sequences::{Neumaier, ProbSequence};
use crate::stats::{wilson_interval, EstimateResult, Z95};
use crate::unionfind::DisjointSet;

/// Parameters of the red-site construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm3Params {
    pub delta: f64,
    pub eta: f64,
    pub epsilon: f64,
    /// `l`: the window cluster must join `x, ..., x + 2l`.
    pub ell: u64,
    /// `W > 2l`: the cluster lives in `x, ..., x + W`.
    pub window: u64,
    /// `k > 2W`: horizontal offset between successor blocks.
    pub offset: u64,
    /// `M`: detour lengths `k+1 ..= k+M`.
    pub reach: u64,
    /// `K = k + M`.
    pub cutoff: u64,
}

/// `1 - [1 - delta^2 (1 - e^-eta)]^l > 1 - epsilon/3`.
pub fn ell_condition(delta: f64, eta: f64, epsilon: f64, ell: u64) -> bool {
    let q = delta * delta * -(-eta).exp_m1();
    (1.0 - q).powf(ell as f64) < epsilon / 3.0
}

/// Least `l` satisfying [`ell_condition`].
pub fn min_ell(delta: f64, eta: f64, epsilon: f64) -> Result<u64> {
    let q = delta * delta * -(-eta).exp_m1();
    let mut ell = if q >= 1.0 {
        1
    } else {
        let guess = ((epsilon / 3.0).ln() / (-q).ln_1p()).ceil();
        if !guess.is_finite() || guess > 1e12 {
            return Err(Error::Unsatisfiable(format!("delta^2 (1 - e^-eta) = {q} needs too many detours")));
        }
        (guess as u64).max(1)
    };
    while ell > 1 && ell_condition(delta, eta, epsilon, ell - 1) {
        ell -= 1;
    }
    while !ell_condition(delta, eta, epsilon, ell) {
        ell += 1;
    }
    Ok(ell)
}

/// Finite-horizon probe of `eta`: half the largest cross sum
/// `sum_{n <= terms} p_n p_{n+N}` over shifts `N <= max_shift`.
pub fn probe_eta(seq: &ProbSequence, max_shift: u64, terms: u64) -> Result<f64> {
    if max_shift == 0 || terms == 0 {
        return Err(Error::domain("probe ranges must be >= 1"));
    }
    let best = (1..=max_shift).map(|n| seq.cross_sum(n, 1, terms)).fold(0.0f64, f64::max);
    Ok(best / 2.0)
}

/// Minimal `l`, then the least `k > 2W` for which some `M <= horizon` makes
/// `sum_{n=1}^{M} p_n p_{n+k} > eta`, with that `M` minimal.
pub fn choose_thm3_params(
    seq: &ProbSequence,
    delta: f64,
    epsilon: f64,
    eta: f64,
    window: u64,
    horizon: u64,
) -> Result<Thm3Params> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon = {epsilon} must lie in (0,1)")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!("delta = {delta} must lie in (0,1]")));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::domain(format!("eta = {eta} must be positive")));
    }
    match seq.support_gcd(horizon) {
        None => return Err(Error::EmptySupport { horizon }),
        Some(1) => {}
        Some(g) => return Err(Error::GcdNotOne(g)),
    }
    let ell = min_ell(delta, eta, epsilon)?;
    if window <= 2 * ell {
        return Err(Error::domain(format!("window W = {window} must exceed 2l = {}", 2 * ell)));
    }
    let (offset, reach) = choose_offset(seq, eta, window, horizon)?;
    Ok(Thm3Params { delta, eta, epsilon, ell, window, offset, reach, cutoff: offset + reach })
}

/// Least `k > 2W` for which some `M <= horizon` makes
/// `sum_{n=1}^{M} p_n p_{n+k} > eta`, with that `M` minimal.
pub fn choose_offset(seq: &ProbSequence, eta: f64, window: u64, horizon: u64) -> Result<(u64, u64)> {
    for offset in 2 * window + 1..=horizon {
        let mut acc = Neumaier::default();
        let reach = (1..=horizon).find(|&m| {
            acc.add(seq.p(m) * seq.p(m + offset));
            acc.value() > eta
        });
        if let Some(reach) = reach {
            return Ok((offset, reach));
        }
    }
    Err(Error::Unsatisfiable(format!(
        "no offset k in ({}, {horizon}] has a cross sum above eta = {eta} within horizon",
        2 * window
    )))
}

fn window_marked(view: &BondConfig<'_>, rec: &mut Recorder<'_, '_>, x: i64, y: i64, window: u64, ell: u64) -> bool {
    let w = window as usize;
    let target = 2 * ell + 1;
    let mut sets = DisjointSet::new(w + 1);
    let mut marked: Vec<u64> = (0..=w).map(|i| (i as u64 <= 2 * ell) as u64).collect();
    if marked[0] == target {
        return true;
    }
    for n in 1..=w {
        if view.sequence().p(n as u64) <= 0.0 {
            continue;
        }
        for i in 0..=w - n {
            let j = i + n;
            if !rec.open(EdgeId::horizontal(x + i as i64, x + j as i64, y)) {
                continue;
            }
            let (ri, rj) = (sets.find(i), sets.find(j));
            if ri != rj {
                let m = marked[ri] + marked[rj];
                sets.union(ri, rj);
                let r = sets.find(ri);
                marked[r] = m;
                if m == target {
                    return true;
                }
            }
        }
    }
    false
}

/// `A_x(W)`: the sites `x + {0..2l}` of row `y` are connected by open
/// horizontal bonds inside `x + {0..W}`.
pub fn eval_a(view: &BondConfig<'_>, x: i64, y: i64, window: u64, ell: u64) -> Result<EventOutcome> {
    if window <= 2 * ell {
        return Err(Error::domain(format!("window W = {window} must exceed 2l = {}", 2 * ell)));
    }
    let mut rec = Recorder::new(view, true);
    let occurred = window_marked(view, &mut rec, x, y, window, ell);
    Ok(EventOutcome { occurred, footprint: rec.into_log() })
}

/// Estimate of `P(A_0(W))`; window bonds never exceed `W`, so no truncation applies.
pub fn estimate_window_prob(
    seq: &ProbSequence,
    window: u64,
    ell: u64,
    trials: u64,
    seed: u64,
) -> Result<EstimateResult> {
    if window <= 2 * ell {
        return Err(Error::domain(format!("window W = {window} must exceed 2l = {}", 2 * ell)));
    }
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let start = Instant::now();
    let s = parallel::count_trials(trials, |t| {
        let view = BondConfig::new(ConfigSeed::new(seed, t), seq, Cutoff::Infinite);
        window_marked(&view, &mut Recorder::new(&view, false), 0, 0, window, ell)
    });
    Ok(EstimateResult::from_counts(s, trials, seed)?.with_wall_time(start.elapsed()))
}

/// Least `W > 2l` whose estimated `P(A(W))` exceeds `target` with 95%
/// confidence (lower Wilson bound).
pub fn choose_window(
    seq: &ProbSequence,
    ell: u64,
    target: f64,
    trials: u64,
    seed: u64,
    max_window: u64,
) -> Result<u64> {
    for w in 2 * ell + 1..=max_window {
        let est = estimate_window_prob(seq, w, ell, trials, seed)?;
        if wilson_interval(est.successes, est.trials, Z95).0 > target {
            return Ok(w);
        }
    }
    Err(Error::Unsatisfiable(format!("no window W <= {max_window} reaches P(A) > {target} with confidence")))
}

fn detour(rec: &mut Recorder<'_, '_>, params: &Thm3Params, x: i64, y: i64, sign: Sign) -> bool {
    let s = sign.factor();
    let k = params.offset as i64;
    rec.open(EdgeId::vertical(x, y))
        && rec.open(EdgeId::vertical(x + s * k, y + 1))
        && (1..=params.reach as i64).any(|n| {
            let far = x + s * (n + k);
            rec.open(EdgeId::horizontal(x, far, y + 1)) && rec.open(EdgeId::horizontal(far, x + s * k, y + 1))
        })
}

fn check_view(view: &BondConfig<'_>, params: &Thm3Params) -> Result<()> {
    if !view.cutoff().at_least(params.cutoff) {
        return Err(Error::domain(format!("truncation {:?} is below K = k + M = {}", view.cutoff(), params.cutoff)));
    }
    if view.delta().is_none() {
        return Err(Error::Contract("detour events need a delta parameter".into()));
    }
    Ok(())
}

/// `R+` (or `R-`) at `(x, y)`: up from `(x, y)`, across row `y+1` to
/// `x ± (n+k)` and back to `x ± k`, then up to row `y+2`.
pub fn eval_r(view: &BondConfig<'_>, params: &Thm3Params, x: i64, y: i64, sign: Sign) -> Result<EventOutcome> {
    check_view(view, params)?;
    let mut rec = Recorder::new(view, true);
    let occurred = detour(&mut rec, params, x, y, sign);
    Ok(EventOutcome { occurred, footprint: rec.into_log() })
}

/// `P(R) = delta^2 [1 - prod_{n=1}^{M} (1 - p_n p_{n+k})]`.
pub fn prob_r_exact(seq: &ProbSequence, params: &Thm3Params) -> f64 {
    let miss: f64 = (1..=params.reach).map(|n| 1.0 - seq.p(n) * seq.p(n + params.offset)).product();
    params.delta * params.delta * (1.0 - miss)
}

/// `(1 - eps/3) [1 - (1 - delta^2 (1 - e^-eta))^l]^2`, the lower bound on
/// `P(T)` when `P(A) >= 1 - eps/3`.
pub fn t3_lower_bound(params: &Thm3Params) -> f64 {
    let q = params.delta * params.delta * -(-params.eta).exp_m1();
    let union = 1.0 - (1.0 - q).powf(params.ell as f64);
    (1.0 - params.epsilon / 3.0) * union * union
}

fn block(view: &BondConfig<'_>, rec: &mut Recorder<'_, '_>, params: &Thm3Params, x: i64, y: i64) -> bool {
    let l = params.ell as i64;
    window_marked(view, rec, x, y, params.window, params.ell)
        && (0..l).any(|i| detour(rec, params, x + i, y, Sign::Plus))
        && (l + 1..=2 * l).any(|i| detour(rec, params, x + i, y, Sign::Minus))
}

/// `T_x = A_x(W)`, some `R+` from `x + {0..l-1}`, and some `R-` from `x + {l+1..2l}`.
pub fn eval_t3(view: &BondConfig<'_>, params: &Thm3Params, x: i64, y: i64) -> Result<EventOutcome> {
    check_view(view, params)?;
    if params.window <= 2 * params.ell {
        return Err(Error::domain("window W must exceed 2l"));
    }
    let mut rec = Recorder::new(view, true);
    let occurred = block(view, &mut rec, params, x, y);
    Ok(EventOutcome { occurred, footprint: rec.into_log() })
}

fn nominal_t3(params: &Thm3Params, x: i64, y: i64) -> Vec<EdgeId> {
    let w = params.window as i64;
    let k = params.offset as i64;
    let l = params.ell as i64;
    let mut out = Vec::new();
    for n in 1..=w {
        for i in 0..=w - n {
            out.push(EdgeId::horizontal(x + i, x + i + n, y));
        }
    }
    let mut push_detour = |a: i64, s: i64| {
        out.push(EdgeId::vertical(a, y));
        out.push(EdgeId::vertical(a + s * k, y + 1));
        for n in 1..=params.reach as i64 {
            out.push(EdgeId::horizontal(a, a + s * (n + k), y + 1));
            out.push(EdgeId::horizontal(a + s * (n + k), a + s * k, y + 1));
        }
    };
    for i in 0..l {
        push_detour(x + i, 1);
    }
    for i in l + 1..=2 * l {
        push_detour(x + i, -1);
    }
    out
}

/// Physical anchor `(k(v1 - v2), 2(v1 + v2))` of coarse site `(v1, v2)`.
fn anchor(params: &Thm3Params, (v1, v2): (u64, u64)) -> (i64, i64) {
    (params.offset as i64 * (v1 as i64 - v2 as i64), 2 * (v1 + v2) as i64)
}

/// Result of one red-site exploration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedSiteOutcome {
    /// A red oriented path from `(0,0)` reaches generation `v1 + v2 = height`.
    pub reached: bool,
    /// Deepest generation holding a reachable red site (`None` if the root is not red).
    pub depth: Option<u64>,
    /// A red path from the root to the deepest generation.
    pub path: Vec<(u64, u64)>,
    pub sites_evaluated: u64,
    pub red_sites: u64,
    /// Edges shared by nominal footprints of two sites on `path`, plus edges
    /// read outside a site's nominal footprint.
    pub path_overlaps: u64,
    /// Edges shared by nominal footprints of evaluated sites within one generation.
    pub generation_overlaps: u64,
    pub path_checks: u64,
    pub path_violations: u64,
}

/// Oriented site percolation of red sites with successors `(v1+1, v2)` and
/// `(v1, v2+1)`, explored generation by generation from `(0, 0)`, then
/// verified along one red path.
pub fn red_site_explore(
    model: &AnisoParams,
    params: &Thm3Params,
    cfg: ConfigSeed,
    height: u64,
) -> Result<RedSiteOutcome> {
    if height == 0 {
        return Err(Error::domain("height must be >= 1"));
    }
    model.require_cutoff(params.cutoff)?;
    let view = model.view(cfg);
    check_view(&view, params)?;

    let mut out = RedSiteOutcome::default();
    // per generation: v1 -> (red, recorded footprint, parent v1 in previous generation)
    type Gen = BTreeMap<u64, (bool, Vec<EdgeId>, Option<u64>)>;
    let mut gens: Vec<Gen> = Vec::new();
    let mut frontier: Vec<(u64, Option<u64>)> = vec![(0, None)];
    for g in 0..=height {
        let mut gen = Gen::new();
        for &(v1, parent) in &frontier {
            if gen.contains_key(&v1) {
                continue;
            }
            let (x, y) = anchor(params, (v1, g - v1));
            let mut rec = Recorder::new(&view, true);
            let red = block(&view, &mut rec, params, x, y);
            out.sites_evaluated += 1;
            out.red_sites += red as u64;
            gen.insert(v1, (red, rec.into_log(), parent));
        }
        let mut seen = FxHashSet::default();
        for &v1 in gen.keys() {
            let (x, y) = anchor(params, (v1, g - v1));
            for e in nominal_t3(params, x, y) {
                if !seen.insert(e) {
                    out.generation_overlaps += 1;
                }
            }
        }
        let red: Vec<u64> = gen.iter().filter(|(_, s)| s.0).map(|(&v, _)| v).collect();
        gens.push(gen);
        if red.is_empty() {
            break;
        }
        out.depth = Some(g);
        if g == height {
            out.reached = true;
            break;
        }
        frontier = red.iter().flat_map(|&v| [(v, Some(v)), (v + 1, Some(v))]).collect();
        frontier.sort_unstable();
    }

    let Some(depth) = out.depth else {
        return Ok(out);
    };
    let mut v1 = *gens[depth as usize].iter().find(|(_, s)| s.0).expect("deepest generation has a red site").0;
    let mut path = Vec::new();
    for g in (0..=depth).rev() {
        path.push((v1, g - v1));
        if let Some(p) = gens[g as usize][&v1].2 {
            v1 = p;
        }
    }
    path.reverse();

    let mut owner = FxHashSet::default();
    for &(v1, v2) in &path {
        let (x, y) = anchor(params, (v1, v2));
        let nominal = nominal_t3(params, x, y);
        let own: FxHashSet<&EdgeId> = nominal.iter().collect();
        let recorded = &gens[(v1 + v2) as usize][&v1].1;
        out.path_overlaps += recorded.iter().filter(|e| !own.contains(e)).count() as u64;
        for e in nominal {
            if !owner.insert(e) {
                out.path_overlaps += 1;
            }
        }
    }

    let xs = path.iter().map(|&s| anchor(params, s).0);
    let (lo, hi) = (xs.clone().min().unwrap(), xs.max().unwrap());
    let k = params.cutoff as i64;
    let mut region =
        Region::build(&view, lo - k, hi + params.window as i64 + k, 0, 2 * depth as i64 + 2, params.cutoff);
    for &site in &path {
        out.path_checks += 1;
        if !region.connected((0, 0), anchor(params, site)) {
            out.path_violations += 1;
        }
    }
    out.path = path;
    Ok(out)
}

/// Totals of [`red_site_explore`] over independent trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm3Summary {
    pub params: Thm3Params,
    pub height: u64,
    pub reached: EstimateResult,
    pub sites_evaluated: u64,
    pub red_sites: u64,
    pub path_checks: u64,
    pub path_violations: u64,
    pub path_overlaps: u64,
    pub generation_overlaps: u64,
    pub prob_r: f64,
    pub t_lower_bound: f64,
}

pub fn thm3_coupling_runs(
    seq: &ProbSequence,
    params: &Thm3Params,
    height: u64,
    trials: u64,
    seed: u64,
) -> Result<Thm3Summary> {
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let model = AnisoParams::new(seq.clone(), params.delta, Cutoff::Finite(params.cutoff))?;
    let start = Instant::now();
    let runs = parallel::map_trials(trials, |t| red_site_explore(&model, params, ConfigSeed::new(seed, t), height))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let sum = |f: fn(&RedSiteOutcome) -> u64| runs.iter().map(f).sum::<u64>();
    let reached = runs.iter().filter(|r| r.reached).count() as u64;
    Ok(Thm3Summary {
        params: *params,
        height,
        reached: EstimateResult::from_counts(reached, trials, seed)?.with_wall_time(start.elapsed()),
        sites_evaluated: sum(|r| r.sites_evaluated),
        red_sites: sum(|r| r.red_sites),
        path_checks: sum(|r| r.path_checks),
        path_violations: sum(|r| r.path_violations),
        path_overlaps: sum(|r| r.path_overlaps),
        generation_overlaps: sum(|r| r.generation_overlaps),
        prob_r: prob_r_exact(seq, params),
        t_lower_bound: t3_lower_bound(params),
    })
}
