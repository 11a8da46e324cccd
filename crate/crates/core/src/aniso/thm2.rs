//! Red bonds: each nearest-neighbour bond of the coarse square lattice is
//! declared red when a shifted horizontal pair (or one vertical bond) is
//! open in the physical lattice.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::{AnisoParams, Region};
use crate::error::{Error, Result};
use crate::parallel;
use crate::renorm::{EventOutcome, Sign};
use crate::sampler::{BondConfig, ConfigSeed, Cutoff, EdgeId, Recorder};
use crate::sequences::{Neumaier, ProbSequence};
use crate::unionfind::DisjointSet;

/// Shift `N`, the two cross-sum ranges `1..=M1` and `M1+1..=M2`, and the
/// truncation `K = M2 + N` they need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm2Params {
    pub shift: u64,
    pub epsilon: f64,
    pub m1: u64,
    pub m2: u64,
    pub cutoff: u64,
}

/// Minimal `M1`, then minimal `M2 > M1`, with
/// `exp(-sum p_n p_{n+N}) < epsilon` over `1..=M1` and over `M1+1..=M2`.
pub fn choose_thm2_params(seq: &ProbSequence, shift: u64, epsilon: f64, horizon: u64) -> Result<Thm2Params> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon = {epsilon} must lie in (0,1)")));
    }
    if shift == 0 {
        return Err(Error::domain("shift N must be >= 1"));
    }
    let first_reaching = |from: u64| -> Option<u64> {
        let mut acc = Neumaier::default();
        (from..=horizon).find(|&n| {
            acc.add(seq.p(n) * seq.p(n + shift));
            (-acc.value()).exp() < epsilon
        })
    };
    let unsatisfiable = |what: &str| {
        Error::Unsatisfiable(format!(
            "the cross sum with shift {shift} does not exceed ln(1/{epsilon}) for {what} within horizon {horizon}"
        ))
    };
    let m1 = first_reaching(1).ok_or_else(|| unsatisfiable("M1"))?;
    let m2 = first_reaching(m1 + 1).ok_or_else(|| unsatisfiable("M2"))?;
    Ok(Thm2Params { shift, epsilon, m1, m2, cutoff: m2 + shift })
}

impl Thm2Params {
    fn range(&self, sign: Sign) -> std::ops::RangeInclusive<u64> {
        match sign {
            Sign::Minus => 1..=self.m1,
            Sign::Plus => self.m1 + 1..=self.m2,
        }
    }
}

/// `P(E(n)) = p_n p_{n+N}`.
pub fn prob_e_exact(seq: &ProbSequence, shift: u64, n: u64) -> f64 {
    seq.p(n) * seq.p(n + shift)
}

/// `P(H) = 1 - prod (1 - p_n p_{n+N})` over the range of `sign`.
pub fn prob_h_exact(seq: &ProbSequence, params: &Thm2Params, sign: Sign) -> f64 {
    1.0 - params.range(sign).map(|n| 1.0 - prob_e_exact(seq, params.shift, n)).product::<f64>()
}

fn pair(rec: &mut Recorder<'_, '_>, shift: u64, x: i64, y: i64, n: u64) -> bool {
    let n = n as i64;
    rec.open(EdgeId::horizontal(x, x + n, y)) && rec.open(EdgeId::horizontal(x + n, x - shift as i64, y))
}

fn check_view(view: &BondConfig<'_>, params: &Thm2Params) -> Result<()> {
    if !view.cutoff().at_least(params.cutoff) {
        return Err(Error::domain(format!("truncation {:?} is below K = M2 + N = {}", view.cutoff(), params.cutoff)));
    }
    Ok(())
}

/// `E(n)` at `(x, y)`: `<(x,y),(x+n,y)>` and `<(x+n,y),(x-N,y)>` are open.
pub fn eval_event_e(view: &BondConfig<'_>, params: &Thm2Params, x: i64, y: i64, n: u64) -> Result<EventOutcome> {
    check_view(view, params)?;
    if n == 0 {
        return Err(Error::domain("E(n) needs n >= 1"));
    }
    let mut rec = Recorder::new(view, true);
    let occurred = pair(&mut rec, params.shift, x, y, n);
    Ok(EventOutcome { occurred, footprint: rec.into_log() })
}

/// `H-` (union of `E(n)` over `1..=M1`) or `H+` (over `M1+1..=M2`) at `(x, y)`.
pub fn eval_event_h(view: &BondConfig<'_>, params: &Thm2Params, x: i64, y: i64, sign: Sign) -> Result<EventOutcome> {
    check_view(view, params)?;
    let mut rec = Recorder::new(view, true);
    let occurred = params.range(sign).any(|n| pair(&mut rec, params.shift, x, y, n));
    Ok(EventOutcome { occurred, footprint: rec.into_log() })
}

/// A nearest-neighbour bond of the coarse lattice, from `(v1, v2)` to
/// `(v1 + 1, v2)` or `(v1, v2 + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeBond {
    Horizontal { v1: i64, v2: i64 },
    Vertical { v1: i64, v2: i64 },
}

impl LatticeBond {
    pub fn between(a: (i64, i64), b: (i64, i64)) -> Result<Self> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        match (b.0 - a.0, b.1 - a.1) {
            (1, 0) => Ok(LatticeBond::Horizontal { v1: a.0, v2: a.1 }),
            (0, 1) => Ok(LatticeBond::Vertical { v1: a.0, v2: a.1 }),
            _ => Err(Error::domain(format!("{a:?} and {b:?} are not nearest neighbours"))),
        }
    }

    pub fn endpoints(self) -> [(i64, i64); 2] {
        match self {
            LatticeBond::Horizontal { v1, v2 } => [(v1, v2), (v1 + 1, v2)],
            LatticeBond::Vertical { v1, v2 } => [(v1, v2), (v1, v2 + 1)],
        }
    }
}

/// Physical image `(N v1, v2)` of a coarse vertex.
fn image(params: &Thm2Params, (v1, v2): (i64, i64)) -> (i64, i64) {
    (params.shift as i64 * v1, v2)
}

/// Event deciding a horizontal red bond: `H-` for even `v1`, `H+` for odd,
/// anchored at `(N(v1+1), v2)` so it joins the images of both endpoints.
fn horizontal_event(params: &Thm2Params, v1: i64, v2: i64) -> (i64, i64, Sign) {
    let sign = if v1.rem_euclid(2) == 0 { Sign::Minus } else { Sign::Plus };
    (params.shift as i64 * (v1 + 1), v2, sign)
}

fn nominal(params: &Thm2Params, bond: LatticeBond) -> Vec<EdgeId> {
    match bond {
        LatticeBond::Vertical { v1, v2 } => vec![EdgeId::vertical(params.shift as i64 * v1, v2)],
        LatticeBond::Horizontal { v1, v2 } => {
            let (x, y, sign) = horizontal_event(params, v1, v2);
            params
                .range(sign)
                .flat_map(|n| {
                    let n = n as i64;
                    [EdgeId::horizontal(x, x + n, y), EdgeId::horizontal(x + n, x - params.shift as i64, y)]
                })
                .collect()
        }
    }
}

/// Whether `bond` is red, with the edges read to decide it.
pub fn red_bond(view: &BondConfig<'_>, params: &Thm2Params, bond: LatticeBond) -> Result<EventOutcome> {
    match bond {
        LatticeBond::Horizontal { v1, v2 } => {
            let (x, y, sign) = horizontal_event(params, v1, v2);
            eval_event_h(view, params, x, y, sign)
        }
        LatticeBond::Vertical { v1, v2 } => {
            if view.delta().is_none() {
                return Err(Error::Contract("vertical red bonds need a delta parameter".into()));
            }
            let e = EdgeId::vertical(params.shift as i64 * v1, v2);
            Ok(EventOutcome { occurred: view.open(&e), footprint: vec![e] })
        }
    }
}

/// Checks of one configuration on the coarse box `[0, box)^2`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thm2Report {
    pub bonds: u64,
    /// Edges claimed by the nominal footprints of two different bonds, plus
    /// recorded edges outside their bond's nominal footprint.
    pub footprint_overlaps: u64,
    pub horizontal_minus: u64,
    pub red_horizontal_minus: u64,
    pub horizontal_plus: u64,
    pub red_horizontal_plus: u64,
    pub vertical: u64,
    pub red_vertical: u64,
    /// Coarse sites joined to the origin by red bonds.
    pub red_cluster: u64,
    /// Red bonds and red-cluster sites checked against physical connectivity.
    pub path_checks: u64,
    pub path_violations: u64,
}

impl Thm2Report {
    fn absorb(&mut self, o: &Thm2Report) {
        self.bonds += o.bonds;
        self.footprint_overlaps += o.footprint_overlaps;
        self.horizontal_minus += o.horizontal_minus;
        self.red_horizontal_minus += o.red_horizontal_minus;
        self.horizontal_plus += o.horizontal_plus;
        self.red_horizontal_plus += o.red_horizontal_plus;
        self.vertical += o.vertical;
        self.red_vertical += o.red_vertical;
        self.red_cluster += o.red_cluster;
        self.path_checks += o.path_checks;
        self.path_violations += o.path_violations;
    }
}

/// Evaluates every bond of the coarse box, checks footprint disjointness,
/// and confirms each red bond and the red cluster of the origin by open
/// paths in the physical lattice.
pub fn verify_thm2_coupling(
    model: &AnisoParams,
    params: &Thm2Params,
    cfg: ConfigSeed,
    box_size: u64,
) -> Result<Thm2Report> {
    if box_size < 2 {
        return Err(Error::domain("box size must be >= 2"));
    }
    model.require_cutoff(params.cutoff)?;
    let view = model.view(cfg);
    let b = box_size as i64;
    let mut report = Thm2Report::default();
    let mut owner: FxHashSet<EdgeId> = FxHashSet::default();
    let mut red = Vec::new();
    let bonds = (0..b).flat_map(|v2| {
        (0..b).flat_map(move |v1| {
            let h = (v1 + 1 < b).then_some(LatticeBond::Horizontal { v1, v2 });
            let v = (v2 + 1 < b).then_some(LatticeBond::Vertical { v1, v2 });
            h.into_iter().chain(v)
        })
    });
    for bond in bonds {
        let out = red_bond(&view, params, bond)?;
        let nominal = nominal(params, bond);
        let own: FxHashSet<&EdgeId> = nominal.iter().collect();
        report.footprint_overlaps += out.footprint.iter().filter(|e| !own.contains(e)).count() as u64;
        for e in nominal {
            if !owner.insert(e) {
                report.footprint_overlaps += 1;
            }
        }
        report.bonds += 1;
        match bond {
            LatticeBond::Horizontal { v1, v2 } => match horizontal_event(params, v1, v2).2 {
                Sign::Minus => {
                    report.horizontal_minus += 1;
                    report.red_horizontal_minus += out.occurred as u64;
                }
                Sign::Plus => {
                    report.horizontal_plus += 1;
                    report.red_horizontal_plus += out.occurred as u64;
                }
            },
            LatticeBond::Vertical { .. } => {
                report.vertical += 1;
                report.red_vertical += out.occurred as u64;
            }
        }
        if out.occurred {
            red.push(bond);
        }
    }

    let n = params.shift as i64;
    let mut region = Region::build(&view, 0, n * (b - 1) + params.m2 as i64, 0, b - 1, params.cutoff);
    let index = |(v1, v2): (i64, i64)| (v2 * b + v1) as usize;
    let mut coarse = DisjointSet::new((b * b) as usize);
    for &bond in &red {
        let [p, q] = bond.endpoints();
        coarse.union(index(p), index(q));
        report.path_checks += 1;
        if !region.connected(image(params, p), image(params, q)) {
            report.path_violations += 1;
        }
    }
    for v2 in 0..b {
        for v1 in 0..b {
            if (v1, v2) != (0, 0) && coarse.same(index((v1, v2)), index((0, 0))) {
                report.red_cluster += 1;
                report.path_checks += 1;
                if !region.connected(image(params, (v1, v2)), (0, 0)) {
                    report.path_violations += 1;
                }
            }
        }
    }
    report.red_cluster += 1;
    Ok(report)
}

/// Totals of [`verify_thm2_coupling`] over independent trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm2Summary {
    pub params: Thm2Params,
    pub delta: f64,
    pub box_size: u64,
    pub trials: u64,
    pub seed: u64,
    /// Horizontal events are anchored `N` to the right of the bond's left image.
    pub anchor_shift: u64,
    pub totals: Thm2Report,
    pub prob_h_minus: f64,
    pub prob_h_plus: f64,
    /// Red-bond frequencies within four standard deviations of the exact
    /// marginals (`H-`, `H+`, vertical).
    pub marginals_agree: [bool; 3],
}

pub fn thm2_coupling_runs(
    seq: &ProbSequence,
    delta: f64,
    params: &Thm2Params,
    box_size: u64,
    trials: u64,
    seed: u64,
) -> Result<Thm2Summary> {
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let model = AnisoParams::new(seq.clone(), delta, Cutoff::Finite(params.cutoff))?;
    let reports =
        parallel::map_trials(trials, |t| verify_thm2_coupling(&model, params, ConfigSeed::new(seed, t), box_size));
    let mut totals = Thm2Report::default();
    for r in reports {
        totals.absorb(&r?);
    }
    let prob_h_minus = prob_h_exact(seq, params, Sign::Minus);
    let prob_h_plus = prob_h_exact(seq, params, Sign::Plus);
    let agree = |s: u64, n: u64, p: f64| n == 0 || crate::stats::within_sigmas(s, n, p, 4.0);
    Ok(Thm2Summary {
        params: *params,
        delta,
        box_size,
        trials,
        seed,
        anchor_shift: params.shift,
        marginals_agree: [
            agree(totals.red_horizontal_minus, totals.horizontal_minus, prob_h_minus),
            agree(totals.red_horizontal_plus, totals.horizontal_plus, prob_h_plus),
            agree(totals.red_vertical, totals.vertical, delta),
        ],
        totals,
        prob_h_minus,
        prob_h_plus,
    })
}
