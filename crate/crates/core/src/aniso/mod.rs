//! The anisotropic long-range square lattice.
//!
//! Vertices are `Z^2`. Horizontal bonds `<(x, y), (x + n, y)>` of every
//! length `n` are open with probability `p_n`, vertical nearest-neighbour
//! bonds with probability `delta`. Two couplings map coarse nearest-neighbour
//! structures onto this lattice: red bonds built from shifted horizontal
//! pairs, and red sites built from windowed horizontal clusters joined by
//! vertical detours. Both are checked by comparing each red structure with
//! connectivity computed directly on the sampled configuration.

mod lemmas;
mod thm2;
mod thm3;

use crate::error::{Error, Result};
use crate::sampler::{BondConfig, ConfigSeed, Cutoff, EdgeId};
use crate::sequences::ProbSequence;
use crate::unionfind::DisjointSet;

pub use lemmas::{kesten_crossing, kw_connect_prob, kw_sweep, KwSweep};
pub use thm2::{
    choose_thm2_params, eval_event_e, eval_event_h, prob_e_exact, prob_h_exact, red_bond, thm2_coupling_runs,
    verify_thm2_coupling, LatticeBond, Thm2Params, Thm2Report, Thm2Summary,
};
pub use thm3::{
    choose_offset, choose_thm3_params, choose_window, ell_condition, estimate_window_prob, eval_a, eval_r, eval_t3,
    min_ell, prob_r_exact, probe_eta, red_site_explore, t3_lower_bound, thm3_coupling_runs, RedSiteOutcome, Thm3Params,
    Thm3Summary,
};

/// Sequence, vertical parameter and truncation of one anisotropic model.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisoParams {
    pub seq: ProbSequence,
    pub delta: f64,
    pub cutoff: Cutoff,
}

impl AnisoParams {
    pub fn new(seq: ProbSequence, delta: f64, cutoff: Cutoff) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::domain(format!("delta = {delta} outside [0,1]")));
        }
        Ok(AnisoParams { seq, delta, cutoff })
    }

    pub fn view(&self, cfg: ConfigSeed) -> BondConfig<'_> {
        BondConfig::new(cfg, &self.seq, self.cutoff).with_delta(self.delta).expect("delta validated on construction")
    }

    fn require_cutoff(&self, needed: u64) -> Result<()> {
        if self.cutoff.at_least(needed) {
            Ok(())
        } else {
            Err(Error::domain(format!("truncation {:?} is below the required K = {needed}", self.cutoff)))
        }
    }
}

/// Open-bond components of the lattice restricted to a rectangle.
pub(crate) struct Region {
    x_lo: i64,
    x_hi: i64,
    y_lo: i64,
    y_hi: i64,
    sets: DisjointSet,
}

impl Region {
    /// Unions every open bond with both endpoints in `[x_lo, x_hi] x [y_lo, y_hi]`.
    /// Horizontal lengths are capped by `max_len`.
    pub(crate) fn build(view: &BondConfig<'_>, x_lo: i64, x_hi: i64, y_lo: i64, y_hi: i64, max_len: u64) -> Self {
        let width = (x_hi - x_lo + 1) as usize;
        let height = (y_hi - y_lo + 1) as usize;
        let mut region = Region { x_lo, x_hi, y_lo, y_hi, sets: DisjointSet::new(width * height) };
        let lens: Vec<i64> = (1..=max_len as i64)
            .filter(|&n| view.sequence().p(n as u64) > 0.0 && view.cutoff().admits(n as u64))
            .collect();
        for y in y_lo..=y_hi {
            for x in x_lo..=x_hi {
                for &n in &lens {
                    if x + n > x_hi {
                        break;
                    }
                    if view.open(&EdgeId::horizontal(x, x + n, y)) {
                        region.union((x, y), (x + n, y));
                    }
                }
                if y < y_hi && view.open(&EdgeId::vertical(x, y)) {
                    region.union((x, y), (x, y + 1));
                }
            }
        }
        region
    }

    fn index(&self, (x, y): (i64, i64)) -> Option<usize> {
        if x < self.x_lo || x > self.x_hi || y < self.y_lo || y > self.y_hi {
            return None;
        }
        let width = (self.x_hi - self.x_lo + 1) as usize;
        Some((y - self.y_lo) as usize * width + (x - self.x_lo) as usize)
    }

    fn union(&mut self, a: (i64, i64), b: (i64, i64)) {
        let (i, j) = (self.index(a).expect("in region"), self.index(b).expect("in region"));
        self.sets.union(i, j);
    }

    /// Connected by open bonds inside the region. Points outside are never connected.
    pub(crate) fn connected(&mut self, a: (i64, i64), b: (i64, i64)) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(i), Some(j)) => self.sets.same(i, j),
            _ => false,
        }
    }
}
