use serde::{Deserialize, Serialize};

use super::params::BlockParams;
use crate::error::{Error, Result};
use crate::sampler::{BondConfig, EdgeId, Recorder};

/// Direction of the excursions a block event uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// The block events of the oriented construction, anchored at `(x, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockEvent {
    /// Excursion `(x, m) -> (x ± len, m+1) -> (x, m+2)`.
    R { len: u64, sign: Sign },
    /// Some excursion of length `k+1 ..= K` returns to column `x`.
    S(Sign),
    /// Two `+k` steps `(x, m) -> (x+k, m+1) -> (x+2k, m+2)`.
    L,
    /// `S` on every even row of columns `x` and `x+2k` for `M+1` rounds, plus
    /// one `L` among the first `M` rounds of column `x`.
    T(Sign),
}

/// Whether an event occurred and which edges were read to decide it.
#[derive(Debug, Clone, PartialEq)]
pub struct EventOutcome {
    pub occurred: bool,
    pub footprint: Vec<EdgeId>,
}

/// Evaluates block events through a [`Recorder`].
pub(crate) struct Probe<'v, 'a>(Recorder<'v, 'a>);

impl<'v, 'a> Probe<'v, 'a> {
    pub(crate) fn new(view: &'v BondConfig<'a>, record: bool) -> Self {
        Probe(Recorder::new(view, record))
    }

    #[inline]
    fn open(&mut self, e: EdgeId) -> bool {
        self.0.open(e)
    }

    pub(crate) fn into_log(self) -> Vec<EdgeId> {
        self.0.into_log()
    }

    fn excursion(&mut self, x: i64, m: u64, len: u64, sign: Sign) -> bool {
        let s = sign.factor() * len as i64;
        self.open(EdgeId::oriented1(x, m, s)) && self.open(EdgeId::oriented1(x + s, m + 1, -s))
    }

    fn return_somewhere(&mut self, bp: &BlockParams, x: i64, m: u64, sign: Sign) -> bool {
        (bp.step + 1..=bp.cutoff).any(|i| self.excursion(x, m, i, sign))
    }

    fn ladder_step(&mut self, bp: &BlockParams, x: i64, m: u64) -> bool {
        let k = bp.step as i64;
        self.open(EdgeId::oriented1(x, m, k)) && self.open(EdgeId::oriented1(x + k, m + 1, k))
    }

    fn block(&mut self, bp: &BlockParams, x: i64, m: u64, sign: Sign) -> bool {
        let right = x + 2 * bp.step as i64;
        (0..=bp.rounds).all(|i| self.return_somewhere(bp, x, m + 2 * i, sign))
            && (0..=bp.rounds).all(|i| self.return_somewhere(bp, right, m + 2 * i, sign))
            && (0..bp.rounds).any(|i| self.ladder_step(bp, x, m + 2 * i))
    }

    pub(crate) fn event(&mut self, bp: &BlockParams, kind: BlockEvent, x: i64, m: u64) -> bool {
        match kind {
            BlockEvent::R { len, sign } => self.excursion(x, m, len, sign),
            BlockEvent::S(sign) => self.return_somewhere(bp, x, m, sign),
            BlockEvent::L => self.ladder_step(bp, x, m),
            BlockEvent::T(sign) => self.block(bp, x, m, sign),
        }
    }
}

/// Evaluates a block event on a sampled configuration. Reading stops as soon
/// as the outcome is decided; the footprint lists exactly the edges read.
pub fn eval_event(view: &BondConfig<'_>, bp: &BlockParams, kind: BlockEvent, x: i64, m: u64) -> Result<EventOutcome> {
    if !view.cutoff().at_least(bp.cutoff) {
        return Err(Error::domain(format!(
            "configuration truncated at {:?} but the block events read bonds up to K = {}",
            view.cutoff(),
            bp.cutoff
        )));
    }
    if let BlockEvent::R { len: 0, .. } = kind {
        return Err(Error::domain("excursion length must be >= 1"));
    }
    let mut probe = Probe::new(view, true);
    let occurred = probe.event(bp, kind, x, m);
    Ok(EventOutcome { occurred, footprint: probe.into_log() })
}

/// Every edge the event could read, independent of the configuration.
pub fn nominal_footprint(bp: &BlockParams, kind: BlockEvent, x: i64, m: u64) -> Vec<EdgeId> {
    let mut out = Vec::new();
    push_nominal(&mut out, bp, kind, x, m);
    out
}

fn push_nominal(out: &mut Vec<EdgeId>, bp: &BlockParams, kind: BlockEvent, x: i64, m: u64) {
    let k = bp.step as i64;
    match kind {
        BlockEvent::R { len, sign } => {
            let s = sign.factor() * len as i64;
            out.push(EdgeId::oriented1(x, m, s));
            out.push(EdgeId::oriented1(x + s, m + 1, -s));
        }
        BlockEvent::S(sign) => {
            for len in bp.step + 1..=bp.cutoff {
                push_nominal(out, bp, BlockEvent::R { len, sign }, x, m);
            }
        }
        BlockEvent::L => {
            out.push(EdgeId::oriented1(x, m, k));
            out.push(EdgeId::oriented1(x + k, m + 1, k));
        }
        BlockEvent::T(sign) => {
            for col in [x, x + 2 * k] {
                for i in 0..=bp.rounds {
                    push_nominal(out, bp, BlockEvent::S(sign), col, m + 2 * i);
                }
            }
            for i in 0..bp.rounds {
                push_nominal(out, bp, BlockEvent::L, x, m + 2 * i);
            }
        }
    }
}
