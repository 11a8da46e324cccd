use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{compensated_sum, Neumaier, ProbSequence};

/// Construction parameters for the oriented block events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub epsilon: f64,
    /// `k`: the shortest bond length with positive probability.
    pub step: u64,
    /// `M`: number of ladder rounds; the event spans `2(M+1)` levels.
    pub rounds: u64,
    /// `K`: the largest bond length any event reads.
    pub cutoff: u64,
}

impl BlockParams {
    /// Vertical extent `2(M+1)` of one block.
    pub fn height(&self) -> u64 {
        2 * (self.rounds + 1)
    }
}

/// `(1 - p_k^2)^M < epsilon / 3`.
pub fn rounds_condition(pk: f64, epsilon: f64, rounds: u64) -> bool {
    (1.0 - pk * pk).powf(rounds as f64) < epsilon / 3.0
}

/// `1 - exp(-sum_{i=k+1}^{K} p_i^2) >= (1 - epsilon/3)^(1/(M+1))`.
pub fn cutoff_condition(seq: &ProbSequence, step: u64, rounds: u64, epsilon: f64, cutoff: u64) -> bool {
    let sum = compensated_sum((step + 1..=cutoff).map(|i| {
        let p = seq.p(i);
        p * p
    }));
    cutoff_holds(sum, rounds, epsilon)
}

fn cutoff_holds(square_sum: f64, rounds: u64, epsilon: f64) -> bool {
    1.0 - (-square_sum).exp() >= (1.0 - epsilon / 3.0).powf(1.0 / (rounds + 1) as f64)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon = {epsilon} must lie in (0,1)")));
    }
    Ok(())
}

/// Minimal `M` and `K` for the given sequence and `epsilon`, with `K`
/// searched up to `horizon`.
pub fn choose_block_params(seq: &ProbSequence, epsilon: f64, horizon: u64) -> Result<BlockParams> {
    check_epsilon(epsilon)?;
    let step = seq.support_min(horizon).ok_or(Error::EmptySupport { horizon })?;
    let pk = seq.p(step);

    let mut rounds = if pk >= 1.0 {
        1
    } else {
        let guess = ((epsilon / 3.0).ln() / (1.0 - pk * pk).ln()).ceil();
        if !guess.is_finite() || guess > 1e15 {
            return Err(Error::Unsatisfiable(format!("p_k = {pk} is too small for a representable number of rounds")));
        }
        (guess as u64).max(1)
    };
    while rounds > 1 && rounds_condition(pk, epsilon, rounds - 1) {
        rounds -= 1;
    }
    while !rounds_condition(pk, epsilon, rounds) {
        rounds += 1;
    }

    // incremental prefix sums, identical in rounding to `cutoff_condition`
    let mut acc = Neumaier::default();
    let mut cutoff = None;
    for k in step + 1..=horizon {
        let p = seq.p(k);
        acc.add(p * p);
        if cutoff_holds(acc.value(), rounds, epsilon) {
            cutoff = Some(k);
            break;
        }
    }
    let cutoff = cutoff.ok_or_else(|| {
        Error::Unsatisfiable(format!(
            "no K <= {horizon} satisfies 1 - exp(-sum p_i^2) >= (1 - eps/3)^(1/(M+1)) with M = {rounds}; \
             the square sum beyond k = {step} is {:.6}",
            acc.value()
        ))
    })?;

    let bp = BlockParams { epsilon, step, rounds, cutoff };
    debug_assert!(rounds_condition(pk, epsilon, rounds) && !rounds_condition(pk, epsilon, rounds - 1));
    debug_assert!(cutoff_condition(seq, step, rounds, epsilon, cutoff));
    debug_assert!(!cutoff_condition(seq, step, rounds, epsilon, cutoff - 1));
    Ok(bp)
}

/// `P(L) = p_k^2`.
pub fn prob_l(seq: &ProbSequence, horizon: u64) -> Result<f64> {
    let k = seq.support_min(horizon).ok_or(Error::EmptySupport { horizon })?;
    let p = seq.p(k);
    Ok(p * p)
}

/// `P(S) = 1 - prod_{i=k+1}^{K} (1 - p_i^2)`.
pub fn prob_s_exact(seq: &ProbSequence, step: u64, cutoff: u64) -> Result<f64> {
    if cutoff <= step {
        return Err(Error::domain(format!("need K > k, got K = {cutoff}, k = {step}")));
    }
    if (step + 1..=cutoff).any(|i| seq.p(i) >= 1.0) {
        return Ok(1.0);
    }
    let log_miss: f64 = compensated_sum((step + 1..=cutoff).map(|i| {
        let p = seq.p(i);
        (-(p * p)).ln_1p()
    }));
    Ok(-log_miss.exp_m1())
}

/// `P(T) = P(S)^(2(M+1)) (1 - (1 - p_k^2)^M)`.
pub fn prob_t_exact(seq: &ProbSequence, bp: &BlockParams) -> Result<f64> {
    let s = prob_s_exact(seq, bp.step, bp.cutoff)?;
    let pk = seq.p(bp.step);
    let ladder = 1.0 - (1.0 - pk * pk).powf(bp.rounds as f64);
    Ok(s.powf((2 * (bp.rounds + 1)) as f64) * ladder)
}

/// The lower-bound chain `P(T) >= (1 - eps/3)^3 >= 1 - eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChain {
    pub exact: f64,
    pub cubed: f64,
    pub floor: f64,
    pub holds: bool,
}

pub fn t_bound_chain(bp: &BlockParams, exact: f64) -> BoundChain {
    let cubed = (1.0 - bp.epsilon / 3.0).powi(3);
    let floor = 1.0 - bp.epsilon;
    BoundChain { exact, cubed, floor, holds: exact >= cubed && cubed >= floor }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{Table, Tail};

    fn c(p: f64) -> ProbSequence {
        ProbSequence::constant(p).unwrap()
    }

    /// Linear scans straight from the defining inequalities.
    fn brute(seq: &ProbSequence, eps: f64, horizon: u64) -> Option<(u64, u64, u64)> {
        let k = (1..=horizon).find(|&n| seq.p(n) > 0.0)?;
        let pk = seq.p(k);
        let m = (1..).find(|&m| (1.0 - pk * pk).powf(m as f64) < eps / 3.0)?;
        let target = (1.0 - eps / 3.0).powf(1.0 / (m + 1) as f64);
        let mut s = 0.0;
        let kk = (k + 1..=horizon).find(|&kk| {
            s += seq.p(kk) * seq.p(kk);
            1.0 - (-s).exp() >= target
        })?;
        Some((k, m, kk))
    }

    #[test]
    fn choose_examples() {
        let bp = choose_block_params(&c(0.5), 0.3, 1000).unwrap();
        assert_eq!((bp.step, bp.rounds, bp.cutoff), (1, 9, 20));
        // with M = 1 the target is 0.9^(1/2), reached once K - 1 >= 2.97
        let bp = choose_block_params(&c(1.0), 0.3, 1000).unwrap();
        assert_eq!((bp.step, bp.rounds, bp.cutoff), (1, 1, 4));
        let t = ProbSequence::Table(Table::new(vec![(2, 0.5)], Tail::Zero).unwrap());
        assert!(matches!(choose_block_params(&t, 0.3, 1000), Err(Error::Unsatisfiable(_))));
        assert!(matches!(choose_block_params(&c(0.0), 0.3, 100), Err(Error::EmptySupport { .. })));
        assert!(choose_block_params(&c(0.5), 1.5, 100).is_err());
    }

    #[test]
    fn choose_matches_brute_force() {
        let seqs = [
            c(0.5),
            c(0.2),
            ProbSequence::InverseSqrt,
            ProbSequence::power_law(0.7, 0.4).unwrap(),
            ProbSequence::RemarkP,
        ];
        for seq in &seqs {
            for eps in [0.05, 0.1, 0.3, 0.6, 0.9] {
                let got = choose_block_params(seq, eps, 20_000).ok().map(|bp| (bp.step, bp.rounds, bp.cutoff));
                assert_eq!(got, brute(seq, eps, 20_000), "{seq} eps={eps}");
            }
        }
    }

    #[test]
    fn probability_examples() {
        assert!((prob_l(&c(0.3), 10).unwrap() - 0.09).abs() < 1e-15);
        assert_eq!(prob_l(&c(1.0), 10).unwrap(), 1.0);
        let t = ProbSequence::Table(Table::new(vec![(2, 0.5)], Tail::Zero).unwrap());
        assert_eq!(prob_l(&t, 10).unwrap(), 0.25);

        assert!((prob_s_exact(&c(0.5), 1, 3).unwrap() - 0.4375).abs() < 1e-15);
        assert_eq!(prob_s_exact(&c(0.0), 1, 3).unwrap(), 0.0);
        assert_eq!(prob_s_exact(&c(1.0), 1, 2).unwrap(), 1.0);
        assert!(prob_s_exact(&c(0.5), 3, 3).is_err());

        let bp = BlockParams { epsilon: 0.3, step: 1, rounds: 1, cutoff: 3 };
        // 0.4375^4 * 0.25, evaluated by hand
        let t = prob_t_exact(&c(0.5), &bp).unwrap();
        assert!((t - 0.009_159_088_134_765_625).abs() < 1e-15, "{t}");

        let chosen = choose_block_params(&c(0.5), 0.3, 1000).unwrap();
        let t = prob_t_exact(&c(0.5), &chosen).unwrap();
        assert!(t >= 0.7);
        assert!(t_bound_chain(&chosen, t).holds);

        let all = BlockParams { epsilon: 0.3, step: 1, rounds: 1, cutoff: 6 };
        assert_eq!(prob_t_exact(&c(1.0), &all).unwrap(), 1.0);
    }
}
