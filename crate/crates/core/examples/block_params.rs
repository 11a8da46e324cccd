//! Block parameters and the exact probabilities of the oriented block events.

use perctrunc::renorm::{choose_block_params, prob_s_exact, prob_t_exact, t_bound_chain};
use perctrunc::ProbSequence;

fn main() -> perctrunc::Result<()> {
    let seq = ProbSequence::constant(0.5)?;
    for eps in [0.5, 0.3, 0.1, 0.05] {
        let bp = choose_block_params(&seq, eps, 10_000)?;
        let t = prob_t_exact(&seq, &bp)?;
        let chain = t_bound_chain(&bp, t);
        println!(
            "eps = {eps}: k = {}, M = {}, K = {}, P(S) = {:.6}, P(T) = {:.6} >= {:.6} >= {:.2}",
            bp.step,
            bp.rounds,
            bp.cutoff,
            prob_s_exact(&seq, bp.step, bp.cutoff)?,
            chain.exact,
            chain.cubed,
            chain.floor
        );
    }
    Ok(())
}
