//! Renormalized exploration on one configuration, re-verified edge by edge.

use perctrunc::renorm::{choose_block_params, estimate_exploration_survival, explore, verify_coupling};
use perctrunc::{ConfigSeed, ProbSequence};

fn main() -> perctrunc::Result<()> {
    let seq = ProbSequence::constant(0.5)?;
    let bp = choose_block_params(&seq, 0.3, 10_000)?;
    let cfg = ConfigSeed::new(11, 0);
    let state = explore(&seq, &bp, cfg, 50)?;
    println!(
        "{} visits: {} accepted, {} rejected, alive = {}",
        state.steps(),
        state.accepted.len(),
        state.rejected.len(),
        state.alive
    );
    for v in state.visits.iter().take(8) {
        println!("  ({}, {}) {} reading {} edges", v.vertex.v, v.vertex.u, v.accepted, v.footprint.len());
    }
    let report = verify_coupling(&state, &seq, cfg, &bp)?;
    println!("{report:?}");

    let s = estimate_exploration_survival(&seq, 0.05, 200, 500, 3)?;
    println!(
        "eps = 0.05: P(T) = {:.3}, alive after 500 steps in {:.1}% of runs",
        s.event_probability,
        100.0 * s.estimate.estimate
    );
    Ok(())
}
