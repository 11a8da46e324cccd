//! Red sites on the anisotropic lattice: windowed clusters joined by detours.

use perctrunc::aniso::{choose_thm3_params, thm3_coupling_runs};
use perctrunc::ProbSequence;

fn main() -> perctrunc::Result<()> {
    let seq = ProbSequence::constant(0.5)?;
    let params = choose_thm3_params(&seq, 0.9, 0.3, 2.0, 8, 10_000)?;
    println!("{params:?}");
    let s = thm3_coupling_runs(&seq, &params, 10, 200, 9)?;
    println!(
        "reached generation 10 in {:.1}% of runs; {} of {} evaluated sites red",
        100.0 * s.reached.estimate,
        s.red_sites,
        s.sites_evaluated
    );
    println!("exact P(R) = {:.4}, lower bound on P(T) = {:.4}", s.prob_r, s.t_lower_bound);
    println!("path checks {}, violations {}", s.path_checks, s.path_violations);
    Ok(())
}
