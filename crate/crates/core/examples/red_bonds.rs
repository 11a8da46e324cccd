//! Red bonds on the anisotropic lattice from shifted horizontal pairs.

use perctrunc::aniso::{choose_thm2_params, thm2_coupling_runs};
use perctrunc::ProbSequence;

fn main() -> perctrunc::Result<()> {
    let seq = ProbSequence::constant(0.5)?;
    for shift in [1, 10] {
        let params = choose_thm2_params(&seq, shift, 0.3, 10_000)?;
        let s = thm2_coupling_runs(&seq, 0.5, &params, 8, 200, 5)?;
        println!("N = {shift}: M1 = {}, M2 = {}, K = {}", params.m1, params.m2, params.cutoff);
        println!(
            "  red H-: {}/{}  red H+: {}/{}  (exact {:.4})",
            s.totals.red_horizontal_minus,
            s.totals.horizontal_minus,
            s.totals.red_horizontal_plus,
            s.totals.horizontal_plus,
            s.prob_h_minus
        );
        println!(
            "  path checks {}, violations {}, footprint overlaps {}",
            s.totals.path_checks, s.totals.path_violations, s.totals.footprint_overlaps
        );
    }
    Ok(())
}
