//! Connection of {0..l} inside {0..L} in the long-range line graph.

use perctrunc::aniso::kw_sweep;
use perctrunc::ProbSequence;

fn main() -> perctrunc::Result<()> {
    let seq: ProbSequence = "powlaw:c=0.5,alpha=1".parse()?;
    let s = kw_sweep(&seq, 5, &[20, 80, 320], 2000, 1)?;
    for (big_l, r) in s.windows.iter().zip(&s.rows) {
        println!("L = {big_l:>3}: {:.3}  [{:.3}, {:.3}]", r.estimate, r.ci[0], r.ci[1]);
    }
    println!("monotonicity violations: {}", s.monotonicity_violations);
    Ok(())
}
