//! Survival to a fixed level in the truncated oriented model.

use perctrunc::oriented::estimate_survival;
use perctrunc::ProbSequence;

fn main() -> perctrunc::Result<()> {
    let seq: ProbSequence = "powlaw:c=0.4,alpha=0.5".parse()?;
    for k in [1, 2, 4, 8] {
        let r = estimate_survival(&seq, k, 100, 1, 2000, 7)?;
        println!("K = {k:>2}: P(reach 100) = {:.3}  [{:.3}, {:.3}]", r.estimate, r.ci[0], r.ci[1]);
    }
    Ok(())
}
