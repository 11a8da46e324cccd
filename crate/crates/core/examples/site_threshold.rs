//! Oriented site percolation: survival of the exploration and a threshold estimate.

use perctrunc::renorm::{estimate_site_threshold, site_survival, ORIENTED_SITE_THRESHOLD};

fn main() -> perctrunc::Result<()> {
    for p in [0.5, 0.65, 0.75, 0.95] {
        let r = site_survival(p, 1000, 300, 4)?;
        println!("p = {p}: alive after 1000 steps {:.3}", r.estimate);
    }
    let est = estimate_site_threshold(100, 400, 6, 4)?;
    println!("threshold estimate {est:.4} (reference {ORIENTED_SITE_THRESHOLD})");
    Ok(())
}
