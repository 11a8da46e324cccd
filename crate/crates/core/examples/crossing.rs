//! Left-right crossings of anisotropic nearest-neighbour percolation around
//! the line p_v + p_h = 1.

use perctrunc::aniso::kesten_crossing;

fn main() -> perctrunc::Result<()> {
    let pv = 0.3;
    for ph in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let r = kesten_crossing(pv, ph, 64, 1000, 2)?;
        println!("p_h = {ph}: crossing {:.3}  [{:.3}, {:.3}]", r.estimate, r.ci[0], r.ci[1]);
    }
    Ok(())
}
