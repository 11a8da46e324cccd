//! A K sweep through the harness: JSON record, CSV rows and an SVG chart.

use perctrunc::harness::{self, Axis, ExperimentConfig, SweepAxis};

fn main() -> perctrunc::Result<()> {
    let dir = std::env::temp_dir().join("perctrunc-sweep");
    std::fs::create_dir_all(&dir).map_err(|e| perctrunc::Error::Config(e.to_string()))?;
    let config = ExperimentConfig {
        seq: Some("powlaw:c=0.4,alpha=0.5".into()),
        height: Some(100),
        trials: Some(2000),
        seed: Some(1),
        out: Some(dir.join("sweep.json")),
        csv: Some(dir.join("sweep.csv")),
        sweep: Some(SweepAxis { param: Axis::K, values: vec![2.0, 8.0, 32.0, 128.0] }),
        ..Default::default()
    };
    let record = harness::execute(&config)?;
    for row in &record.rows {
        println!("K = {:>3}: {:.4}  [{:.4}, {:.4}]", row.axis_value, row.estimate, row.ci_lo, row.ci_hi);
    }
    println!("monotonicity violations: {}", record.payload["monotonicity_violations"]);
    harness::emit_plot(&dir.join("sweep.csv"), &dir.join("sweep.svg"))?;
    println!("wrote {}", dir.display());
    Ok(())
}
