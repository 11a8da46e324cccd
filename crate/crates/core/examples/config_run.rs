//! Runs an experiment described in TOML, twice, and compares the payloads.

use perctrunc::harness::{run, ExperimentConfig};

const CONFIG: &str = r#"
operation = "simulate-oriented"
seq = "powlaw:c=0.5,alpha=0.5"
K = 4
H = 50
trials = 1000
seed = 42
"#;

fn main() -> perctrunc::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let first = run(&config)?;
    let second = run(&config)?;
    println!("{}", first.payload_json()?);
    println!("identical payloads: {}", first.payload_json()? == second.payload_json()?);
    println!("took {} ms on {} threads", first.meta.wall_time_ms, first.meta.threads);
    Ok(())
}
