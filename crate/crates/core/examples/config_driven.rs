//! Parses a TOML experiment description, runs it and writes the CSV curves,
//! summary and gnuplot script, as the `clmls run` command does.
//!
//! `cargo run --release --example config_driven [out-dir]`

use clmls::experiment::{parse_config, run_experiment, write_outputs};

const CONFIG: &str = r#"
experiment = "custom"
algorithms = ["clms", "clmls"]
iterations = 3000
trials = 40

[params]
mu = 0.05
alpha = 0.5

[scenario]
input = "ar1"
ar1_coefficient = 0.5
snr_db = 25
"#;

fn main() -> clmls::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "results-config-driven".into());
    let validated = parse_config(CONFIG)?;
    for d in &validated.defaults_applied {
        println!("default: {d}");
    }
    let out = run_experiment(&validated.config)?;
    for path in write_outputs(&out, dir.as_ref())? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
