//! Identifies a symmetric FIR system under linear-phase constraints and
//! compares CLMLS with CLMS whose step size is matched to the same plateau.
//!
//! `cargo run --release --example linear_phase_identification [trials]`

use clmls::experiment::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> clmls::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let mut config = ExperimentConfig::defaults(ExperimentKind::Exp1);
    config.trials = trials;
    let out = run_experiment(&config)?;
    println!("{:<8} {:>10} {:>14} {:>12}  matched to", "curve", "mu", "plateau (dB)", "settling");
    for c in &out.curves {
        let r = &c.result;
        println!(
            "{:<8} {:>10.3e} {:>14.2} {:>12}  {}",
            c.label,
            r.params.mu,
            r.plateau.msd_db,
            r.settling_iteration(3.0).map_or("-".into(), |n| n.to_string()),
            c.matched.as_ref().map_or("-", |m| m.target.as_str()),
        );
    }
    Ok(())
}
