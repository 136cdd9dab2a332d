//! Tracks a system whose sparsity jumps from 0% to 50% to 90% with the four
//! budgeted variants and reports the plateau reached in each segment.
//!
//! `cargo run --release --example sparse_tracking [trials]`

use clmls::experiment::{run_experiment, ExperimentConfig, ExperimentKind};

fn main() -> clmls::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let mut config = ExperimentConfig::defaults(ExperimentKind::Exp3);
    config.trials = trials;
    let out = run_experiment(&config)?;

    let mut edges = vec![0];
    edges.extend(&out.boundaries);
    edges.push(config.iterations);
    println!("segments start at {:?}", &edges[..edges.len() - 1]);
    for c in &out.curves {
        let plateaus: Vec<String> = edges
            .windows(2)
            .map(|w| {
                let tail = &c.result.msd[w[1] - (w[1] - w[0]) / 10..w[1]];
                format!("{:7.2}", 10.0 * (tail.iter().sum::<f64>() / tail.len() as f64).log10())
            })
            .collect();
        println!("{:<10} {} dB   fallbacks {}", c.label, plateaus.join(" "), c.result.fallback_steps);
    }
    Ok(())
}
