//! CSV, summary and gnuplot emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentKind;
use super::runner::{Curve, ExperimentOutput, Prediction};
use crate::error::{Error, Result};
use crate::sim::monte_carlo::power_to_db;
use crate::theory::SteadyStatePrediction;

/// Learning-curve CSV: `iteration,msd_db,emse[,theory_msd_db,theory_emse]`.
pub fn curve_csv(curve: &Curve) -> String {
    let r = &curve.result;
    let theory = curve.theory.as_ref().map(|t| (t.normalized_msd(), &t.emse));
    let mut out = String::from("iteration,msd_db,emse");
    if theory.is_some() {
        out.push_str(",theory_msd_db,theory_emse");
    }
    out.push('\n');
    for n in 0..r.len() {
        write!(out, "{n},{},{}", r.msd_db[n], r.emse[n]).unwrap();
        if let Some((msd, emse)) = &theory {
            write!(out, ",{},{}", power_to_db(msd[n]), emse[n]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Theory-only CSV: `iteration,msd_db,emse` for `n = 0..=N`.
pub fn prediction_csv(p: &Prediction) -> String {
    let mut out = String::from("iteration,msd_db,emse\n");
    for (n, (msd, emse)) in p.trace.normalized_msd().iter().zip(&p.trace.emse).enumerate() {
        writeln!(out, "{n},{},{emse}", power_to_db(*msd)).unwrap();
    }
    out
}

/// Closed-form steady state per operating point. Points outside the valid
/// regime get a `invalid-regime` status row.
pub fn steady_state_csv(predictions: &[Prediction]) -> String {
    let mut out = String::from("label,mu,noise_variance,emse,msd_db,beta,discriminant,status\n");
    for p in predictions {
        match &p.closed_form {
            Ok(ss) => writeln!(
                out,
                "{},{},{},{},{},{},{},ok",
                p.label,
                p.mu,
                p.noise_variance,
                ss.emse,
                power_to_db(ss.normalized_msd()),
                ss.beta_factor,
                ss.discriminant
            ),
            Err(Error::InvalidRegime { discriminant }) => writeln!(
                out,
                "{},{},{},,,,{discriminant},invalid-regime",
                p.label, p.mu, p.noise_variance
            ),
            Err(e) => writeln!(out, "{},{},{},,,,,error: {e}", p.label, p.mu, p.noise_variance),
        }
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct Summary {
    experiment: String,
    plateau_window_start: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    segment_boundaries: Vec<usize>,
    curve: Vec<CurveSummary>,
    config: toml::Value,
}

#[derive(Serialize)]
struct CurveSummary {
    label: String,
    algorithm: String,
    csv: String,
    mu: f64,
    alpha: f64,
    noise_variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_db: Option<f64>,
    trials: usize,
    diverged_trials: usize,
    fallback_steps: u64,
    max_constraint_residual: f64,
    plateau_msd_db: f64,
    plateau_msd_stderr: f64,
    plateau_emse: f64,
    plateau_emse_stderr: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    segment_plateau_msd_db: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matched_to: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matched_target_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theory: Option<TheorySummary>,
}

#[derive(Serialize)]
struct TheorySummary {
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_emse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_msd_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_factor: Option<f64>,
    discriminant: f64,
    recursion_final_emse: f64,
    recursion_final_msd_db: f64,
}

fn theory_summary(curve: &Curve) -> Option<TheorySummary> {
    let trace = curve.theory.as_ref()?;
    let last = trace.msd.len() - 1;
    let closed: Option<&SteadyStatePrediction> = curve.closed_form.as_ref().and_then(|c| c.as_ref().ok());
    let (status, discriminant) = match &curve.closed_form {
        Some(Ok(ss)) => ("ok".to_string(), ss.discriminant),
        Some(Err(Error::InvalidRegime { discriminant })) => ("invalid-regime".to_string(), *discriminant),
        Some(Err(e)) => (format!("error: {e}"), f64::NAN),
        None => ("unavailable".to_string(), f64::NAN),
    };
    Some(TheorySummary {
        status,
        closed_form_emse: closed.map(|s| s.emse),
        closed_form_msd_db: closed.map(|s| power_to_db(s.normalized_msd())),
        beta_factor: closed.map(|s| s.beta_factor),
        discriminant,
        recursion_final_emse: trace.emse[last],
        recursion_final_msd_db: power_to_db(trace.msd[last] / trace.reference_norm_sq),
    })
}

/// Mean normalised MSD over the last tenth of each segment.
fn segment_plateaus(curve: &Curve, boundaries: &[usize]) -> Vec<f64> {
    if boundaries.is_empty() {
        return Vec::new();
    }
    let msd = &curve.result.msd;
    let mut edges = vec![0];
    edges.extend_from_slice(boundaries);
    edges.push(msd.len());
    edges
        .windows(2)
        .map(|w| {
            let width = ((w[1] - w[0]) / 10).max(1);
            let slice = &msd[w[1] - width..w[1]];
            power_to_db(slice.iter().sum::<f64>() / slice.len() as f64)
        })
        .collect()
}

/// `summary.toml`: plateaus, matched step sizes, closed forms, divergence
/// counts and the resolved configuration.
pub fn summary_toml(output: &ExperimentOutput) -> String {
    let config: toml::Value = toml::from_str(&output.config.to_toml()).expect("resolved config parses");
    let summary = Summary {
        experiment: output.config.experiment.name().into(),
        plateau_window_start: output.curves.first().map_or(0, |c| c.result.plateau.start),
        segment_boundaries: output.boundaries.clone(),
        curve: output
            .curves
            .iter()
            .map(|c| {
                let r = &c.result;
                CurveSummary {
                    label: c.label.clone(),
                    algorithm: r.algorithm.name().into(),
                    csv: format!("{}.csv", c.label),
                    mu: r.params.mu,
                    alpha: r.params.alpha,
                    noise_variance: c.noise_variance,
                    snr_db: c.snr_db,
                    trials: r.trials,
                    diverged_trials: r.diverged_trials,
                    fallback_steps: r.fallback_steps,
                    max_constraint_residual: r.max_constraint_residual,
                    plateau_msd_db: r.plateau.msd_db,
                    plateau_msd_stderr: r.plateau.msd_stderr,
                    plateau_emse: r.plateau.emse,
                    plateau_emse_stderr: r.plateau.emse_stderr,
                    segment_plateau_msd_db: segment_plateaus(c, &output.boundaries),
                    matched_to: c.matched.as_ref().map(|m| m.target.clone()),
                    matched_target_db: c.matched.as_ref().map(|m| m.target_db),
                    theory: theory_summary(c),
                }
            })
            .collect(),
        config,
    };
    toml::to_string(&summary).expect("summary serialises")
}

/// Gnuplot script drawing every learning curve (and theory overlays) into
/// `figure.png`.
pub fn plot_script(output: &ExperimentOutput) -> String {
    let mut s = String::new();
    let kind = output.config.experiment;
    writeln!(s, "set terminal pngcairo noenhanced size 900,600").unwrap();
    writeln!(s, "set output 'figure.png'").unwrap();
    writeln!(s, "set datafile separator ','").unwrap();
    writeln!(s, "set xlabel 'Iteration'").unwrap();
    writeln!(s, "set ylabel 'Normalized MSD (dB)'").unwrap();
    writeln!(s, "set grid").unwrap();
    writeln!(s, "set title '{}'", kind.name()).unwrap();
    for b in &output.boundaries {
        writeln!(s, "set arrow from {b}, graph 0 to {b}, graph 1 nohead dashtype 3").unwrap();
    }
    let mut plots = Vec::new();
    for (i, c) in output.curves.iter().enumerate() {
        let color = i + 1;
        plots.push(format!(
            "'{}.csv' using 1:2 with lines linecolor {color} title '{}'",
            c.label,
            c.label
        ));
        if c.theory.is_some() && matches!(kind, ExperimentKind::Exp2Snr | ExperimentKind::Exp2Mu) {
            plots.push(format!(
                "'{}.csv' using 1:4 with lines linecolor {color} dashtype 2 linewidth 2 title '{} (theory)'",
                c.label,
                c.label
            ));
        }
    }
    writeln!(s, "plot \\\n    {}", plots.join(", \\\n    ")).unwrap();
    s
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Writes curves, summary, plot script and the resolved configuration into
/// `dir`. Returns the paths written.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for c in &output.curves {
        written.push(write(dir, &format!("{}.csv", c.label), &curve_csv(c))?);
    }
    written.push(write(dir, "summary.toml", &summary_toml(output))?);
    written.push(write(dir, "plot.gp", &plot_script(output))?);
    written.push(write(dir, "config.toml", &output.config.to_toml())?);
    Ok(written)
}

/// Writes theory-only curves and the steady-state table into `dir`.
pub fn write_predictions(predictions: &[Prediction], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for p in predictions {
        written.push(write(dir, &format!("theory_{}.csv", p.label), &prediction_csv(p))?);
    }
    written.push(write(dir, "steady_state.csv", &steady_state_csv(predictions))?);
    Ok(written)
}
