//! Executes configured experiments and theory-only predictions.

use nalgebra::DVector;

use super::config::{ConstraintKind, ExperimentConfig, ExperimentKind, NoiseSpec, SweepPoint};
use crate::constraint::{linear_phase_constraints, ConstraintSet};
use crate::error::{Error, Result};
use crate::kernels::{Algorithm, AlgorithmParams};
use crate::sim::monte_carlo::{match_step_size, run_monte_carlo, BudgetRule, MonteCarlo, RunResult};
use crate::sim::scenario::{
    dc_gain_constraint, noise_variance_for_snr, sparse_system_schedule, symmetric_system, Scenario, SignalModel,
};
use crate::theory::{steady_state_emse, transient_predictor, SteadyStatePrediction, TheoryTrace};

/// Matching tolerance on the plateau, in dB.
pub const MATCH_TOLERANCE_DB: f64 = 0.05;

/// How a curve's step size was chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchInfo {
    /// Curve whose plateau was the target.
    pub target: String,
    pub target_db: f64,
    pub evaluations: usize,
}

/// One simulated learning curve with optional theory overlay.
#[derive(Debug)]
pub struct Curve {
    pub label: String,
    pub noise_variance: f64,
    pub snr_db: Option<f64>,
    pub result: RunResult,
    pub theory: Option<TheoryTrace>,
    pub closed_form: Option<Result<SteadyStatePrediction>>,
    pub matched: Option<MatchInfo>,
}

/// Everything produced by [`run_experiment`].
#[derive(Debug)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub curves: Vec<Curve>,
    /// Iterations at which the true system changes.
    pub boundaries: Vec<usize>,
}

/// A single stationary operating point for theory.
#[derive(Debug)]
pub struct Prediction {
    pub label: String,
    pub mu: f64,
    pub noise_variance: f64,
    pub trace: TheoryTrace,
    pub closed_form: Result<SteadyStatePrediction>,
}

fn constraints_for(kind: ConstraintKind, system: &DVector<f64>) -> Result<ConstraintSet> {
    match kind {
        ConstraintKind::LinearPhase => linear_phase_constraints(system.len()),
        ConstraintKind::DcGain => dc_gain_constraint(system),
    }
}

fn noise_for(config: &ExperimentConfig, model: &SignalModel, point: &SweepPoint) -> f64 {
    match (&config.scenario.noise, point.snr_db) {
        (_, Some(snr)) => noise_variance_for_snr(model.signal_power(), snr),
        (NoiseSpec::Variance(v), None) => *v,
        (NoiseSpec::SnrDb(_), None) => unreachable!("SNR sweeps always carry an SNR"),
    }
}

/// Stationary scenario of a non-tracking experiment at one sweep point.
pub fn stationary_scenario(config: &ExperimentConfig, point: &SweepPoint) -> Result<Scenario> {
    let system = symmetric_system(config.filter_length, config.scenario.system_seed);
    let model = SignalModel::new(config.scenario.input, 0.0, system.clone())?;
    let model = model.with_noise_variance(noise_for(config, &model, point));
    Scenario::stationary(model, constraints_for(config.scenario.constraints, &system)?)
}

/// Three-segment sparse tracking scenario.
pub fn tracking_scenario(config: &ExperimentConfig) -> Result<Scenario> {
    let schedule = sparse_system_schedule(config.filter_length, config.iterations, config.scenario.system_seed)?;
    let first = SignalModel::new(config.scenario.input, 0.0, schedule.at(0).clone())?;
    let noise = noise_for(config, &first, &config.sweep()[0]);
    let kind = config.scenario.constraints;
    Scenario::scheduled(config.scenario.input, noise, &schedule, |w| constraints_for(kind, w))
}

fn monte_carlo(config: &ExperimentConfig) -> MonteCarlo {
    let mut mc = MonteCarlo::new(config.trials, config.iterations, config.seed);
    if let Some(t) = config.params.budget {
        mc.budget = BudgetRule::Fixed(t);
    }
    mc
}

fn params(config: &ExperimentConfig, mu: f64) -> AlgorithmParams {
    AlgorithmParams {
        mu,
        alpha: config.params.alpha,
        budget: config.params.budget.unwrap_or(0.0),
        beta_slope: config.params.beta_slope,
    }
}

/// Runs the simulations (and theory overlays) an experiment calls for.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mc = monte_carlo(config);
    let mut curves = Vec::new();

    if config.experiment == ExperimentKind::Exp3 {
        let scenario = tracking_scenario(config)?;
        for &algorithm in &config.algorithms {
            let result = run_monte_carlo(&scenario, algorithm, &params(config, config.params.mu), &mc)?;
            curves.push(Curve {
                label: algorithm.name().to_string(),
                noise_variance: scenario.first().model.noise_variance,
                snr_db: config.sweep()[0].snr_db,
                result,
                theory: None,
                closed_form: None,
                matched: None,
            });
        }
        let boundaries = scenario.stages().iter().skip(1).map(|s| s.start).collect();
        return Ok(ExperimentOutput { config: config.clone(), curves, boundaries });
    }

    for point in config.sweep() {
        let scenario = stationary_scenario(config, &point)?;
        let stage = scenario.first();
        let mut done: Vec<Curve> = Vec::new();

        // Logarithmic algorithms first so their plateaus can serve as targets.
        let mut order = config.algorithms.clone();
        order.sort_by_key(|a| matches!(a, Algorithm::Lms | Algorithm::Clms));
        for algorithm in order {
            let label = format!("{}{}", algorithm.name(), point.suffix);
            let target = match algorithm {
                Algorithm::Lms => Some(Algorithm::Lmls),
                Algorithm::Clms => Some(Algorithm::Clmls),
                _ => None,
            }
            .filter(|_| config.params.match_step_size)
            .and_then(|t| done.iter().find(|c| c.result.algorithm == t));

            let (mu, matched) = match target {
                Some(target) => {
                    let bounds = config.params.match_bounds.map_or((point.mu / 64.0, point.mu), |b| (b[0], b[1]));
                    let target_db = target.result.plateau.msd_db;
                    let m = match_step_size(
                        target_db,
                        algorithm,
                        &scenario,
                        &params(config, point.mu),
                        &mc,
                        bounds,
                        MATCH_TOLERANCE_DB,
                    )?;
                    let info = MatchInfo {
                        target: target.label.clone(),
                        target_db,
                        evaluations: m.evaluations,
                    };
                    (m.mu, Some(info))
                }
                None => (point.mu, None),
            };
            let p = params(config, mu);
            let result = run_monte_carlo(&scenario, algorithm, &p, &mc)?;
            let (theory, closed_form) = if algorithm == Algorithm::Clmls {
                let w0 = DVector::zeros(config.filter_length);
                (
                    Some(transient_predictor(&stage.model, &stage.constraints, &p, &w0, config.iterations)?),
                    Some(steady_state_emse(&stage.model, &stage.constraints, &p)),
                )
            } else {
                (None, None)
            };
            done.push(Curve {
                label,
                noise_variance: stage.model.noise_variance,
                snr_db: point.snr_db,
                result,
                theory,
                closed_form,
                matched,
            });
        }
        // Restore the configured order.
        for &algorithm in &config.algorithms {
            if let Some(i) = done.iter().position(|c| c.result.algorithm == algorithm) {
                curves.push(done.remove(i));
            }
        }
    }
    Ok(ExperimentOutput { config: config.clone(), curves, boundaries: Vec::new() })
}

/// Theory-only CLMLS curves and closed forms at every sweep point.
pub fn predict(config: &ExperimentConfig) -> Result<Vec<Prediction>> {
    if config.experiment == ExperimentKind::Exp3 {
        return Err(Error::Config {
            line: None,
            message: "no theory is available for the sparsity-aware algorithms of exp3".into(),
        });
    }
    config
        .sweep()
        .into_iter()
        .map(|point| {
            let scenario = stationary_scenario(config, &point)?;
            let stage = scenario.first();
            let p = params(config, point.mu);
            let w0 = DVector::zeros(config.filter_length);
            Ok(Prediction {
                label: format!("clmls{}", point.suffix),
                mu: point.mu,
                noise_variance: stage.model.noise_variance,
                trace: transient_predictor(&stage.model, &stage.constraints, &p, &w0, config.iterations)?,
                closed_form: steady_state_emse(&stage.model, &stage.constraints, &p),
            })
        })
        .collect()
}
