//! Ensemble runner, learning-curve metrics and step-size matching.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::scenario::Scenario;
use super::signals::{desired, DelayLine};
use crate::error::{check_len, Error, Result};
use crate::kernels::{Algorithm, AlgorithmParams, FilterState};

/// Floor applied to every dB value so curves never contain `-inf`.
pub const DB_FLOOR: f64 = -400.0;

/// Constraint residuals are spot-checked every this many iterations.
pub const RESIDUAL_CHECK_INTERVAL: usize = 100;

/// `10 log10(x)` clamped at [`DB_FLOOR`].
pub fn power_to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// `10 log10(‖w_opt − w‖² / ‖w_opt‖²)` for a single weight vector.
///
/// Ensemble curves average the ratio over trials before taking the log.
pub fn normalized_msd_db(w: &DVector<f64>, w_opt: &DVector<f64>) -> Result<f64> {
    check_len("weight vector", w_opt.len(), w.len())?;
    let reference = w_opt.norm_squared();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(power_to_db((w_opt - w).norm_squared() / reference))
}

/// How the sparsity budget `t` is chosen for budgeted algorithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetRule {
    /// Use the stage optimum's measure (`‖w_o‖₁` or its arctan counterpart).
    FromOptimum,
    Fixed(f64),
}

/// Ensemble settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub trials: usize,
    pub horizon: usize,
    pub base_seed: u64,
    pub budget: BudgetRule,
    /// Unprojected starting weights; the run starts at `P w_init + f`.
    /// `None` means zero.
    pub initial: Option<DVector<f64>>,
    /// Trailing fraction of the horizon averaged into the plateau.
    pub plateau_fraction: f64,
}

impl MonteCarlo {
    pub fn new(trials: usize, horizon: usize, base_seed: u64) -> Self {
        Self {
            trials,
            horizon,
            base_seed,
            budget: BudgetRule::FromOptimum,
            initial: None,
            plateau_fraction: 0.1,
        }
    }

    /// First index of the plateau window.
    pub fn plateau_start(&self) -> usize {
        let width = ((self.horizon as f64 * self.plateau_fraction).round() as usize).clamp(1, self.horizon);
        self.horizon - width
    }
}

/// Steady-state summary over the plateau window.
#[derive(Debug, Clone, PartialEq)]
pub struct Plateau {
    pub start: usize,
    /// Mean normalised MSD (linear ratio).
    pub msd: f64,
    pub msd_db: f64,
    /// Standard error of `msd` across trials.
    pub msd_stderr: f64,
    /// Mean excess mean-square error `E[w̃ᵀRw̃]`.
    pub emse: f64,
    pub emse_stderr: f64,
}

/// Ensemble-averaged learning curves of one algorithm on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub params: AlgorithmParams,
    pub trials: usize,
    pub diverged_trials: usize,
    pub base_seed: u64,
    /// Mean of `‖w_o − w(n)‖² / ‖w_o‖²` over surviving trials.
    pub msd: Vec<f64>,
    pub msd_db: Vec<f64>,
    /// Per-iteration standard error of `msd`.
    pub msd_stderr: Vec<f64>,
    /// Mean of `w̃ᵀ(n) R w̃(n)`.
    pub emse: Vec<f64>,
    pub plateau: Plateau,
    /// Samples on which a budgeted update fell back to the plain constrained one.
    pub fallback_steps: u64,
    /// Largest `‖Cᵀw − z‖_∞` seen at the spot checks.
    pub max_constraint_residual: f64,
}

impl RunResult {
    pub fn len(&self) -> usize {
        self.msd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.msd.is_empty()
    }

    /// First iteration at which the MSD curve is within `margin_db` of the
    /// plateau.
    pub fn settling_iteration(&self, margin_db: f64) -> Option<usize> {
        let threshold = self.plateau.msd_db + margin_db;
        self.msd_db.iter().position(|&x| x <= threshold)
    }
}

struct TrialTrace {
    msd: Vec<f64>,
    emse: Vec<f64>,
    fallbacks: u64,
    max_residual: f64,
}

fn run_trial(scenario: &Scenario, algorithm: Algorithm, params: &AlgorithmParams, mc: &MonteCarlo, trial: usize) -> Result<TrialTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.base_seed.wrapping_add(trial as u64));
    let first = scenario.first();
    let len = scenario.filter_len();
    let mut line = DelayLine::new(first.model.input, first.model.input_power, len, &mut rng);

    let initial = mc.initial.clone().unwrap_or_else(|| DVector::zeros(len));
    let mut state = FilterState::feasible(&first.constraints, &initial)?;

    let covariances: Vec<DMatrix<f64>> = scenario.stages().iter().map(|s| s.model.covariance()).collect();
    let mut trace = TrialTrace {
        msd: Vec::with_capacity(mc.horizon),
        emse: Vec::with_capacity(mc.horizon),
        fallbacks: 0,
        max_residual: 0.0,
    };

    let mut stage_idx = 0;
    let mut stage_params = *params;
    let budget_for = |idx: usize| match (mc.budget, algorithm.sparsity(params)) {
        (BudgetRule::Fixed(t), _) => t,
        (BudgetRule::FromOptimum, Some(sparsity)) => scenario.stages()[idx].default_budget(sparsity),
        (BudgetRule::FromOptimum, None) => params.budget,
    };
    stage_params.budget = budget_for(0);

    for n in 0..mc.horizon {
        let idx = scenario.stage_index(n);
        if idx != stage_idx {
            stage_idx = idx;
            stage_params.budget = budget_for(idx);
        }
        let stage = &scenario.stages()[stage_idx];
        let deviation = &stage.optimum - &state.weights;
        trace.msd.push(deviation.norm_squared() / stage.optimum.norm_squared());
        trace.emse.push((&covariances[stage_idx] * &deviation).dot(&deviation));

        let u = if n == 0 { line.current() } else { line.advance(&mut rng) };
        let d = desired(&stage.model.system, u, stage.model.noise_variance.sqrt(), &mut rng);
        let out = algorithm.step(&state, u, d, &stage_params, Some(&stage.constraints))?;
        trace.fallbacks += out.fell_back as u64;
        state = out.state;

        if algorithm.is_constrained() && ((n + 1) % RESIDUAL_CHECK_INTERVAL == 0 || n + 1 == mc.horizon) {
            trace.max_residual = trace.max_residual.max(stage.constraints.residual(&state.weights));
        }
    }
    Ok(trace)
}

/// Runs `mc.trials` independent trials and averages their learning curves.
///
/// Trial `i` uses its own RNG seeded with `base_seed + i`. Trials run in
/// parallel but are reduced in index order, so the result is identical for
/// any thread count. Diverged trials are counted and excluded.
pub fn run_monte_carlo(scenario: &Scenario, algorithm: Algorithm, params: &AlgorithmParams, mc: &MonteCarlo) -> Result<RunResult> {
    if mc.trials == 0 || mc.horizon == 0 {
        return Err(Error::InvalidArgument("trials and horizon must be at least 1".into()));
    }
    if let Some(init) = &mc.initial {
        check_len("initial weights", scenario.filter_len(), init.len())?;
    }
    let horizon = mc.horizon;
    let window = mc.plateau_start();

    let mut msd_sum = vec![0.0; horizon];
    let mut msd_sq = vec![0.0; horizon];
    let mut emse_sum = vec![0.0; horizon];
    let mut plateau_msd = Vec::with_capacity(mc.trials);
    let mut plateau_emse = Vec::with_capacity(mc.trials);
    let (mut diverged, mut fallbacks, mut max_residual) = (0, 0u64, 0.0f64);

    let chunk = (rayon::current_num_threads() * 4).max(1);
    let indices: Vec<usize> = (0..mc.trials).collect();
    for block in indices.chunks(chunk) {
        let traces: Vec<Result<TrialTrace>> = block
            .par_iter()
            .map(|&t| run_trial(scenario, algorithm, params, mc, t))
            .collect();
        for trace in traces {
            let trace = match trace {
                Ok(t) => t,
                Err(Error::Diverged { .. }) => {
                    diverged += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for n in 0..horizon {
                msd_sum[n] += trace.msd[n];
                msd_sq[n] += trace.msd[n] * trace.msd[n];
                emse_sum[n] += trace.emse[n];
            }
            plateau_msd.push(mean(&trace.msd[window..]));
            plateau_emse.push(mean(&trace.emse[window..]));
            fallbacks += trace.fallbacks;
            max_residual = max_residual.max(trace.max_residual);
        }
    }

    let survivors = mc.trials - diverged;
    if survivors == 0 {
        return Err(Error::AllTrialsDiverged { trials: mc.trials });
    }
    let k = survivors as f64;
    let msd: Vec<f64> = msd_sum.iter().map(|s| s / k).collect();
    let msd_stderr = msd_sq
        .iter()
        .zip(&msd)
        .map(|(sq, m)| {
            if survivors < 2 {
                0.0
            } else {
                ((sq - k * m * m).max(0.0) / (k - 1.0) / k).sqrt()
            }
        })
        .collect();
    let emse = emse_sum.iter().map(|s| s / k).collect();

    let plateau_mean = mean(&plateau_msd);
    let plateau = Plateau {
        start: window,
        msd: plateau_mean,
        msd_db: power_to_db(plateau_mean),
        msd_stderr: stderr(&plateau_msd),
        emse: mean(&plateau_emse),
        emse_stderr: stderr(&plateau_emse),
    };

    Ok(RunResult {
        algorithm,
        params: *params,
        trials: mc.trials,
        diverged_trials: diverged,
        base_seed: mc.base_seed,
        msd_db: msd.iter().map(|&x| power_to_db(x)).collect(),
        msd,
        msd_stderr,
        emse,
        plateau,
        fallback_steps: fallbacks,
        max_constraint_residual: max_residual,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Outcome of [`match_step_size`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepMatch {
    pub mu: f64,
    pub plateau_db: f64,
    pub evaluations: usize,
}

/// Bisects (in log μ) for the step size whose simulated plateau is within
/// `tolerance_db` of `reference_db`. Assumes the plateau grows with μ.
pub fn match_step_size(
    reference_db: f64,
    algorithm: Algorithm,
    scenario: &Scenario,
    params: &AlgorithmParams,
    mc: &MonteCarlo,
    bounds: (f64, f64),
    tolerance_db: f64,
) -> Result<StepMatch> {
    let (mut lo, mut hi) = bounds;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("invalid step-size bracket [{lo}, {hi}]")));
    }
    let evaluations = std::cell::Cell::new(0usize);
    let plateau = |mu: f64| -> Result<f64> {
        evaluations.set(evaluations.get() + 1);
        let p = AlgorithmParams { mu, ..*params };
        match run_monte_carlo(scenario, algorithm, &p, mc) {
            Ok(r) => Ok(r.plateau.msd_db),
            Err(Error::AllTrialsDiverged { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let lo_db = plateau(lo)?;
    let hi_db = plateau(hi)?;
    if (lo_db - reference_db).abs() <= tolerance_db {
        return Ok(StepMatch { mu: lo, plateau_db: lo_db, evaluations: 2 });
    }
    if (hi_db - reference_db).abs() <= tolerance_db {
        return Ok(StepMatch { mu: hi, plateau_db: hi_db, evaluations: 2 });
    }
    if !(lo_db < reference_db && reference_db < hi_db) {
        return Err(Error::Unreachable {
            target_db: reference_db,
            low: lo,
            low_db: lo_db,
            high: hi,
            high_db: hi_db,
        });
    }

    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        let mid_db = plateau(mid)?;
        if (mid_db - reference_db).abs() <= tolerance_db {
            return Ok(StepMatch {
                mu: mid,
                plateau_db: mid_db,
                evaluations: evaluations.get(),
            });
        }
        if mid_db < reference_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::InvalidArgument(format!(
        "step-size bisection did not converge within [{lo:e}, {hi:e}]"
    )))
}
