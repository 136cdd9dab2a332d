//! Signal models, scenarios and the Monte-Carlo ensemble runner.

pub mod monte_carlo;
pub mod scenario;
pub mod signals;

pub use monte_carlo::{
    match_step_size, normalized_msd_db, power_to_db, run_monte_carlo, BudgetRule, MonteCarlo, Plateau, RunResult,
    StepMatch,
};
pub use scenario::{
    dc_gain_constraint, noise_variance_for_snr, optimal_constrained_wiener, schedule_with_sparsity,
    sparse_system_schedule, symmetric_system, InputKind, Scenario, SignalModel, Stage, SystemSchedule,
    SPARSITY_LEVELS,
};
pub use signals::{desired, generate_signals, DelayLine};
