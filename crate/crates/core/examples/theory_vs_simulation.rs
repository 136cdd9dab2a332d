//! Ensemble learning curve of CLMLS next to the transient recursion and the
//! closed-form steady state.

use clmls::sim::{noise_variance_for_snr, power_to_db, run_monte_carlo, symmetric_system, MonteCarlo, Scenario, SignalModel};
use clmls::theory::{steady_state_emse, steady_state_fixed_point, transient_predictor};
use clmls::{linear_phase_constraints, Algorithm, AlgorithmParams};
use nalgebra::DVector;

fn main() -> clmls::Result<()> {
    let len = 10;
    let horizon = 20_000;
    let model = SignalModel::white(0.0, symmetric_system(len, 7))?;
    let model = model.with_noise_variance(noise_variance_for_snr(model.signal_power(), 20.0));
    let cs = linear_phase_constraints(len)?;
    let params = AlgorithmParams::new(0.05, 0.5);

    let scenario = Scenario::stationary(model.clone(), cs.clone())?;
    let sim = run_monte_carlo(&scenario, Algorithm::Clmls, &params, &MonteCarlo::new(100, horizon, 1))?;
    let theory = transient_predictor(&model, &cs, &params, &DVector::zeros(len), horizon)?;
    let theory_db: Vec<f64> = theory.normalized_msd().into_iter().map(power_to_db).collect();

    println!("{:>6} {:>12} {:>12}", "n", "sim (dB)", "theory (dB)");
    for n in (0..horizon).step_by(2000) {
        println!("{n:>6} {:>12.2} {:>12.2}", sim.msd_db[n], theory_db[n]);
    }

    let closed = steady_state_emse(&model, &cs, &params)?;
    let exact = steady_state_fixed_point(&model, &cs, &params)?;
    println!("steady-state EMSE: simulated {:.4e}, closed form {:.4e}, exact fixed point {:.4e}", sim.plateau.emse, closed.emse, exact);
    Ok(())
}
