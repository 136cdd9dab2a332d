//! Moment functionals of the logarithmic error non-linearity and the
//! closed-form steady state across step sizes.

use clmls::sim::{symmetric_system, SignalModel};
use clmls::theory::{small_error_moments, steady_state_emse, steady_state_fixed_point, GaussianErrorModel};
use clmls::{linear_phase_constraints, AlgorithmParams, Error};

fn main() -> clmls::Result<()> {
    println!("{:>8} {:>8} {:>12} {:>12} {:>12} {:>12}", "sigma^2", "alpha", "h_G", "3 a s^2", "h_U", "15 a^2 s^6");
    for s2 in [1e-3, 1e-2, 1e-1, 1.0] {
        for alpha in [0.5, 5.0] {
            let m = GaussianErrorModel::new(s2, alpha)?;
            let (g0, u0) = small_error_moments(&m);
            println!("{s2:>8.0e} {alpha:>8} {:>12.4e} {g0:>12.4e} {:>12.4e} {u0:>12.4e}", m.h_g(), m.h_u());
        }
    }

    let model = SignalModel::white(0.01, symmetric_system(10, 7))?;
    let cs = linear_phase_constraints(10)?;
    println!("\n{:>6} {:>12} {:>12} {:>10}", "mu", "closed", "exact", "discrim.");
    for mu in [0.01, 0.03, 0.05, 0.1, 0.5, 5.0] {
        let params = AlgorithmParams::new(mu, 0.5);
        match steady_state_emse(&model, &cs, &params) {
            Ok(ss) => println!(
                "{mu:>6} {:>12.4e} {:>12.4e} {:>10.4}",
                ss.emse,
                steady_state_fixed_point(&model, &cs, &params)?,
                ss.discriminant
            ),
            Err(Error::InvalidRegime { discriminant }) => println!("{mu:>6} outside the closed-form regime (discriminant {discriminant:.3})"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
