//! Linearly constrained minimum-variance beamformer on a uniform linear array.
//!
//! The array keeps unit gain towards the look direction while the adaptive
//! filter minimises output power, nulling a strong interferer.

use std::f64::consts::PI;

use clmls::{Algorithm, AlgorithmParams, FilterState, UniformLinearArray};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn response(array: &UniformLinearArray, w: &DVector<f64>, angle: f64) -> f64 {
    let (re, im) = array.steering(angle);
    w.dot(&re).hypot(w.dot(&im))
}

fn main() -> clmls::Result<()> {
    let array = UniformLinearArray::new(8, 0.5);
    let look = 0.0;
    let interferer = 30f64.to_radians();
    let cs = array.constraints(&[(look, 1.0)])?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    for algorithm in [Algorithm::Clms, Algorithm::Clmls] {
        let params = AlgorithmParams::new(2e-4, 1.0);
        let mut state = FilterState::feasible(&cs, &DVector::zeros(8))?;
        let (jr, ji) = array.steering(interferer);
        let (sr, si) = array.steering(look);
        for _ in 0..20_000 {
            // Random-phase narrowband sources plus sensor noise.
            let (ps, pj) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
            let u = DVector::from_fn(8, |m, _| {
                (sr[m] * ps.cos() - si[m] * ps.sin())
                    + 10.0 * (jr[m] * pj.cos() - ji[m] * pj.sin())
                    + 0.1 * rng.sample::<f64, _>(StandardNormal)
            });
            // Output power minimisation: desired signal is zero.
            state = algorithm.step(&state, &u, 0.0, &params, Some(&cs))?.state;
        }
        println!(
            "{algorithm}: gain towards look {:.3}, towards interferer {:.1} dB",
            response(&array, &state.weights, look),
            20.0 * response(&array, &state.weights, interferer).log10()
        );
    }
    Ok(())
}
