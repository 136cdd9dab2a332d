//! Builds a constraint set, inspects its projector and offset, and checks that
//! every constrained update keeps `Cᵀw = z`.

use clmls::{linear_phase_constraints, Algorithm, AlgorithmParams, ConstraintSet, FilterState};
use nalgebra::{DMatrix, DVector};

fn show(v: &DVector<f64>) -> String {
    format!("{:.4?}", v.as_slice())
}

fn main() -> clmls::Result<()> {
    // Two generic constraints on a length-4 filter.
    let c = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, -1.0, 1.0, 0.5]);
    let z = DVector::from_vec(vec![1.0, 0.25]);
    let cs = ConstraintSet::new(c, z)?;
    println!("projector P = {:.4}", cs.projector());
    println!("offset f = {}", show(cs.offset()));
    println!("residual of f: {:.2e}", cs.residual(cs.offset()));

    let w = DVector::from_vec(vec![0.3, -1.2, 0.8, 2.0]);
    let projected = cs.project(&w);
    println!("P w + f = {} (residual {:.2e})", show(&projected), cs.residual(&projected));

    let u = DVector::from_vec(vec![0.5, -0.1, 1.0, 0.7]);
    let params = AlgorithmParams::new(0.1, 1.0).with_budget(2.0);
    let state = FilterState::feasible(&cs, &w)?;
    for algorithm in Algorithm::ALL.into_iter().filter(|a| a.is_constrained()) {
        let out = algorithm.step(&state, &u, 1.5, &params, Some(&cs))?;
        println!(
            "{algorithm:>10}: residual {:.2e}{}",
            cs.residual(&out.state.weights),
            if out.fell_back { " (fell back)" } else { "" }
        );
    }

    // Linear phase: Cᵀw = 0 forces a symmetric impulse response.
    let lp = linear_phase_constraints(5)?;
    let sym = lp.project(&DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]));
    println!("symmetrised taps: {}", show(&sym));
    Ok(())
}
