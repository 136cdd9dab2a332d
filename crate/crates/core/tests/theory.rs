use clmls::linear_phase_constraints;
use clmls::sim::{symmetric_system, InputKind, SignalModel};
use clmls::theory::{
    steady_state_emse, steady_state_fixed_point, transient_predictor, GaussianErrorModel,
};
use clmls::{AlgorithmParams, Error};
use nalgebra::DVector;

fn white(noise: f64) -> SignalModel {
    SignalModel::white(noise, symmetric_system(10, 7)).unwrap()
}

#[test]
fn recursion_settles_on_the_closed_form_when_errors_are_small() {
    // ασ_v² = 1e-4: the small-error moment approximations are accurate here.
    let model = white(1e-4);
    let cs = linear_phase_constraints(10).unwrap();
    let params = AlgorithmParams::new(0.5, 1.0);
    let trace = transient_predictor(&model, &cs, &params, &DVector::zeros(10), 60_000).unwrap();
    let closed = steady_state_emse(&model, &cs, &params).unwrap();
    let last = *trace.emse.last().unwrap();
    assert!((last / closed.emse - 1.0).abs() < 5e-3, "{last} vs {}", closed.emse);
    let msd = *trace.msd.last().unwrap();
    assert!((msd / closed.msd - 1.0).abs() < 5e-3, "{msd} vs {}", closed.msd);
}

#[test]
fn exact_fixed_point_agrees_with_closed_form_for_small_errors() {
    let cs = linear_phase_constraints(10).unwrap();
    let params = AlgorithmParams::new(0.05, 1.0);
    for noise in [1e-5, 1e-4] {
        let model = white(noise);
        let exact = steady_state_fixed_point(&model, &cs, &params).unwrap();
        let closed = steady_state_emse(&model, &cs, &params).unwrap().emse;
        assert!((exact / closed - 1.0).abs() < 5e-3, "noise {noise}: {exact} vs {closed}");
    }
}

#[test]
fn closed_form_bias_grows_with_the_error_scale() {
    let cs = linear_phase_constraints(10).unwrap();
    let params = AlgorithmParams::new(0.05, 1.0);
    let gap = |noise: f64| {
        let model = white(noise);
        let exact = steady_state_fixed_point(&model, &cs, &params).unwrap();
        (steady_state_emse(&model, &cs, &params).unwrap().emse / exact - 1.0).abs()
    };
    assert!(gap(1e-4) < gap(1e-3));
    assert!(gap(1e-3) < gap(1e-2));
}

#[test]
fn white_input_beta_factor() {
    // M = P for unit-power white input, so β = tr(P) = L − K.
    let cs = linear_phase_constraints(10).unwrap();
    let ss = steady_state_emse(&white(0.01), &cs, &AlgorithmParams::new(0.05, 0.5)).unwrap();
    assert!((ss.beta_factor - 5.0).abs() < 1e-10);
}

#[test]
fn coloured_input_stays_consistent() {
    let model = SignalModel::new(InputKind::Ar1 { rho: 0.7 }, 1e-4, symmetric_system(8, 3)).unwrap();
    let cs = linear_phase_constraints(8).unwrap();
    let params = AlgorithmParams::new(0.1, 1.0);
    let exact = steady_state_fixed_point(&model, &cs, &params).unwrap();
    let closed = steady_state_emse(&model, &cs, &params).unwrap().emse;
    assert!((exact / closed - 1.0).abs() < 5e-3, "{exact} vs {closed}");
}

#[test]
fn emse_grows_with_step_size_and_noise() {
    let cs = linear_phase_constraints(10).unwrap();
    let emse = |mu: f64, noise: f64| steady_state_emse(&white(noise), &cs, &AlgorithmParams::new(mu, 0.5)).unwrap().emse;
    assert!(emse(0.03, 0.01) < emse(0.05, 0.01));
    assert!(emse(0.05, 0.01) < emse(0.1, 0.01));
    assert!(emse(0.05, 0.001) < emse(0.05, 0.01));
}

#[test]
fn closed_form_rejects_large_steps() {
    let cs = linear_phase_constraints(10).unwrap();
    let err = steady_state_emse(&white(1.0), &cs, &AlgorithmParams::new(1.0, 1.0)).unwrap_err();
    assert!(matches!(err, Error::InvalidRegime { discriminant } if discriminant < 0.0));
}

#[test]
fn moment_functionals_match_gauss_hermite() {
    for (s2, alpha) in [(0.01, 0.5), (0.1, 1.0), (1.0, 0.1)] {
        let m = GaussianErrorModel::new(s2, alpha).unwrap();
        let (g, u) = (m.h_g(), m.h_u());
        assert!((m.h_g_hermite(200).unwrap() / g - 1.0).abs() < 1e-10);
        assert!((m.h_u_hermite(200).unwrap() / u - 1.0).abs() < 1e-10);
    }
}
