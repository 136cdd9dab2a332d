use clmls::kernels::{error_nonlinearity, lmls_step, lms_step, reweighted_measure, Sparsity};
use clmls::{Algorithm, AlgorithmParams, ConstraintSet, Error, FilterState};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn vector(len: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0..2.0f64, len).prop_map(DVector::from_vec)
}

/// Well-conditioned `L × K` constraint sets.
fn constraint_set(len: usize, k: usize) -> impl Strategy<Value = ConstraintSet> {
    (prop::collection::vec(-1.0..1.0f64, len * k), vector(k)).prop_filter_map("ill-conditioned", move |(m, z)| {
        let c = DMatrix::from_vec(len, k, m);
        let sv = c.singular_values();
        (sv.min() > 0.1 * sv.max()).then(|| ConstraintSet::new(c, z).ok()).flatten()
    })
}

fn scenario() -> impl Strategy<Value = (ConstraintSet, DVector<f64>, DVector<f64>, f64)> {
    (3usize..9)
        .prop_flat_map(|len| (Just(len), 1..len))
        .prop_flat_map(|(len, k)| (constraint_set(len, k), vector(len), vector(len), -3.0..3.0f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projector_is_an_orthogonal_projection_onto_the_null_space(cs in (3usize..9).prop_flat_map(|l| (Just(l), 1..l)).prop_flat_map(|(l, k)| constraint_set(l, k))) {
        let p = cs.projector();
        prop_assert!((p * p - p).amax() < 1e-10);
        prop_assert!((p - p.transpose()).amax() < 1e-12);
        prop_assert!((p * cs.matrix()).amax() < 1e-10);
        prop_assert!(cs.residual(cs.offset()) <= cs.tolerance());
        let trace: f64 = p.diagonal().sum();
        prop_assert!((trace - (cs.filter_len() - cs.count()) as f64).abs() < 1e-9);
    }

    #[test]
    fn constrained_updates_stay_feasible((cs, w, u, d) in scenario(), mu in 1e-4..0.5f64, alpha in 0.01..100.0f64) {
        let state = FilterState::feasible(&cs, &w).unwrap();
        prop_assert!(cs.residual(&state.weights) <= cs.tolerance());
        let mut params = AlgorithmParams::new(mu, alpha);
        for algorithm in Algorithm::ALL.into_iter().filter(|a| a.is_constrained()) {
            if let Some(s) = algorithm.sparsity(&params) {
                params.budget = s.measure(&state.weights);
            }
            let next = algorithm.step(&state, &u, d, &params, Some(&cs)).unwrap().state;
            prop_assert!(cs.residual(&next.weights) <= cs.tolerance(), "{algorithm}: {}", cs.residual(&next.weights));
        }
    }

    #[test]
    fn projection_is_idempotent_and_lands_on_the_constraint((cs, w, _, _) in scenario()) {
        let once = cs.project(&w);
        prop_assert!(cs.residual(&once) <= cs.tolerance());
        prop_assert!((cs.project(&once) - &once).amax() < 1e-10);
    }

    #[test]
    fn budgeted_updates_meet_the_linearised_budget((cs, w, u, d) in scenario(), t in 0.1..5.0f64, beta in 0.5..10.0f64) {
        let state = FilterState::feasible(&cs, &w).unwrap();
        let params = AlgorithmParams::new(0.05, 1.0).with_budget(t).with_beta_slope(beta);
        for algorithm in [Algorithm::L1Clms, Algorithm::L1Wclms, Algorithm::L1Clmls, Algorithm::L1Wclmls] {
            let out = algorithm.step(&state, &u, d, &params, Some(&cs)).unwrap();
            let Some(aux) = out.aux else {
                prop_assert!(out.fell_back);
                continue;
            };
            let sparsity = algorithm.sparsity(&params).unwrap();
            // sᵀ w(n+1) = sᵀ w(n) + t − t(n); for ℓ1, sᵀ w(n) = ‖w(n)‖₁ so this is sᵀ w(n+1) = t.
            let target = aux.direction.dot(&state.weights) + t - sparsity.measure(&state.weights);
            let got = aux.direction.dot(&out.state.weights);
            prop_assert!((got - target).abs() <= 1e-8 * (1.0 + target.abs()), "{algorithm}: {got} vs {target}");
            prop_assert!((&aux.projector * &aux.direction).amax() < 1e-8);
            prop_assert!((&aux.projector * cs.matrix()).amax() < 1e-8);
        }
    }

    #[test]
    fn nonlinearity_is_odd_and_bounded_by_the_error(e in -1e3..1e3f64, alpha in 1e-6..1e6f64) {
        let g = error_nonlinearity(e, alpha);
        prop_assert_eq!(g, -error_nonlinearity(-e, alpha));
        prop_assert!(g.abs() <= e.abs());
        prop_assert!(g * e >= 0.0);
        prop_assert!(g.abs() <= alpha * e.abs().powi(3) * (1.0 + 1e-12));
        prop_assert!(error_nonlinearity(e + 1e-3, alpha) >= g);
    }

    #[test]
    fn zero_step_size_is_the_feasibility_projection((cs, w, u, d) in scenario()) {
        let params = AlgorithmParams::new(0.0, 1.0);
        let state = FilterState::new(w.clone());
        let projected = cs.project(&w);
        for algorithm in [Algorithm::Clms, Algorithm::Clmls] {
            let next = algorithm.step(&state, &u, d, &params, Some(&cs)).unwrap().state;
            prop_assert!((&next.weights - &projected).amax() < 1e-12);
            let again = algorithm.step(&next, &u, d, &params, Some(&cs)).unwrap().state;
            prop_assert!((&again.weights - &next.weights).amax() < 1e-12);
        }
    }

    #[test]
    fn logarithmic_step_approaches_linear_step_for_large_alpha(w in vector(5), u in vector(5), e in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64]) {
        let state = FilterState::new(w);
        let d = state.weights.dot(&u) + e;
        let p = AlgorithmParams::new(0.1, 1e10);
        let a = lmls_step(&state, &u, d, &p).unwrap().weights;
        let b = lms_step(&state, &u, d, &p).unwrap().weights;
        prop_assert!((a - b).amax() <= 1e-8);
    }

    #[test]
    fn reweighted_measure_lies_between_zero_and_the_support_size(w in vector(8), beta in 0.1..50.0f64) {
        let m = reweighted_measure(&w, beta);
        let support = w.iter().filter(|x| **x != 0.0).count() as f64;
        prop_assert!((0.0..=support).contains(&m));
        let sparsity = Sparsity::Reweighted { beta };
        prop_assert_eq!(sparsity.measure(&w), m);
    }
}

#[test]
fn constrained_step_without_constraints_is_rejected() {
    let state = FilterState::new(DVector::zeros(3));
    let u = DVector::from_element(3, 1.0);
    let err = Algorithm::Clmls.step(&state, &u, 1.0, &AlgorithmParams::new(0.1, 1.0), None).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}
