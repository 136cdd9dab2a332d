use clmls::linear_phase_constraints;
use clmls::sim::{match_step_size, run_monte_carlo, symmetric_system, MonteCarlo, Scenario, SignalModel};
use clmls::{Algorithm, AlgorithmParams};

fn scenario(noise: f64) -> Scenario {
    let model = SignalModel::white(noise, symmetric_system(10, 7)).unwrap();
    Scenario::stationary(model, linear_phase_constraints(10).unwrap()).unwrap()
}

#[test]
fn identical_seeds_give_identical_results() {
    let s = scenario(0.01);
    let params = AlgorithmParams::new(0.05, 0.5);
    let mc = MonteCarlo::new(20, 1000, 42);
    let a = run_monte_carlo(&s, Algorithm::Clmls, &params, &mc).unwrap();
    let b = run_monte_carlo(&s, Algorithm::Clmls, &params, &mc).unwrap();
    assert_eq!(a, b);
    let c = run_monte_carlo(&s, Algorithm::Clmls, &params, &MonteCarlo::new(20, 1000, 43)).unwrap();
    assert_ne!(a.msd, c.msd);
}

#[test]
fn thread_count_does_not_change_results() {
    let s = scenario(0.01);
    let params = AlgorithmParams::new(0.05, 0.5);
    let mc = MonteCarlo::new(37, 500, 3);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_monte_carlo(&s, Algorithm::Clms, &params, &mc)).unwrap()
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn standard_error_shrinks_with_the_square_root_of_trials() {
    let s = scenario(0.01);
    let params = AlgorithmParams::new(0.05, 0.5);
    let se = |trials: usize| {
        let r = run_monte_carlo(&s, Algorithm::Clms, &params, &MonteCarlo::new(trials, 2000, 1)).unwrap();
        // Average over the plateau window to steady the estimate.
        let tail = &r.msd_stderr[r.plateau.start..];
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    let ratio = se(100) / se(400);
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn disjoint_seed_sets_agree_within_three_standard_errors() {
    let s = scenario(0.01);
    let params = AlgorithmParams::new(0.05, 0.5);
    let a = run_monte_carlo(&s, Algorithm::Clmls, &params, &MonteCarlo::new(200, 3000, 0)).unwrap();
    let b = run_monte_carlo(&s, Algorithm::Clmls, &params, &MonteCarlo::new(200, 3000, 200)).unwrap();
    let se = (a.plateau.msd_stderr.powi(2) + b.plateau.msd_stderr.powi(2)).sqrt();
    assert!((a.plateau.msd - b.plateau.msd).abs() < 3.0 * se);
}

#[test]
fn zero_step_size_leaves_the_curve_flat() {
    let s = scenario(0.01);
    let r = run_monte_carlo(&s, Algorithm::Clmls, &AlgorithmParams::new(0.0, 0.5), &MonteCarlo::new(5, 300, 1)).unwrap();
    assert!(r.msd.iter().all(|&m| m == r.msd[0]));
    assert!((r.msd[0] - 1.0).abs() < 1e-12, "projected zero start has MSD {}", r.msd[0]);
}

#[test]
fn constraints_hold_throughout_runs() {
    let s = scenario(0.01);
    for algorithm in [Algorithm::Clms, Algorithm::Clmls] {
        let r = run_monte_carlo(&s, algorithm, &AlgorithmParams::new(0.05, 0.5), &MonteCarlo::new(10, 2000, 1)).unwrap();
        assert!(r.max_constraint_residual < 1e-12);
    }
}

#[test]
fn matching_an_algorithm_to_itself_recovers_its_step_size() {
    let s = scenario(0.01);
    let params = AlgorithmParams::new(0.02, 0.5);
    let mc = MonteCarlo::new(50, 3000, 9);
    let reference = run_monte_carlo(&s, Algorithm::Clms, &params, &mc).unwrap();
    let m = match_step_size(reference.plateau.msd_db, Algorithm::Clms, &s, &params, &mc, (0.005, 0.05), 0.01).unwrap();
    assert!((m.mu / 0.02 - 1.0).abs() < 0.05, "matched {}", m.mu);
    assert!((m.plateau_db - reference.plateau.msd_db).abs() <= 0.01);
}

#[test]
fn logarithmic_filter_beats_lms_at_equal_step_size() {
    // At the same μ the logarithmic cost reaches a lower plateau.
    let s = scenario(0.01);
    let params = AlgorithmParams::new(0.05, 0.5);
    let mc = MonteCarlo::new(50, 5000, 1);
    let log = run_monte_carlo(&s, Algorithm::Clmls, &params, &mc).unwrap();
    let lin = run_monte_carlo(&s, Algorithm::Clms, &params, &mc).unwrap();
    assert!(log.plateau.msd_db < lin.plateau.msd_db - 3.0);
}
