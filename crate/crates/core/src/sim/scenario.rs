//! Signal models, constrained Wiener solutions and system schedules.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constraint::ConstraintSet;
use crate::error::{check_len, Error, Result};
use crate::kernels::{reweighted_measure, Sparsity};

/// Statistics of the scalar input stream feeding the tapped delay line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputKind {
    White,
    /// First-order autoregressive stream with lag-1 correlation `rho`.
    Ar1 { rho: f64 },
}

/// Gaussian system-identification model `d(n) = w_sysᵀ u(n) + v(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalModel {
    pub input: InputKind,
    /// Variance of the scalar input stream.
    pub input_power: f64,
    pub noise_variance: f64,
    pub system: DVector<f64>,
}

impl SignalModel {
    pub fn new(input: InputKind, noise_variance: f64, system: DVector<f64>) -> Result<Self> {
        if !(noise_variance >= 0.0) {
            return Err(Error::NegativeVariance(noise_variance));
        }
        if let InputKind::Ar1 { rho } = input {
            if !(rho.abs() < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "AR(1) coefficient must satisfy |rho| < 1, got {rho}"
                )));
            }
        }
        if system.is_empty() {
            return Err(Error::InvalidArgument("system must have at least one tap".into()));
        }
        Ok(Self {
            input,
            input_power: 1.0,
            noise_variance,
            system,
        })
    }

    pub fn white(noise_variance: f64, system: DVector<f64>) -> Result<Self> {
        Self::new(InputKind::White, noise_variance, system)
    }

    pub fn filter_len(&self) -> usize {
        self.system.len()
    }

    /// Input covariance `R = E[u uᵀ]`, Toeplitz with entries `σ_u² ρ^|i−j|`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let l = self.filter_len();
        let rho = match self.input {
            InputKind::White => 0.0,
            InputKind::Ar1 { rho } => rho,
        };
        DMatrix::from_fn(l, l, |i, j| {
            let lag = i.abs_diff(j) as i32;
            self.input_power * if lag == 0 { 1.0 } else { rho.powi(lag) }
        })
    }

    /// `p = E[u d] = R w_sys`.
    pub fn cross_correlation(&self) -> DVector<f64> {
        self.covariance() * &self.system
    }

    /// Power of the noiseless desired signal, `w_sysᵀ R w_sys`.
    pub fn signal_power(&self) -> f64 {
        self.system.dot(&self.cross_correlation())
    }

    pub fn with_system(&self, system: DVector<f64>) -> Self {
        Self {
            system,
            ..self.clone()
        }
    }

    pub fn with_noise_variance(&self, noise_variance: f64) -> Self {
        Self {
            noise_variance,
            ..self.clone()
        }
    }
}

/// Noise variance giving `snr_db` for a desired-signal power `signal_power`.
pub fn noise_variance_for_snr(signal_power: f64, snr_db: f64) -> f64 {
    signal_power * 10f64.powf(-snr_db / 10.0)
}

/// Minimiser of the mean-square error subject to `Cᵀw = z`:
/// `w_o = h + R⁻¹C (CᵀR⁻¹C)⁻¹ (z − Cᵀh)` with `h = R⁻¹p`.
pub fn optimal_constrained_wiener(model: &SignalModel, cs: &ConstraintSet) -> Result<DVector<f64>> {
    check_len("constraint filter length", model.filter_len(), cs.filter_len())?;
    let r = Cholesky::new(model.covariance()).ok_or(Error::Singular("input covariance R"))?;
    let h = r.solve(&model.cross_correlation());
    let r_inv_c = r.solve(cs.matrix());
    let gram = Cholesky::new(cs.matrix().tr_mul(&r_inv_c)).ok_or(Error::Singular("CᵀR⁻¹C"))?;
    let lambda = gram.solve(&(cs.values() - cs.matrix().tr_mul(&h)));
    Ok(h + r_inv_c * lambda)
}

/// Piecewise-constant true system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSchedule {
    segments: Vec<(usize, DVector<f64>)>,
}

impl SystemSchedule {
    pub fn constant(system: DVector<f64>) -> Self {
        Self {
            segments: vec![(0, system)],
        }
    }

    /// Segments given as `(start, system)` with strictly increasing starts, the
    /// first at zero.
    pub fn new(segments: Vec<(usize, DVector<f64>)>) -> Result<Self> {
        if segments.first().map(|s| s.0) != Some(0) {
            return Err(Error::InvalidArgument("first segment must start at 0".into()));
        }
        let len = segments[0].1.len();
        for pair in segments.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidArgument("segment starts must increase".into()));
            }
        }
        for (_, w) in &segments {
            check_len("scheduled system length", len, w.len())?;
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[(usize, DVector<f64>)] {
        &self.segments
    }

    pub fn boundaries(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.0).collect()
    }

    /// System active at sample `n`.
    pub fn at(&self, n: usize) -> &DVector<f64> {
        let idx = self.segments.partition_point(|s| s.0 <= n) - 1;
        &self.segments[idx].1
    }
}

/// Sparsity levels of the time-varying identification experiment.
pub const SPARSITY_LEVELS: [f64; 3] = [0.0, 0.5, 0.9];

/// Three-segment schedule switching at `⌊N/3⌋` and `⌊2N/3⌋` from a dense
/// system to 50% and then 90% exactly-zero taps.
///
/// The tap values are drawn once from a seeded Gaussian; later segments zero a
/// nested random subset and every segment is rescaled to unit norm.
pub fn sparse_system_schedule(len: usize, horizon: usize, seed: u64) -> Result<SystemSchedule> {
    schedule_with_sparsity(len, horizon, &SPARSITY_LEVELS, seed)
}

/// Generalisation of [`sparse_system_schedule`] to arbitrary levels, with
/// segments of equal length `⌊N/k⌋`.
pub fn schedule_with_sparsity(len: usize, horizon: usize, levels: &[f64], seed: u64) -> Result<SystemSchedule> {
    if len == 0 || levels.is_empty() || horizon < levels.len() {
        return Err(Error::InvalidArgument(
            "schedule needs taps, levels and at least one sample per segment".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let taps: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut rng);

    let k = levels.len();
    let mut segments = Vec::with_capacity(k);
    for (i, &level) in levels.iter().enumerate() {
        if !(0.0..1.0).contains(&level) {
            return Err(Error::InvalidArgument(format!("sparsity level {level} not in [0, 1)")));
        }
        let zeros = (level * len as f64).round() as usize;
        let mut w = DVector::from_vec(taps.clone());
        for &j in &order[..zeros] {
            w[j] = 0.0;
        }
        let norm = w.norm();
        segments.push((i * horizon / k, w / norm));
    }
    SystemSchedule::new(segments)
}

/// Seeded random linear-phase system of unit norm.
pub fn symmetric_system(len: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half: Vec<f64> = (0..len.div_ceil(2)).map(|_| rng.sample(StandardNormal)).collect();
    let w = DVector::from_fn(len, |i, _| half[i.min(len - 1 - i)]);
    let norm = w.norm();
    w / norm
}

/// One segment of a [`Scenario`]: the model, constraints and optimum in force
/// from `start` onwards.
#[derive(Debug, Clone)]
pub struct Stage {
    pub start: usize,
    pub model: SignalModel,
    pub constraints: ConstraintSet,
    pub optimum: DVector<f64>,
}

impl Stage {
    pub fn new(start: usize, model: SignalModel, constraints: ConstraintSet) -> Result<Self> {
        let optimum = optimal_constrained_wiener(&model, &constraints)?;
        Ok(Self {
            start,
            model,
            constraints,
            optimum,
        })
    }

    /// Sparsity budget of the optimum: `‖w_o‖₁`, or its arctan measure for
    /// reweighted variants.
    pub fn default_budget(&self, sparsity: Sparsity) -> f64 {
        match sparsity {
            Sparsity::L1 => self.optimum.lp_norm(1),
            Sparsity::Reweighted { beta } => reweighted_measure(&self.optimum, beta),
        }
    }
}

/// Everything a Monte-Carlo run needs to know about the environment.
///
/// Input statistics are shared by all stages so the delay line runs
/// continuously across system switches.
#[derive(Debug, Clone)]
pub struct Scenario {
    stages: Vec<Stage>,
}

impl Scenario {
    pub fn stationary(model: SignalModel, constraints: ConstraintSet) -> Result<Self> {
        Ok(Self {
            stages: vec![Stage::new(0, model, constraints)?],
        })
    }

    /// One stage per schedule segment. `constraints_for` builds the constraint
    /// set for each segment's system.
    pub fn scheduled<F>(input: InputKind, noise_variance: f64, schedule: &SystemSchedule, mut constraints_for: F) -> Result<Self>
    where
        F: FnMut(&DVector<f64>) -> Result<ConstraintSet>,
    {
        let stages = schedule
            .segments()
            .iter()
            .map(|(start, w)| {
                let model = SignalModel::new(input, noise_variance, w.clone())?;
                Stage::new(*start, model, constraints_for(w)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn first(&self) -> &Stage {
        &self.stages[0]
    }

    pub fn filter_len(&self) -> usize {
        self.stages[0].model.filter_len()
    }

    pub fn stage_index(&self, n: usize) -> usize {
        self.stages.partition_point(|s| s.start <= n) - 1
    }
}

/// DC-gain constraint `1ᵀw = 1ᵀw_sys` used with the sparse schedule.
pub fn dc_gain_constraint(system: &DVector<f64>) -> Result<ConstraintSet> {
    let len = system.len();
    ConstraintSet::new(DMatrix::from_element(len, 1, 1.0), DVector::from_element(1, system.sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::linear_phase_constraints;
    use nalgebra::LU;

    #[test]
    fn wiener_is_unconstrained_solution_when_feasible() {
        let w = symmetric_system(6, 3);
        let model = SignalModel::new(InputKind::Ar1 { rho: 0.6 }, 0.01, w.clone()).unwrap();
        let cs = linear_phase_constraints(6).unwrap();
        let wo = optimal_constrained_wiener(&model, &cs).unwrap();
        assert!((wo - w).amax() < 1e-12);
    }

    #[test]
    fn wiener_hand_example() {
        let model = SignalModel::white(0.1, DVector::from_vec(vec![1.0, 1.0])).unwrap();
        let cs = ConstraintSet::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), DVector::from_element(1, 2.0)).unwrap();
        let wo = optimal_constrained_wiener(&model, &cs).unwrap();
        assert!((wo - DVector::from_vec(vec![2.0, 1.0])).amax() < 1e-14);
    }

    #[test]
    fn wiener_matches_kkt_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let sys = DVector::from_fn(5, |_, _| rng.sample::<f64, _>(StandardNormal));
            let model = SignalModel::new(InputKind::Ar1 { rho: rng.gen_range(-0.8..0.8) }, 0.1, sys).unwrap();
            let c = DMatrix::from_fn(5, 2, |_, _| rng.sample::<f64, _>(StandardNormal));
            let z = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            let cs = ConstraintSet::new(c.clone(), z.clone()).unwrap();
            let wo = optimal_constrained_wiener(&model, &cs).unwrap();
            assert!(cs.residual(&wo) <= 1e-10);

            // KKT of min (w−h)ᵀR(w−h) s.t. Cᵀw = z: [2R C; Cᵀ 0][w; λ] = [2Rh; z].
            let r = model.covariance();
            let h = &model.system;
            let mut kkt = DMatrix::zeros(7, 7);
            kkt.view_mut((0, 0), (5, 5)).copy_from(&(&r * 2.0));
            kkt.view_mut((0, 5), (5, 2)).copy_from(&c);
            kkt.view_mut((5, 0), (2, 5)).copy_from(&c.transpose());
            let mut rhs = DVector::zeros(7);
            rhs.rows_mut(0, 5).copy_from(&(&r * h * 2.0));
            rhs.rows_mut(5, 2).copy_from(&z);
            let sol = LU::new(kkt).solve(&rhs).unwrap();
            assert!((wo - sol.rows(0, 5)).amax() < 1e-10);
        }
    }

    #[test]
    fn singular_covariance_is_reported() {
        let mut model = SignalModel::white(0.1, DVector::from_vec(vec![1.0, 1.0])).unwrap();
        model.input_power = 0.0;
        let cs = ConstraintSet::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), DVector::from_element(1, 2.0)).unwrap();
        assert!(matches!(optimal_constrained_wiener(&model, &cs), Err(Error::Singular(_))));
    }

    #[test]
    fn sparse_schedule_levels_and_boundaries() {
        let sched = sparse_system_schedule(30, 9001, 4).unwrap();
        assert_eq!(sched.boundaries(), vec![0, 3000, 6000]);
        let zeros: Vec<usize> = sched
            .segments()
            .iter()
            .map(|(_, w)| w.iter().filter(|&&x| x == 0.0).count())
            .collect();
        assert_eq!(zeros, vec![0, 15, 27]);
        for (_, w) in sched.segments() {
            assert!((w.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(sched.at(2999), &sched.segments()[0].1);
        assert_eq!(sched.at(3000), &sched.segments()[1].1);
        assert_eq!(sched.at(9000), &sched.segments()[2].1);
    }

    #[test]
    fn symmetric_system_is_linear_phase() {
        for len in [5, 10] {
            let w = symmetric_system(len, 9);
            assert!((w.norm() - 1.0).abs() < 1e-12);
            assert!(linear_phase_constraints(len).unwrap().residual(&w) < 1e-15);
        }
    }

    #[test]
    fn ar1_covariance_is_toeplitz() {
        let model = SignalModel::new(InputKind::Ar1 { rho: 0.5 }, 0.0, DVector::zeros(3)).unwrap();
        let r = model.covariance();
        assert_eq!(r[(0, 2)], 0.25);
        assert_eq!(r[(2, 1)], 0.5);
        assert!(SignalModel::new(InputKind::Ar1 { rho: 1.0 }, 0.0, DVector::zeros(3)).is_err());
        assert!(SignalModel::white(-1.0, DVector::zeros(3)).is_err());
    }
}
