//! Tapped-delay-line input generation.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::scenario::{InputKind, SignalModel};

/// Regressor generator: a scalar Gaussian stream (white or AR(1)) shifted
/// through a length-`L` delay line.
#[derive(Debug, Clone)]
pub struct DelayLine {
    kind: InputKind,
    scale: f64,
    last: f64,
    taps: DVector<f64>,
}

impl DelayLine {
    /// Builds the line and fills it with stationary samples so that the first
    /// regressor already has covariance `R`.
    pub fn new<R: Rng + ?Sized>(kind: InputKind, power: f64, len: usize, rng: &mut R) -> Self {
        let mut line = Self {
            kind,
            scale: power.sqrt(),
            last: 0.0,
            taps: DVector::zeros(len),
        };
        line.last = line.scale * rng.sample::<f64, _>(StandardNormal);
        line.taps[len - 1] = line.last;
        for _ in 1..len {
            line.push(rng);
        }
        line
    }

    fn push<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let xi: f64 = rng.sample(StandardNormal);
        let x = match self.kind {
            InputKind::White => self.scale * xi,
            InputKind::Ar1 { rho } => rho * self.last + self.scale * (1.0 - rho * rho).sqrt() * xi,
        };
        self.last = x;
        let n = self.taps.len();
        self.taps.as_mut_slice().copy_within(0..n - 1, 1);
        self.taps[0] = x;
    }

    /// Current regressor `u(n) = [x(n), x(n−1), …, x(n−L+1)]`.
    pub fn current(&self) -> &DVector<f64> {
        &self.taps
    }

    /// Shifts in one new sample and returns the new regressor.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &DVector<f64> {
        self.push(rng);
        &self.taps
    }
}

/// Draws the desired sample `wᵀu + v` for regressor `u`.
pub fn desired<R: Rng + ?Sized>(system: &DVector<f64>, u: &DVector<f64>, noise_std: f64, rng: &mut R) -> f64 {
    let v: f64 = rng.sample(StandardNormal);
    system.dot(u) + noise_std * v
}

/// Generates `len` regressor/desired pairs for a stationary model.
pub fn generate_signals<R: Rng + ?Sized>(model: &SignalModel, len: usize, rng: &mut R) -> (Vec<DVector<f64>>, Vec<f64>) {
    let mut line = DelayLine::new(model.input, model.input_power, model.filter_len(), rng);
    let noise_std = model.noise_variance.sqrt();
    let mut inputs = Vec::with_capacity(len);
    let mut desired_out = Vec::with_capacity(len);
    for n in 0..len {
        let u = if n == 0 { line.current().clone() } else { line.advance(rng).clone() };
        desired_out.push(desired(&model.system, &u, noise_std, rng));
        inputs.push(u);
    }
    (inputs, desired_out)
}
