//! Weighted-variance recursion and steady-state predictions for CLMLS.
//!
//! With `w̃(n) = w_o − w(n)` confined to `range(P)`, `M = PRP` and the
//! column-stacking `vec`, one step of the weighted-norm relation reads
//!
//! ```text
//! E‖w̃(n+1)‖²_σ = E‖w̃(n)‖²_{Fσ} + μ² h_U γᵀσ
//! F = I − 2μ h_G (Mᵀ ⊗ I),   γ = (P ⊗ P) vec(R) = vec(M)
//! ```

use nalgebra::{DMatrix, DVector};

use super::moments::GaussianErrorModel;
use crate::constraint::ConstraintSet;
use crate::error::{check_len, Error, Result};
use crate::kernels::AlgorithmParams;
use crate::linalg::{kron, symmetrize, vec};
use crate::sim::scenario::{optimal_constrained_wiener, SignalModel};

/// Relative singular-value cutoff used for pseudo-inverses.
const PINV_RTOL: f64 = 1e-10;

/// `F` and the noise drive `μ² h_U γ` of the weighted-variance relation.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTransition {
    pub f: DMatrix<f64>,
    pub drive: DVector<f64>,
}

/// Builds the `L² × L²` transition and its drive vector.
pub fn variance_transition(
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
    mu: f64,
    h_g: f64,
    h_u: f64,
) -> Result<VarianceTransition> {
    let len = r.nrows();
    check_len("covariance columns", len, r.ncols())?;
    check_len("projector rows", len, p.nrows())?;
    check_len("projector columns", len, p.ncols())?;
    let m = p * r * p;
    let identity = DMatrix::identity(len, len);
    let f = DMatrix::identity(len * len, len * len) - kron(&m.transpose(), &identity) * (2.0 * mu * h_g);
    let gamma = kron(p, p) * vec(r);
    Ok(VarianceTransition { f, drive: gamma * (mu * mu * h_u) })
}

/// Theoretical learning curves.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryTrace {
    /// `E‖w̃(n)‖²` for `n = 0..=N`.
    pub msd: Vec<f64>,
    /// `E[w̃ᵀ(n) R w̃(n)]` for `n = 0..=N`.
    pub emse: Vec<f64>,
    /// `Φ(N) = E[w̃(N) w̃ᵀ(N)]`.
    pub weight_correlation: DMatrix<f64>,
    /// Squared norm of the optimum, for normalised MSD.
    pub reference_norm_sq: f64,
}

impl TheoryTrace {
    pub fn normalized_msd(&self) -> Vec<f64> {
        self.msd.iter().map(|x| x / self.reference_norm_sq).collect()
    }
}

/// Iterates the second-moment recursion of CLMLS from `w(0) = P w0 + f`.
///
/// `h_G` and `h_U` are re-evaluated at every step at
/// `σ_e²(n) = tr(RΦ(n)) + σ_v²`. The matrix-space form
/// `Φ ← Φ − μh_G(MΦ + ΦM) + μ²h_U M` is the symmetrised image of
/// `Φ ↦ unvec(Fᵀ vec Φ) + unvec(drive)`.
pub fn transient_predictor(
    model: &SignalModel,
    cs: &ConstraintSet,
    params: &AlgorithmParams,
    w0: &DVector<f64>,
    iterations: usize,
) -> Result<TheoryTrace> {
    let len = model.filter_len();
    check_len("constraint set", len, cs.filter_len())?;
    check_len("initial weights", len, w0.len())?;
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    let r = model.covariance();
    let p = cs.projector();
    let m = p * &r * p;
    let optimum = optimal_constrained_wiener(model, cs)?;
    let deviation = &optimum - cs.project(w0);
    let mut phi = &deviation * deviation.transpose();

    let mut msd = Vec::with_capacity(iterations + 1);
    let mut emse = Vec::with_capacity(iterations + 1);
    for n in 0..=iterations {
        let trace = phi.trace();
        let excess = (&r * &phi).trace();
        if !trace.is_finite() || !excess.is_finite() {
            return Err(Error::Diverged { iteration: n });
        }
        msd.push(trace);
        emse.push(excess);
        if n == iterations {
            break;
        }
        let moments = GaussianErrorModel::new(excess.max(0.0) + model.noise_variance, params.alpha)?;
        let (hg, hu) = (moments.h_g(), moments.h_u());
        let mphi = &m * &phi;
        phi = &phi - (&mphi + mphi.transpose()) * (params.mu * hg) + &m * (params.mu * params.mu * hu);
        phi = symmetrize(&phi);
    }
    Ok(TheoryTrace {
        msd,
        emse,
        weight_correlation: phi,
        reference_norm_sq: optimum.norm_squared(),
    })
}

/// Closed-form steady state under the small-error approximation
/// `h_G = 3ασ²`, `h_U = 15α²σ⁶`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStatePrediction {
    /// `ζ(∞)`.
    pub emse: f64,
    /// `ξ(∞) = E‖w̃(∞)‖²`.
    pub msd: f64,
    /// `β = γᵀ S⁺ vec(R)` with `S = Mᵀ ⊗ I`.
    pub beta_factor: f64,
    pub hg_ss: f64,
    pub hu_ss: f64,
    /// `1 − 10αμβσ_v²`.
    pub discriminant: f64,
    pub reference_norm_sq: f64,
}

impl SteadyStatePrediction {
    pub fn normalized_msd(&self) -> f64 {
        self.msd / self.reference_norm_sq
    }
}

fn pseudo_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = m.clone().svd(true, true);
    let cutoff = PINV_RTOL * svd.singular_values.max();
    svd.pseudo_inverse(cutoff).map_err(|_| Error::Singular("pseudo-inverse"))
}

/// `vᵀ S⁺ vec(X)` for `S = Mᵀ ⊗ I`, using `S⁺ vec(X) = vec(X M⁺)`.
fn weighted_pinv_form(v: &DMatrix<f64>, x: &DMatrix<f64>, m_pinv: &DMatrix<f64>) -> f64 {
    v.dot(&(x * m_pinv))
}

/// Steady-state EMSE and MSD of CLMLS (minus root of the quadratic).
///
/// Returns [`Error::InvalidRegime`] when the discriminant is negative.
pub fn steady_state_emse(model: &SignalModel, cs: &ConstraintSet, params: &AlgorithmParams) -> Result<SteadyStatePrediction> {
    check_len("constraint set", model.filter_len(), cs.filter_len())?;
    let r = model.covariance();
    let p = cs.projector();
    let m = p * &r * p;
    let m_pinv = pseudo_inverse(&m)?;
    let beta = weighted_pinv_form(&m, &r, &m_pinv);
    let identity = DMatrix::identity(r.nrows(), r.ncols());
    let msd_factor = weighted_pinv_form(&m, &identity, &m_pinv);

    let (alpha, mu, noise) = (params.alpha, params.mu, model.noise_variance);
    let k = alpha * mu * beta;
    let discriminant = 1.0 - 10.0 * k * noise;
    if discriminant < 0.0 {
        return Err(Error::InvalidRegime { discriminant });
    }
    // (A − √D)/(5k) rewritten to avoid cancellation.
    let a = 1.0 - 5.0 * k * noise;
    let emse = 5.0 * k * noise * noise / (a + discriminant.sqrt());
    let sigma2 = emse + noise;
    let msd = 0.5 * mu * 5.0 * alpha * sigma2 * sigma2 * msd_factor;
    let optimum = optimal_constrained_wiener(model, cs)?;
    Ok(SteadyStatePrediction {
        emse,
        msd,
        beta_factor: beta,
        hg_ss: 3.0 * alpha * sigma2,
        hu_ss: 15.0 * alpha * alpha * sigma2 * sigma2 * sigma2,
        discriminant,
        reference_norm_sq: optimum.norm_squared(),
    })
}

/// Fixed point of the transient recursion with exact `h_G`, `h_U`:
/// `2h_G ζ = μ h_U β` solved for `ζ` by bisection.
pub fn steady_state_fixed_point(model: &SignalModel, cs: &ConstraintSet, params: &AlgorithmParams) -> Result<f64> {
    let r = model.covariance();
    let p = cs.projector();
    let m = p * &r * p;
    let beta = weighted_pinv_form(&m, &r, &pseudo_inverse(&m)?);
    let noise = model.noise_variance;
    if noise == 0.0 {
        return Ok(0.0);
    }
    let residual = |zeta: f64| -> Result<f64> {
        let g = GaussianErrorModel::new(zeta + noise, params.alpha)?;
        Ok(2.0 * g.h_g() * zeta - params.mu * g.h_u() * beta)
    };
    let (mut lo, mut hi) = (0.0, noise);
    let mut tries = 0;
    while residual(hi)? < 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::InvalidRegime { discriminant: f64::NAN });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
