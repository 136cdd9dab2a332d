//! Per-sample weight updates for the LMS/LMLS family, their linearly
//! constrained forms, and the ℓ1 / reweighted-ℓ1 budgeted variants.
//!
//! Every step is a pure function: it borrows the current [`FilterState`] and
//! returns the next one.

use std::f64::consts::FRAC_2_PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::constraint::ConstraintSet;
use crate::error::{check_len, Error, Result};

/// Below this value of `‖P s‖²` the sparsity direction is considered to lie in
/// the constraint subspace and the budget constraint cannot be enforced.
pub const DEGENERATE_DIRECTION: f64 = 1e-12;

/// The direction is also treated as degenerate when `‖P s‖² / ‖s‖²` (the
/// squared sine of its angle to the constraint span) falls below this value.
/// Near-parallel directions make the budget correction `e_L1 P s / ‖P s‖²`
/// arbitrarily large, which the continuous reweighted direction can hit.
pub const DEGENERATE_ANGLE: f64 = 1e-2;

/// Adaptive weights and the number of updates applied so far.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub weights: DVector<f64>,
    pub iteration: usize,
}

impl FilterState {
    pub fn new(weights: DVector<f64>) -> Self {
        Self {
            weights,
            iteration: 0,
        }
    }

    /// Starts from the feasible point `P w_init + f`.
    pub fn feasible(cs: &ConstraintSet, initial: &DVector<f64>) -> Result<Self> {
        check_len("initial weights", cs.filter_len(), initial.len())?;
        Ok(Self::new(cs.project(initial)))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn advance(&self, weights: DVector<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged {
                iteration: self.iteration,
            });
        }
        Ok(Self {
            weights,
            iteration: self.iteration + 1,
        })
    }
}

/// Hyper-parameters shared by the whole family. Each algorithm reads only the
/// fields it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmParams {
    /// Step size μ.
    pub mu: f64,
    /// Logarithmic-cost design parameter α.
    pub alpha: f64,
    /// Sparsity budget `t` (ℓ1 norm, or the arctan measure for reweighted variants).
    pub budget: f64,
    /// Slope β of the arctan reweighting.
    pub beta_slope: f64,
}

impl AlgorithmParams {
    pub fn new(mu: f64, alpha: f64) -> Self {
        Self {
            mu,
            alpha,
            budget: 0.0,
            beta_slope: 10.0,
        }
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_beta_slope(mut self, beta_slope: f64) -> Self {
        self.beta_slope = beta_slope;
        self
    }
}

/// Quantities produced by one budgeted update, exposed for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseStepAux {
    /// Sub-gradient (or reweighted) direction `s(n)`.
    pub direction: DVector<f64>,
    /// `P′(n) = (I − P s sᵀ / ‖P s‖²) P`.
    pub projector: DMatrix<f64>,
    /// Budget deviation `e_L1(n)`.
    pub budget_error: f64,
    /// Budget correction `f_L1(n) = e_L1(n) P s / ‖P s‖²`.
    pub budget_correction: DVector<f64>,
}

/// Logarithmic-cost error non-linearity `g(e) = αe³ / (1 + αe²)`.
///
/// Behaves like `αe³` for small errors and like `e` for large ones.
pub fn error_nonlinearity(e: f64, alpha: f64) -> f64 {
    let a = alpha * e * e;
    if a.is_finite() {
        e * a / (1.0 + a)
    } else {
        e
    }
}

/// Error shaping applied before the gradient step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorKernel {
    /// `g(e) = e` (mean-square cost).
    Linear,
    /// `g(e) = αe³ / (1 + αe²)`.
    Logarithmic { alpha: f64 },
}

impl ErrorKernel {
    pub fn apply(self, e: f64) -> f64 {
        match self {
            Self::Linear => e,
            Self::Logarithmic { alpha } => error_nonlinearity(e, alpha),
        }
    }
}

/// Shape of the sparsity-promoting budget constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sparsity {
    /// `‖w‖₁ = t` with `s = sign(w)`.
    L1,
    /// `(2/π) Σ arctan(β|w_j|) = t` with the matching reweighted direction.
    Reweighted { beta: f64 },
}

impl Sparsity {
    pub fn direction(self, w: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::L1 => sign_direction(w),
            Self::Reweighted { beta } => reweighted_direction(w, beta),
        }
    }

    /// Current value of the budgeted measure.
    pub fn measure(self, w: &DVector<f64>) -> f64 {
        match self {
            Self::L1 => w.lp_norm(1),
            Self::Reweighted { beta } => reweighted_measure(w, beta),
        }
    }
}

fn signum(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Element-wise sign with `sign(0) = 0`.
pub fn sign_direction(w: &DVector<f64>) -> DVector<f64> {
    w.map(signum)
}

/// `s_j = (2β/π) sign(w_j) / (β² w_j² + 1)`, the gradient of [`reweighted_measure`].
pub fn reweighted_direction(w: &DVector<f64>, beta: f64) -> DVector<f64> {
    w.map(|x| FRAC_2_PI * beta * signum(x) / (beta * beta * x * x + 1.0))
}

/// `(2/π) Σ arctan(β |w_j|)`.
pub fn reweighted_measure(w: &DVector<f64>, beta: f64) -> f64 {
    FRAC_2_PI * w.iter().map(|x| (beta * x.abs()).atan()).sum::<f64>()
}

fn estimation_error(state: &FilterState, u: &DVector<f64>, d: f64) -> Result<f64> {
    check_len("input vector", state.len(), u.len())?;
    let e = d - state.weights.dot(u);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::Diverged {
            iteration: state.iteration,
        })
    }
}

fn unconstrained(state: &FilterState, u: &DVector<f64>, d: f64, mu: f64, kernel: ErrorKernel) -> Result<FilterState> {
    let g = kernel.apply(estimation_error(state, u, d)?);
    state.advance(&state.weights + u * (mu * g))
}

fn constrained(
    state: &FilterState,
    u: &DVector<f64>,
    d: f64,
    mu: f64,
    kernel: ErrorKernel,
    cs: &ConstraintSet,
) -> Result<FilterState> {
    check_len("filter length vs constraints", cs.filter_len(), state.len())?;
    let g = kernel.apply(estimation_error(state, u, d)?);
    state.advance(cs.project(&(&state.weights + u * (mu * g))))
}

fn budgeted(
    state: &FilterState,
    u: &DVector<f64>,
    d: f64,
    params: &AlgorithmParams,
    kernel: ErrorKernel,
    sparsity: Sparsity,
    cs: &ConstraintSet,
) -> Result<(FilterState, SparseStepAux)> {
    check_len("filter length vs constraints", cs.filter_len(), state.len())?;
    let e = estimation_error(state, u, d)?;
    let w = &state.weights;
    let p = cs.projector();

    let s = sparsity.direction(w);
    let ps = p * &s;
    let norm_sq = ps.norm_squared();
    if !(norm_sq >= DEGENERATE_DIRECTION) || norm_sq < DEGENERATE_ANGLE * s.norm_squared() {
        return Err(Error::DegenerateDirection { norm_sq });
    }
    let q = &ps / norm_sq;

    // P symmetric: (q sᵀ) P = q (P s)ᵀ.
    let p_prime = p - &q * ps.transpose();
    let budget_error = params.budget - sparsity.measure(w);
    let budget_correction = &q * budget_error;

    let g = kernel.apply(e);
    let step = &p_prime * u * (params.mu * g);
    let next = p * (w + step) + cs.offset() + &budget_correction;

    let next = state.advance(next)?;
    Ok((
        next,
        SparseStepAux {
            direction: s,
            projector: p_prime,
            budget_error,
            budget_correction,
        },
    ))
}

pub fn lms_step(state: &FilterState, u: &DVector<f64>, d: f64, params: &AlgorithmParams) -> Result<FilterState> {
    unconstrained(state, u, d, params.mu, ErrorKernel::Linear)
}

pub fn lmls_step(state: &FilterState, u: &DVector<f64>, d: f64, params: &AlgorithmParams) -> Result<FilterState> {
    unconstrained(state, u, d, params.mu, ErrorKernel::Logarithmic { alpha: params.alpha })
}

/// `w(n+1) = P (w(n) + μ e(n) u(n)) + f`.
pub fn clms_step(
    state: &FilterState,
    u: &DVector<f64>,
    d: f64,
    params: &AlgorithmParams,
    cs: &ConstraintSet,
) -> Result<FilterState> {
    constrained(state, u, d, params.mu, ErrorKernel::Linear, cs)
}

/// `w(n+1) = P (w(n) + μ g(e(n)) u(n)) + f` with the logarithmic kernel.
pub fn clmls_step(
    state: &FilterState,
    u: &DVector<f64>,
    d: f64,
    params: &AlgorithmParams,
    cs: &ConstraintSet,
) -> Result<FilterState> {
    constrained(state, u, d, params.mu, ErrorKernel::Logarithmic { alpha: params.alpha }, cs)
}

pub fn l1_clms_step(
    state: &FilterState,
    u: &DVector<f64>,
    d: f64,
    params: &AlgorithmParams,
    cs: &ConstraintSet,
) -> Result<(FilterState, SparseStepAux)> {
    budgeted(state, u, d, params, ErrorKernel::Linear, Sparsity::L1, cs)
}

pub fn l1_wclms_step(
    state: &FilterState,
    u: &DVector<f64>,
    d: f64,
    params: &AlgorithmParams,
    cs: &ConstraintSet,
) -> Result<(FilterState, SparseStepAux)> {
    let sparsity = Sparsity::Reweighted { beta: params.beta_slope };
    budgeted(state, u, d, params, ErrorKernel::Linear, sparsity, cs)
}

/// ℓ1-budgeted CLMLS update.
///
/// Enforces `Cᵀw(n+1) = z` and `sᵀ(n) w(n+1) = t` with `s(n) = sign(w(n))`.
/// Fails with [`Error::DegenerateDirection`] when `P s` (nearly) vanishes; see
/// [`DEGENERATE_DIRECTION`] and [`DEGENERATE_ANGLE`].
pub fn l1_clmls_step(
    state: &FilterState,
    u: &DVector<f64>,
    d: f64,
    params: &AlgorithmParams,
    cs: &ConstraintSet,
) -> Result<(FilterState, SparseStepAux)> {
    let kernel = ErrorKernel::Logarithmic { alpha: params.alpha };
    budgeted(state, u, d, params, kernel, Sparsity::L1, cs)
}

/// Reweighted-ℓ1 budgeted CLMLS update.
///
/// The arctan measure is linearised around `w(n)`, so the enforced constraint
/// is `sᵀ(n) w(n+1) = sᵀ(n) w(n) + t − t(n)`.
pub fn l1_wclmls_step(
    state: &FilterState,
    u: &DVector<f64>,
    d: f64,
    params: &AlgorithmParams,
    cs: &ConstraintSet,
) -> Result<(FilterState, SparseStepAux)> {
    let kernel = ErrorKernel::Logarithmic { alpha: params.alpha };
    let sparsity = Sparsity::Reweighted { beta: params.beta_slope };
    budgeted(state, u, d, params, kernel, sparsity, cs)
}

/// Every update rule in the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Lms,
    Lmls,
    Clms,
    Clmls,
    L1Clms,
    L1Wclms,
    L1Clmls,
    L1Wclmls,
}

/// Result of [`Algorithm::step`].
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: FilterState,
    pub aux: Option<SparseStepAux>,
    /// The budgeted update was degenerate and a plain constrained step was used.
    pub fell_back: bool,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Self::Lms,
        Self::Lmls,
        Self::Clms,
        Self::Clmls,
        Self::L1Clms,
        Self::L1Wclms,
        Self::L1Clmls,
        Self::L1Wclmls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lms => "lms",
            Self::Lmls => "lmls",
            Self::Clms => "clms",
            Self::Clmls => "clmls",
            Self::L1Clms => "l1-clms",
            Self::L1Wclms => "l1-wclms",
            Self::L1Clmls => "l1-clmls",
            Self::L1Wclmls => "l1-wclmls",
        }
    }

    pub fn is_constrained(self) -> bool {
        !matches!(self, Self::Lms | Self::Lmls)
    }

    pub fn kernel(self, params: &AlgorithmParams) -> ErrorKernel {
        match self {
            Self::Lms | Self::Clms | Self::L1Clms | Self::L1Wclms => ErrorKernel::Linear,
            _ => ErrorKernel::Logarithmic { alpha: params.alpha },
        }
    }

    pub fn sparsity(self, params: &AlgorithmParams) -> Option<Sparsity> {
        match self {
            Self::L1Clms | Self::L1Clmls => Some(Sparsity::L1),
            Self::L1Wclms | Self::L1Wclmls => Some(Sparsity::Reweighted {
                beta: params.beta_slope,
            }),
            _ => None,
        }
    }

    /// Advances `state` by one sample.
    ///
    /// Constrained algorithms require `cs`. Budgeted algorithms fall back to the
    /// plain constrained update for this sample when the sparsity direction is
    /// degenerate.
    pub fn step(
        self,
        state: &FilterState,
        u: &DVector<f64>,
        d: f64,
        params: &AlgorithmParams,
        cs: Option<&ConstraintSet>,
    ) -> Result<StepOutput> {
        let kernel = self.kernel(params);
        if !self.is_constrained() {
            return Ok(StepOutput {
                state: unconstrained(state, u, d, params.mu, kernel)?,
                aux: None,
                fell_back: false,
            });
        }
        let cs = cs.ok_or_else(|| {
            Error::InvalidArgument(format!("{} needs a constraint set", self.name()))
        })?;
        match self.sparsity(params) {
            None => Ok(StepOutput {
                state: constrained(state, u, d, params.mu, kernel, cs)?,
                aux: None,
                fell_back: false,
            }),
            Some(sparsity) => match budgeted(state, u, d, params, kernel, sparsity, cs) {
                Ok((state, aux)) => Ok(StepOutput {
                    state,
                    aux: Some(aux),
                    fell_back: false,
                }),
                Err(Error::DegenerateDirection { .. }) => Ok(StepOutput {
                    state: constrained(state, u, d, params.mu, kernel, cs)?,
                    aux: None,
                    fell_back: true,
                }),
                Err(e) => Err(e),
            },
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| {
                let valid: Vec<_> = Self::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown algorithm '{s}', expected one of: {}",
                    valid.join(", ")
                ))
            })
    }
}
