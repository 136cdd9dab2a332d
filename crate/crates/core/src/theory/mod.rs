//! Mean-square analysis of the constrained logarithmic filter.

pub mod moments;
pub mod recursion;

pub use moments::{h_g, h_u, integrate_adaptive, small_error_moments, GaussianErrorModel};
pub use recursion::{
    steady_state_emse, steady_state_fixed_point, transient_predictor, variance_transition, SteadyStatePrediction,
    TheoryTrace, VarianceTransition,
};
