//! Linearly constrained adaptive filters with a logarithmic error cost,
//! their sparsity-aware variants, and mean-square performance analysis.

pub mod constraint;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod linalg;
pub mod sim;
pub mod theory;

pub use constraint::{
    beamforming_constraints, build_constraint_set, linear_phase_constraints, ConstraintSet, UniformLinearArray,
};
pub use error::{Error, Result};
pub use kernels::{Algorithm, AlgorithmParams, ErrorKernel, FilterState, Sparsity, StepOutput};
