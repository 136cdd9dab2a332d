use thiserror::Error;

/// Errors raised across the filtering, theory and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("constraint matrix is rank deficient: {deficient} of {columns} columns are dependent")]
    RankDeficient { columns: usize, deficient: usize },

    #[error("sparsity direction is swallowed by the constraint subspace (|P s|^2 = {norm_sq:e})")]
    DegenerateDirection { norm_sq: f64 },

    #[error("filter diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("steady-state model is outside its valid regime (discriminant {discriminant:e} < 0)")]
    InvalidRegime { discriminant: f64 },

    #[error("all {trials} trials diverged")]
    AllTrialsDiverged { trials: usize },

    #[error("target plateau {target_db:.3} dB is not bracketed: step size {low:e} gives {low_db:.3} dB, {high:e} gives {high_db:.3} dB")]
    Unreachable {
        target_db: f64,
        low: f64,
        low_db: f64,
        high: f64,
        high_db: f64,
    },

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}", config_message(.line, .message))]
    Config { line: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn config_message(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(line) => format!("config line {line}: {message}"),
        None => format!("config: {message}"),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            found,
        })
    }
}
