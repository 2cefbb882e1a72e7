use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter {index} = {value} outside [{lo}, {hi}] at u = {u}")]
    OutsideParameterSpace {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
        u: f64,
    },

    #[error("objective undefined: {0}")]
    Domain(String),

    #[error("degenerate estimation window at u = {u}: {reason}")]
    DegenerateWindow { u: f64, reason: String },

    #[error("bias term B0 = {b0:e} is degenerate; no finite optimal bandwidth")]
    DegenerateBias { b0: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver did not converge at u = {u} after {iterations} iterations (|grad|_inf = {grad_norm:e})")]
    NonConvergence {
        u: f64,
        iterations: usize,
        grad_norm: f64,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::DegenerateWindow { .. }
                | Error::DegenerateBias { .. }
                | Error::NonConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
