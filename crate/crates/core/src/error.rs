use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invariant violated for {what}: {detail}")]
    InvariantViolation { what: &'static str, detail: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("propagator accuracy lost: unitarity drift {drift:.3e} exceeds {tolerance:.1e}")]
    Accuracy { drift: f64, tolerance: f64 },

    #[error(
        "harmonic truncation too coarse: reconstruction error {error:.3e} > {tolerance:.1e} at Q = {q_max}; try Q >= {suggested_q}"
    )]
    Truncation {
        error: f64,
        tolerance: f64,
        q_max: usize,
        suggested_q: usize,
    },

    #[error("unsupported channel for bath `{bath}`: zero quasi-Bohr frequency at harmonic q = {q}")]
    UnsupportedChannel { bath: String, q: i64 },

    #[error("stationary state is not unique: null space has dimension {dimension}")]
    NonUniqueSteadyState { dimension: usize },

    #[error("state is not stationary: residual {residual:.3e} > {tolerance:.1e}")]
    NotStationary { residual: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("quadrature did not converge: error estimate {estimate:.3e} > {tolerance:.1e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("second law violated: entropy production {sigma:.3e} < -{tolerance:.1e}")]
    SecondLaw { sigma: f64, tolerance: f64 },
}

impl Error {
    pub(crate) fn invariant(what: &'static str, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }
}
