use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("singular matrix in {what}{}", freq_suffix(*.freq_hz))]
    SingularMatrix { what: String, freq_hz: Option<f64> },

    #[error("inverse residual {residual:e} exceeds {tolerance:e} in {what}{}", freq_suffix(*.freq_hz))]
    InaccurateInverse {
        what: String,
        freq_hz: Option<f64>,
        residual: f64,
        tolerance: f64,
    },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below {threshold:e}")]
    NotPositiveSemidefinite { eigenvalue: f64, threshold: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {eigenvalue:e} at or below {threshold:e}")]
    NearSingular { eigenvalue: f64, threshold: f64 },

    #[error("Cholesky factorization failed at pivot {pivot} (value {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("quadrature did not converge for entry ({i}, {j}) at {freq_hz} Hz: error estimate {error_estimate:e}")]
    Quadrature {
        i: usize,
        j: usize,
        freq_hz: f64,
        error_estimate: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

fn freq_suffix(freq_hz: Option<f64>) -> String {
    match freq_hz {
        Some(f) => format!(" at {f} Hz"),
        None => String::new(),
    }
}
