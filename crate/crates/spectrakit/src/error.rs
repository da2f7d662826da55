use crate::basis::Support;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("point {point} outside support {support}")]
    OutsideSupport { point: f64, support: Support },

    #[error("degree {degree} beyond configured bound {bound}")]
    DegreeBound { degree: usize, bound: usize },

    #[error("kernel support {kernel} does not match basis support {basis}")]
    SupportMismatch { kernel: Support, basis: Support },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("{0}")]
    Unsupported(String),

    #[error("matrix not symmetric: max asymmetry {0:.3e}")]
    NotSymmetric(f64),

    #[error("numerically unstable: {0}")]
    Unstable(String),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
