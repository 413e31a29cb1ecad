use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),

    #[error("matrix is not symplectic: residual {residual:.3e} exceeds {tol:.3e}")]
    NotSymplectic { residual: f64, tol: f64 },

    #[error("path discontinuity at sample {index}: gap {gap:.3e} exceeds {gap_max:.3e}")]
    Discontinuity { index: usize, gap: f64, gap_max: f64 },

    #[error("resolution too coarse: {0}; refine the time grid")]
    Resolution(String),

    #[error("unresolvably degenerate crossing near t = {time:.6}")]
    DegenerateCrossing { time: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate frame or form: {0}")]
    Degeneracy(String),

    #[error("integrator step size underflow at t = {time:.6e} (step {step:.3e}): {detail}")]
    Stiffness { time: f64, step: f64, detail: String },

    #[error("no section crossing before t_max = {t_max}")]
    Timeout { t_max: f64 },

    #[error("tangential section crossing at t = {time:.6} (transversality {rate:.3e})")]
    Tangency { time: f64, rate: f64 },

    #[error("estimate too imprecise: {0}")]
    Precision(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
