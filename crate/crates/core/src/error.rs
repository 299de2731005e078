use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too coarse: step {step:.3e} s exceeds fwhm/4 = {limit:.3e} s")]
    GridTooCoarse { step: f64, limit: f64 },

    #[error("division by zero at sample {index} (tau = {tau:.3e} s)")]
    DivisionByZero { index: usize, tau: f64 },

    #[error("degenerate normalization: interference pedestal equals 1 (R undefined)")]
    DegenerateNormalization,

    #[error("steady state did not converge: {0}")]
    SteadyState(String),

    #[error("fit setup error: {0}")]
    FitSetup(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
