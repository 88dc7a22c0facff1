use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("unsupported order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{function} is singular at z = 0")]
    Singularity { function: &'static str },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("energy {energy} eV outside tabulated range [{min}, {max}] eV")]
    OutOfRange { energy: f64, min: f64, max: f64 },

    #[error("singular denominator in {0}")]
    SingularDenominator(&'static str),

    #[error("no real resonance root for mode n = {n} in ({lo}, {hi}) eV")]
    NoResonance { n: usize, lo: f64, hi: f64 },

    #[error("fit failed after {iterations} iterations (best relative rms {rms:.3e})")]
    FitFailure {
        iterations: usize,
        rms: f64,
        best: Vec<f64>,
    },

    #[error("mode extraction failed for modes {modes:?}: {reason}")]
    ModeExtraction { modes: Vec<usize>, reason: String },

    #[error("mode {n} lacks {what}")]
    IncompleteModes { n: usize, what: &'static str },

    #[error("QR iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("near-defective eigenvector {index}: <L|R> = {overlap:.3e}")]
    NearDefective { index: usize, overlap: f64 },

    #[error("singular linear system at {0}")]
    SingularSystem(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("step size underflow at t = {t} fs (h = {h:.3e}); system is stiff, use the spectral path")]
    Stiffness { t: f64, h: f64 },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
