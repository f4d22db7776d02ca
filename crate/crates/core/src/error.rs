use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "grid step {dt:.3e} s exceeds the Nyquist limit {limit:.3e} s of the highest comb tooth"
    )]
    Nyquist { dt: f64, limit: f64 },

    #[error(
        "step {step}: {term} rotation of {angle:.3e} rad exceeds the {limit} rad per-step limit"
    )]
    StepTooLarge {
        step: usize,
        term: &'static str,
        angle: f64,
        limit: f64,
    },

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("sample {index} of {channel} ({value:.6}) exceeds full scale {full_scale}")]
    ExceedsFullScale {
        channel: &'static str,
        index: usize,
        value: f64,
        full_scale: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(
        "fit did not converge after {starts} starts (best weighted residual {best_residual:.3e})"
    )]
    NoConvergence { starts: usize, best_residual: f64 },

    #[error("no χ(τ) = 1 crossing in [{lo:.3e}, {hi:.3e}] s (noise too weak)")]
    OutOfRange { lo: f64, hi: f64 },

    #[error("at alpha = {alpha}: {source}")]
    AtAlpha {
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Stable, machine-readable category used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Nyquist { .. } => "nyquist",
            Error::StepTooLarge { .. } => "step-size",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::ExceedsFullScale { .. } => "full-scale",
            Error::Degenerate(_) => "degenerate",
            Error::NoConvergence { .. } => "no-convergence",
            Error::OutOfRange { .. } => "out-of-range",
            Error::AtAlpha { source, .. } => source.category(),
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
