use std::path::PathBuf;

/// Errors raised across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("open-circuit resonance: |c*Z_L + d| vanishes")]
    OpenCircuitResonance,

    #[error("L-match requires upward transformation (r_low = {r_low} >= r_high = {r_high})")]
    UpwardTransformation { r_low: f64, r_high: f64 },

    #[error("no passive capacitor realizes a larger effective inductance ({l_eff} H >= {l_ser} H)")]
    NoPassiveCapacitor { l_ser: f64, l_eff: f64 },

    #[error("inductor too small for this frequency ({f_hz} Hz needs {l_required} H, have {l_ser} H)")]
    InductorTooSmall {
        f_hz: f64,
        l_required: f64,
        l_ser: f64,
    },

    #[error("matching network required for architecture {0}")]
    MissingMatch(&'static str),

    #[error("matching network kind {found} does not fit architecture {arch}")]
    MatchKindMismatch { arch: &'static str, found: &'static str },

    #[error("periodic steady state not reached after {periods} periods (residual {residual:e})")]
    NonConvergence { periods: usize, residual: f64 },

    #[error("RF and LO frequencies are not commensurate: {0}")]
    NonCommensurate(String),

    #[error("singular harmonic system")]
    SingularHarmonicSystem,

    #[error("singular nodal matrix at step {0}")]
    SingularNodalMatrix(usize),

    #[error("no overlap to calibrate (duty {0} gives zero overlap)")]
    NoOverlap(f64),

    #[error("{0} evaluated to a non-finite value")]
    NonFinite(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the user's input rather than the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::MissingMatch(_)
                | Error::MatchKindMismatch { .. }
                | Error::Config(_)
                | Error::UpwardTransformation { .. }
                | Error::NoPassiveCapacitor { .. }
                | Error::NoOverlap(_)
                | Error::NonCommensurate(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
