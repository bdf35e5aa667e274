use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evanescent wavenumber: kx^2 + ky^2 = {transverse_sq:e} exceeds k^2 = {k_sq:e}")]
    Evanescent { transverse_sq: f64, k_sq: f64 },

    #[error("angular spread {0} deg is outside the validity range (0, 21)")]
    OutOfValidity(f64),

    #[error("scattering profile has no power on the propagating hemisphere")]
    DegenerateProfile,

    #[error("noiseless received signal has zero energy; SNR is undefined")]
    DegenerateSignal,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
