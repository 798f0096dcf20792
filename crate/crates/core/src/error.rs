use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("Forney denominator vanished at position {position}")]
    ForneyDivideByZero { position: usize },

    #[error("reconstruction failed: decoder reported an uncorrectable word ({cycles} cycles)")]
    ReconstructFailed { cycles: u64 },

    #[error("fault position {position} out of range for a {len}-bit response")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("invalid campaign: {0}")]
    SpecInvalid(String),

    #[error("unknown timing profile `{0}`")]
    UnknownProfile(String),

    #[error("unknown codec `{0}`")]
    UnknownCodec(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroInverse => "zero_inverse",
            Error::InvalidConfig(_) => "invalid_config",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::ForneyDivideByZero { .. } => "forney_divide_by_zero",
            Error::ReconstructFailed { .. } => "reconstruct_failed",
            Error::PositionOutOfRange { .. } => "position_out_of_range",
            Error::SpecInvalid(_) => "spec_invalid",
            Error::UnknownProfile(_) => "unknown_profile",
            Error::UnknownCodec(_) => "unknown_codec",
            Error::Parse(_) => "parse",
        }
    }
}
