use thiserror::Error;

/// A certified check did not come out as expected.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Bad flags, bad config file or unwritable output location.
pub const EXIT_CONFIG: i32 = 2;
/// The computation itself failed (budget, divergence, quadrature, ...).
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),

    #[error("computation failed: {0}")]
    Compute(weighted_lp::Error),
}

impl From<weighted_lp::Error> for CliError {
    fn from(e: weighted_lp::Error) -> Self {
        match e {
            weighted_lp::Error::Io(io) => CliError::Output(io),
            weighted_lp::Error::InvalidArgument(msg) => CliError::Config(msg),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => EXIT_CONFIG,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }
}
