use std::fmt;

use ckd::CkdError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(CkdError),
    /// Output was written, but training hit the iteration limit.
    NotConverged { iterations: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::NotConverged { .. } => EXIT_NOT_CONVERGED,
            CliError::Core(e) => match e {
                CkdError::InvalidConfig(_) | CkdError::DegenerateConfig(_) => EXIT_USAGE,
                CkdError::Numeric(_) => EXIT_NUMERIC,
                CkdError::InvalidSize(_)
                | CkdError::UnlabeledSample { .. }
                | CkdError::Data(_)
                | CkdError::Io { .. }
                | CkdError::Format(_) => EXIT_DATA,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::NotConverged { iterations } => {
                write!(f, "did not converge within {iterations} iterations (model written)")
            }
        }
    }
}

impl From<CkdError> for CliError {
    fn from(e: CkdError) -> Self {
        CliError::Core(e)
    }
}
