use std::path::Path;

use segmental_core::Error;

pub const GENERIC: u8 = 1;
pub const PARSE: u8 = 2;
pub const INSUFFICIENT: u8 = 3;
pub const BOUNDARY: u8 = 4;
pub const GRID_PRIOR: u8 = 5;
pub const CONFIG: u8 = 6;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn read(path: &Path, e: std::io::Error) -> Self {
        CliError::new(PARSE, format!("{}: {e}", path.display()))
    }

    pub fn write(path: &Path, e: std::io::Error) -> Self {
        CliError::new(GENERIC, format!("{}: {e}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse { .. } | Error::EmptyDataset | Error::InvalidDataset(_) => PARSE,
            Error::InsufficientData(_) | Error::Degenerate(_) => INSUFFICIENT,
            Error::BoundaryMismatch { .. } => BOUNDARY,
            Error::GridMismatch(_) | Error::OutOfRange { .. } | Error::InfiniteOdds | Error::Underflow(_) => GRID_PRIOR,
            Error::Config { .. } => CONFIG,
            Error::Domain(_) | Error::Instability { .. } | Error::Identification(_) | Error::InvalidInput(_) => GENERIC,
        };
        CliError::new(code, e.to_string())
    }
}
