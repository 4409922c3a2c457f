// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;

use qhe_core::Error;

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: 2,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::Verification(_) => Self::verification(err.to_string()),
            _ => Self::usage(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Write to `path`, or to standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Twelve significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-5..12).contains(&magnitude) {
        let decimals = (11 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}
