// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {dimension} exceeds the configured cap of {cap} ({what})")]
    DimensionCap {
        what: &'static str,
        dimension: u128,
        cap: u128,
    },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:e} (tolerance {tolerance:e})")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("multinomial coefficient overflows u64 for {0:?}; use the big-integer routine")]
    MultinomialOverflow(Vec<usize>),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
