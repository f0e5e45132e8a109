// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the simulator, planner and file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site index {index} out of range for a chain of {n_ions} ions")]
    SiteIndex { index: usize, n_ions: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "capacity exceeded: {n_ions} ions needs a 4^{n_ions} state space, limit is {max} ions"
    )]
    Capacity { n_ions: usize, max: usize },

    #[error("shape mismatch: expected dimension {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("{file}:{line}: field `{field}`: {message}")]
    Parse {
        file: String,
        line: usize,
        field: String,
        message: String,
    },

    #[error("missing required field `{field}` in {file}")]
    MissingField { file: String, field: String },

    #[error(
        "sample rate {sample_rate} Hz violates Nyquist for a {beat} Hz beat; need more than {min_rate} Hz"
    )]
    Nyquist {
        sample_rate: f64,
        beat: f64,
        min_rate: f64,
    },

    #[error("measurement failed at site {site}: {reason}")]
    MeasurementFailure { site: usize, reason: String },

    #[error("protocol precondition violated: {0}")]
    Precondition(String),

    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
