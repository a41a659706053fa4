// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the formula being evaluated.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// The evaluation point sits on a pole of the model.
    #[error("singularity in {op}: {reason}")]
    Singularity { op: &'static str, reason: String },

    /// A configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The integrator lost accuracy (trace drift, non-finite state).
    #[error("integration accuracy lost at t = {time_ns} ns: {reason}")]
    Accuracy { time_ns: f64, reason: String },

    /// The charge basis is too small for the requested number of levels.
    #[error("charge basis with n_cut = {n_cut} cannot resolve {levels} levels")]
    BasisTooSmall { n_cut: usize, levels: usize },

    /// A least-squares fit did not converge. Best-so-far parameters are kept.
    #[error("fit did not converge after {iterations} iterations (rms residual {residual:.3e})")]
    FitFailed {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown parameter(s): {}", .0.join(", "))]
    UnknownParameter(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn singular(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Singularity {
            op,
            reason: reason.into(),
        }
    }
}
