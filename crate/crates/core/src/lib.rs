// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

pub mod cli;
pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod golden;
pub mod io;
pub mod photon;
pub mod resonator;
pub mod s21;
pub mod spectral;
pub mod transmon;
pub mod units;

pub use error::{Error, Result};
