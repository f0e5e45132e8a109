// Copyright 2026 The stmqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulator and frequency-budget planner for a nuclear-spin quantum
//! computer built from a chain of paramagnetic ions in a graded magnetic
//! field, addressed by frequency-selective pulses and read out through
//! the electron Larmor frequency seen in a tunnelling current.
//!
//! * [`frequency`] and [`hamiltonian`]: site frequencies, dipole shifts and
//!   the spin Hamiltonians.
//! * [`pulse`] and [`evolution`]: rotating-frame pulse dynamics.
//! * [`readout`]: heterodyne current traces and Larmor-frequency detection.
//! * [`protocols`]: chain initialization, one-qubit rotations, Control-Not.
//! * [`planner`]: selectivity and collision checks on frequency tables.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod config;
pub mod constants;
pub mod error;
pub mod evolution;
pub mod frequency;
pub mod hamiltonian;
pub mod planner;
pub mod protocols;
pub mod pulse;
pub mod readout;
pub mod species;
pub mod state;

pub use config::{ChainConfig, KvDocument};
pub use error::{Error, Result};
pub use species::IonSpecies;
pub use state::ChainState;
