//! Thermal feedback between quantum-error-correction heating and refrigeration.
//!
//! Erasing ancillas during QEC deposits Landauer heat next to the qubits, which
//! raises the error rate, which demands more QEC. This crate integrates that
//! loop on a 1D lattice, classifies operating points as bounded- or
//! unbounded-error, and locates the critical cooling rate between them.

// `!(x > 0.0)` is used on purpose so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod config;
pub mod constants;
pub mod critical;
pub mod error;
pub mod lattice;
pub mod phase;
pub mod sim;
pub mod sweep;
pub mod thermo;
pub mod units;

pub use coefficients::{check_cfl, CflReport, CflVerdict, Coefficients, PhysicalParams};
pub use error::{Error, Result};
pub use lattice::{Dynamics, LatticeState, RunBudget, Sample, TrajectoryRecord};
pub use thermo::{ErrorModel, QecPolicy};

