//! Adiabatic brachistochrone schedules for open quantum systems.
//!
//! The crate builds Lindblad superoperators in an orthogonal operator basis,
//! follows their spectra along a drive schedule, solves the Euler-Lagrange
//! problem for the time-optimal adiabatic schedule and checks the result by
//! propagating the master equation.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod basis;
pub mod dynamics;
pub mod el_solver;
pub mod error;
pub mod lagrangian;
pub mod linalg;
pub mod liouvillian;
pub mod model_file;
pub mod models;
pub mod ode;
pub mod schedule;
pub mod spectral;

pub use error::{Error, Result};
