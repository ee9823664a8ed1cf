//! Time-optimal driving of a two-level system under Landau-Zener-type
//! Hamiltonians H = Gamma(t) sigma3 + omega(t) sigma1.
//!
//! The crate computes minimal driving times in closed form, constructs the
//! protocols that realize them (composite delta-pulse, bang-off-bang and
//! bang-bang), propagates them exactly, and cross-checks every closed form
//! against an independent brute-force search.
//!
//! Modules:
//! - [`su2`]: exact 2x2 special-unitary algebra and Euler-angle factorization
//! - [`states`]: qubit states, drive parameters, eigenstates, fidelity
//! - [`analytic`]: closed-form minimal times, pulse areas, regimes, speed limits
//! - [`protocol`]: protocol data model and builders, switching-time ramps
//! - [`dynamics`]: exact piecewise propagation, adaptive integration, the
//!   Euler-angle ODE system and inverse engineering
//! - [`oracle`]: brute-force minimal-time searches and parameter sweeps
//! - [`cli`]: the `qoc-lz` command-line front end
//!
//! The runnable examples under `examples/` walk through each capability; see
//! the README for an index.

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod error;
mod golden;
pub mod jsonio;
pub mod oracle;
pub mod protocol;
pub mod states;
pub mod su2;
pub mod tol;

pub use error::{Error, Result};
pub use states::{LzParams, Level, QubitState};
pub use su2::{EulerAngles, Unitary2};
pub use tol::Tolerances;
