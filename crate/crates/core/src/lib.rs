//! Thermo-visco-elastic contact with adhesion and friction: regularized
//! entropy laws, P1 discretization, a staggered implicit time stepper and
//! an energy ledger.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod fields;
pub mod linalg;
pub mod mesh;
pub mod monotone;
pub mod output;
pub mod physics;
pub mod quadrature;
pub mod regularizers;
pub mod scenario;
pub mod selftest;
pub mod solver;

pub use error::{Error, Result};
