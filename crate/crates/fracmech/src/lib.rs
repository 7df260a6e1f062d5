//! Variational mechanics with one-sided fractional derivatives.
//!
//! The crate takes a Lagrangian that is linear in velocity-like fractional
//! derivatives, derives its Euler-Lagrange equations, canonical momenta,
//! primary constraints, and Hamiltonian symbolically, and solves the
//! resulting boundary-value problems on uniform grids with a
//! Grünwald-Letnikov discretization. Start with the runnable programs in
//! `examples/`; each one exercises a single capability end to end.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod frac_ops;
pub mod problem;
pub mod report;
pub mod solver;
pub mod special;
pub mod varprob;

pub use error::{Error, Result};
