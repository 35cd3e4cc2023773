//! Numerical toolkit for the two-dimensional Hartree equation with a point
//! interaction at the origin.
//!
//! The point interaction of strength `α` is realised on a periodic spectral
//! grid through its resolvent. On top of that the crate provides ground-state
//! search (Weinstein functional), Gagliardo–Nirenberg constant estimates and a
//! mass-conserving split-step time integrator.

pub mod evolve;
pub mod grid;
pub mod groundstate;
pub mod pointop;
pub mod potential;
pub mod rearrange;
pub mod specfun;

pub use grid::{Field, GridSpec, Space};
pub use pointop::PointOperator;

