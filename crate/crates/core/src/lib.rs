//! Solvers for the cubic matrix equation `(I − hLX) X (I + hLX) = Y` on block
//! skew-Hermitian algebras, the two-stage Lie–Poisson isospectral integrator
//! built on them, and the model operators used to benchmark them.

pub mod algebra;
pub mod bench;
pub mod cli;
pub mod error;
pub mod integrator;
pub mod operators;
pub mod oracle;
pub mod riccati;
pub mod solvers;

pub use error::{Error, Result};
