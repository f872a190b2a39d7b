//! Integral-transform solvers for the Dirac and Klein-Gordon equations in de
//! Sitter spacetime, with independent ODE oracles and pointwise checks of the
//! operator factorizations behind them.

pub mod clifford;
pub mod dirac;
pub mod error;
pub mod factor;
pub mod jet;
pub mod kernels;
pub mod kg;
pub mod oracle;
pub mod quadrature;
pub mod specfun;
pub mod wave;

pub use error::{Error, Result};
