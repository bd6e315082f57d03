//! Numerical study of unique ergodicity of Markov operators on the matrix
//! algebra M_d(C) relative to their fixed-point subspace, via Riesz weighted
//! means.
//!
//! The library covers:
//! - Riesz weight sequences and their summability conditions ([`weights`]);
//! - complex matrix primitives, Schur products and null spaces
//!   ([`matrix_core`]);
//! - superoperators on M_d(C), including entangled Markov operators built
//!   from stochastic matrices, Choi matrices, and complete-positivity tests
//!   ([`superop`]);
//! - fixed-point subspaces and their subalgebra structure ([`fixed_points`]);
//! - weighted operator means, the unique-ergodicity checker, the invariant
//!   projection onto the fixed space with its error estimate, Jordan
//!   decomposition and invariant states ([`ergodic`]);
//! - a batch CLI over TOML configs ([`cli`], [`config`]).

pub mod cli;
pub mod config;
pub mod error;
pub mod ergodic;
pub mod fixed_points;
pub mod matrix_core;
pub mod superop;
pub mod weights;

pub use error::{Error, Result};
