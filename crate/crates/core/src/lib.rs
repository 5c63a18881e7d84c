//! Rational surrogate models for dense grid tensors via the multivariate
//! Loewner framework.
//!
//! The ω-variable null space is never formed: barycentric weights are built
//! from many small univariate Loewner null vectors, one variable at a time.

pub mod adaptive;
pub mod benchmark;
pub mod cli;
pub mod complexity;
pub mod direct;
pub mod error;
pub mod loewner;
pub mod models;
pub mod par;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
