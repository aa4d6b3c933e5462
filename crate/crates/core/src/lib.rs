//! Correlations of 1-bounded multiplicative functions along systems of affine
//! linear forms.
//!
//! The crate computes empirical averages by sieved brute force, assembles the
//! explicit local-to-global main term (local averages, character factors,
//! archimedean integrals, singular series) with its error budget, and carries
//! the Gowers-norm and sign-pattern experiments built on top of them.

pub mod arith;
pub mod averages;
pub mod cli;
pub mod error;
pub mod forms;
pub mod local;
pub mod multfunc;
pub mod output;
pub mod signpatterns;

pub use error::{Error, Result};
