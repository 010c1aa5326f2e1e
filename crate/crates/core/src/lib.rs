//! Inf-sup constants of sesquilinear forms on finite-dimensional Hilbert
//! spaces, Fortin operators built from a discrete inf-sup condition, and the
//! Banach-space operator lemmas behind them.

pub mod banach;
pub mod error;
pub mod fortin;
pub mod linalg;
pub mod problems;
pub mod spectra;

pub use error::{Error, Result};
