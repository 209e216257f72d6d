//! Exact and high-precision tools for constant-term period sequences, their
//! Picard-Fuchs operators, Apéry limits and truncated higher normal functions.

pub mod casebook;
pub mod diffop;
pub mod error;
pub mod lattice;
pub mod laurent;
pub mod numerics;
pub mod opfit;
pub mod poly;
pub mod recognize;
pub mod sequences;

pub use error::{Error, Result};
