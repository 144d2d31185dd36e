//! Exact finite-field machinery for dense AP-free sets with restricted
//! common differences.

pub mod bounds;
pub mod character;
pub mod construction;
pub mod error;
pub mod field;
pub mod harness;
pub mod linalg;
pub mod par;
pub mod prank;
pub mod probability;
pub mod rng;
pub mod tensor;
pub mod veronese;

pub use error::{Error, Result};
