//! Construction and verification of explicit single generators for finite
//! truncations of AH and AF inductive systems with diagonal connecting maps.

pub mod error;
pub mod linalg;
pub mod report;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
pub mod scaffold;
pub mod synthesis;
pub mod system;
pub mod pipeline;
pub mod verification;
