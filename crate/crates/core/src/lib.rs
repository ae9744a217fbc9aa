//! Reduced linearized moment systems for Knudsen layers.

pub mod boundary;
pub mod error;
pub mod profiles;
pub mod special;
pub mod spectral;
pub mod system;
pub mod verification;

pub use error::{KnudsenError, Result};
