pub mod bounds;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod policies;
mod quad;
pub mod rng;

pub use error::{Error, Result};
