pub mod classify;
pub mod conditions;
pub mod error;
pub mod geometry;
pub mod quad;
pub mod reduction;
pub mod weights;
pub mod witness;

pub use error::{Error, Result};
