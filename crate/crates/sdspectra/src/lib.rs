//! Spectral machinery for powers of the first-difference matrix, eigenvector
//! reconstruction through linear recurrences, and the Sigma-Delta
//! quantization codecs built on top of them.

pub mod charpoly;
pub mod codec;
pub mod dense;
pub mod diffmat;
mod error;
pub mod recurrence;
pub mod sigmadelta;
pub mod spectral;
pub mod vandermonde;
pub mod verify;

pub use error::{Error, Result};
