//! Numerics for weak-signal detection under the complex spiked covariance model.

pub mod contour;
pub mod error;
pub mod hciz;
pub mod likelihood;
pub mod mp;
pub mod partitions;
pub mod power;
pub mod randmat;
pub mod special;

pub use error::{Error, Result};
