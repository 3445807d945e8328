//! Set-membership state estimation for linear systems observed through
//! quantized sensors with adaptive thresholds.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod numerics;
pub mod quantizer;
pub mod sim;

pub use error::{Error, Result};
