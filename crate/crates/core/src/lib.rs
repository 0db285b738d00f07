//! Assessment of how susceptible texture measures are to subtle acquisition
//! noise in grayscale CT-like images.

// Validation is written as `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod fft2;
pub mod filter;
pub mod io;
pub mod noise;
pub mod pipeline;
pub mod raster;
pub mod recon;
pub mod separability;
pub mod synth;
pub mod texture;

pub use error::{Error, Result};
pub use raster::{Raster, RoiKind, RoiSpec};
