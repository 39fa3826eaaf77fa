//! Building blocks for simulating and designing single-carrier links whose
//! transmitter and receiver use 1-bit converters with oversampling.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; IO, configuration files and parallel sweeps live
//! in the `onebit` companion crate.
//!
//! Module map:
//!
//! - [`dsp`]: signals, pulse shaper and Butterworth design, rate changes,
//!   the 1-bit quantizer and block convolution matrices.
//! - [`quant_stats`]: second-order statistics of 1-bit quantized Gaussian
//!   vectors (arcsine law and its linearization).
//! - [`equalizer`]: covariance assembly for the whole chain and the
//!   quantization-aware MMSE equalizer.
//! - [`link`]: Monte Carlo link simulation, transmit power and required SNR.
//! - [`spectrum`]: Welch PSD and fractional-power bandwidth.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dsp;
pub mod equalizer;
mod error;
pub mod link;
pub mod quant_stats;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used for covariances and convolution matrices.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
