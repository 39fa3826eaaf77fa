//! Discrete-time building blocks of the transmit/receive chain.

mod butterworth;
mod convmat;
mod fir;
mod multirate;
mod quantize;
mod rrc;

pub use butterworth::{design_butterworth4, Biquad, IirFilter};
pub use convmat::{convolution_matrix, strided_convolution_matrix};
pub(crate) use fir::convolve;
pub use fir::{fir_apply, iir_apply, FirFilter, FirMode};
pub use multirate::{downsample, upsample, zero_order_hold};
pub use quantize::{quantize_1bit, sign_1bit};
pub use rrc::{design_rrc, rrc_pulse, RrcSpec};

use alloc::vec::Vec;

use crate::error::invalid;
use crate::{Complex64, Result};

/// Finite block of complex baseband samples.
///
/// `rate` is the number of samples per symbol period, so a signal at the
/// symbol rate has `rate == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    rate: usize,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, rate: usize) -> Result<Self> {
        if rate == 0 {
            return Err(invalid!("sample rate must be positive"));
        }
        if let Some(k) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid!("sample {k} is not finite"));
        }
        Ok(Self { samples, rate })
    }

    /// Builds a signal from real samples.
    pub fn from_real(samples: &[f64], rate: usize) -> Result<Self> {
        Self::new(samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(), rate)
    }

    pub(crate) fn from_parts(samples: Vec<Complex64>, rate: usize) -> Self {
        debug_assert!(rate > 0);
        Self { samples, rate }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration in symbol periods.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate as f64
    }

    /// Mean power `(1/N) Σ |x[k]|²`; zero for an empty signal.
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub(crate) fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_zero_rate_and_nan() {
        assert!(ComplexSignal::new(vec![Complex64::new(1.0, 0.0)], 0).is_err());
        assert!(ComplexSignal::new(vec![Complex64::new(f64::NAN, 0.0)], 1).is_err());
        assert!(ComplexSignal::new(vec![Complex64::new(0.0, f64::INFINITY)], 1).is_err());
    }

    #[test]
    fn mean_power_of_constellation() {
        let s = ComplexSignal::new(
            vec![Complex64::new(1.0, 1.0), Complex64::new(-1.0, 1.0)],
            1,
        )
        .unwrap();
        assert_eq!(s.mean_power(), 2.0);
        assert_eq!(s.duration(), 2.0);
        let empty = ComplexSignal::new(vec![], 4).unwrap();
        assert_eq!(empty.mean_power(), 0.0);
    }
}
