use alloc::vec;
use alloc::vec::Vec;

use super::{ComplexSignal, IirFilter};
use crate::error::invalid;
use crate::{Complex64, Error, Result};

/// Real-valued FIR filter applied at `rate` samples per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Vec<f64>,
    rate: usize,
    /// Group delay in samples, used to align "same"-mode output.
    delay: f64,
    normalized: bool,
}

impl FirFilter {
    /// Filter with the delay of a linear-phase design, `(len - 1) / 2`.
    pub fn new(taps: Vec<f64>, rate: usize) -> Result<Self> {
        let delay = taps.len().saturating_sub(1) as f64 / 2.0;
        Self::with_delay(taps, rate, delay, false)
    }

    pub fn with_delay(taps: Vec<f64>, rate: usize, delay: f64, normalized: bool) -> Result<Self> {
        if taps.is_empty() {
            return Err(invalid!("FIR filter needs at least one tap"));
        }
        if rate == 0 {
            return Err(invalid!("FIR rate must be positive"));
        }
        if taps.iter().any(|h| !h.is_finite()) {
            return Err(invalid!("FIR taps must be finite"));
        }
        if normalized {
            let e: f64 = taps.iter().map(|h| h * h).sum();
            if (e - 1.0).abs() > 1e-12 {
                return Err(invalid!("taps flagged normalized have energy {e}"));
            }
        }
        Ok(Self { taps, rate, delay, normalized })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Returns a copy with every tap multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            taps: self.taps.iter().map(|h| h * gain).collect(),
            rate: self.rate,
            delay: self.delay,
            normalized: self.normalized && (gain.abs() - 1.0).abs() < 1e-15,
        }
    }
}

/// Output length convention of [`fir_apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirMode {
    /// All `N + L - 1` samples of the linear convolution.
    Full,
    /// `N` samples starting at the rounded group delay of the filter.
    Same,
}

/// Linear convolution of `x` with the taps of `h`.
pub fn fir_apply(h: &FirFilter, x: &ComplexSignal, mode: FirMode) -> Result<ComplexSignal> {
    if h.rate != x.rate() {
        return Err(Error::RateMismatch { expected: h.rate, found: x.rate() });
    }
    let full = convolve(x.samples(), &h.taps);
    let out = match mode {
        FirMode::Full => full,
        FirMode::Same => {
            let start = (h.delay.round().max(0.0) as usize).min(full.len());
            let end = (start + x.len()).min(full.len());
            let mut v = full[start..end].to_vec();
            v.resize(x.len(), Complex64::new(0.0, 0.0));
            v
        }
    };
    Ok(ComplexSignal::from_parts(out, x.rate()))
}

/// Full linear convolution. Zero input samples are skipped, which keeps
/// filtering of zero-stuffed signals cheap.
pub(crate) fn convolve(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    if x.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() + taps.len() - 1];
    for (j, &xj) in x.iter().enumerate() {
        if xj.re == 0.0 && xj.im == 0.0 {
            continue;
        }
        for (o, &h) in out[j..j + taps.len()].iter_mut().zip(taps) {
            *o += xj * h;
        }
    }
    out
}

/// Causal IIR filtering from zero initial state; output length equals input.
pub fn iir_apply(g: &IirFilter, x: &ComplexSignal) -> Result<ComplexSignal> {
    if g.rate() != x.rate() {
        return Err(Error::RateMismatch { expected: g.rate(), found: x.rate() });
    }
    let mut y = x.samples().to_vec();
    g.filter_in_place(&mut y);
    Ok(ComplexSignal::from_parts(y, x.rate()))
}
