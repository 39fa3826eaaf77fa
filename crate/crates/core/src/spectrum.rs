//! Averaged-periodogram PSD estimates and the fractional-power bandwidth.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex32;

use crate::dsp::ComplexSignal;
use crate::error::invalid;
use crate::{Error, Result};

/// Default Welch segment length (samples).
pub const DEFAULT_SEGMENT: usize = 1024;
/// Default Welch segment overlap.
pub const DEFAULT_OVERLAP: f64 = 0.5;
/// Power fraction defining the occupied bandwidth.
pub const OCCUPIED_FRACTION: f64 = 0.9375;
/// Lower edge (in 1/T_s) of the stop band used for spectral-floor levels.
pub const STOPBAND_EDGE: f64 = 1.5;

const MAX_SEGMENT: usize = 4096;

/// Two-sided PSD on an fftshifted grid running from `-fs/2` to `fs/2 - df`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    /// Bin centers in units of 1/T_s.
    pub freqs: Vec<f64>,
    /// Power per unit frequency (frequency in 1/T_s).
    pub psd: Vec<f64>,
    pub df: f64,
    /// Mean power of the analysed signal.
    pub total_power: f64,
    /// Number of averaged segments.
    pub segments: usize,
}

impl SpectrumEstimate {
    /// `Σ psd · df`.
    pub fn integrated_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.df
    }

    /// PSD in dB, floored at -300 dB.
    pub fn psd_db(&self) -> Vec<f64> {
        self.psd.iter().map(|&p| 10.0 * p.max(1e-30).log10()).collect()
    }

    /// Integrated power of the bins whose center satisfies `lo <= |f| < hi`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.psd)
            .filter(|(f, _)| f.abs() >= lo && f.abs() < hi)
            .map(|(_, p)| p * self.df)
            .sum()
    }

    /// Mean PSD over `|f| >= STOPBAND_EDGE`, relative to the integrated
    /// power, in dB.
    pub fn stopband_level_db(&self) -> f64 {
        self.band_level_db(STOPBAND_EDGE, f64::INFINITY)
    }

    /// Mean PSD over `lo <= |f| < hi`, relative to the integrated power, in dB.
    pub fn band_level_db(&self, lo: f64, hi: f64) -> f64 {
        let (sum, n) = self
            .freqs
            .iter()
            .zip(&self.psd)
            .filter(|(f, _)| f.abs() >= lo && f.abs() < hi)
            .fold((0.0, 0usize), |(s, n), (_, p)| (s + p, n + 1));
        10.0 * (sum / n.max(1) as f64 / self.integrated_power()).log10()
    }
}

fn fft_in_place(buf: &mut [Complex32]) -> Result<()> {
    macro_rules! dispatch {
        ($($n:literal => $f:ident),*) => {
            match buf.len() {
                $($n => {
                    let arr: &mut [Complex32; $n] = buf.try_into().expect("length checked");
                    let _ = microfft::complex::$f(arr);
                })*
                n => return Err(invalid!("unsupported FFT length {n}")),
            }
        };
    }
    dispatch!(
        2 => cfft_2, 4 => cfft_4, 8 => cfft_8, 16 => cfft_16, 32 => cfft_32, 64 => cfft_64,
        128 => cfft_128, 256 => cfft_256, 512 => cfft_512, 1024 => cfft_1024,
        2048 => cfft_2048, 4096 => cfft_4096
    );
    Ok(())
}

/// Welch estimate with a periodic Hann window, normalized so that
/// `Σ psd · df` equals the mean power of `x` up to estimation error.
pub fn welch_psd(x: &ComplexSignal, segment_len: usize, overlap: f64) -> Result<SpectrumEstimate> {
    if !segment_len.is_power_of_two() || !(2..=MAX_SEGMENT).contains(&segment_len) {
        return Err(invalid!("segment length {segment_len} must be a power of two in [2, {MAX_SEGMENT}]"));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(invalid!("overlap {overlap} outside [0, 1)"));
    }
    if x.len() < segment_len {
        return Err(Error::SignalTooShort { len: x.len(), segment: segment_len });
    }
    let n = segment_len;
    let hop = (n - (overlap * n as f64).round() as usize).max(1);
    let window: Vec<f64> = (0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / n as f64).cos()))
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();

    let mut acc = vec![0.0f64; n];
    let mut buf = vec![Complex32::new(0.0, 0.0); n];
    let mut segments = 0usize;
    let samples = x.samples();
    let mut start = 0;
    while start + n <= samples.len() {
        for ((b, s), w) in buf.iter_mut().zip(&samples[start..start + n]).zip(&window) {
            *b = Complex32::new((s.re * w) as f32, (s.im * w) as f32);
        }
        fft_in_place(&mut buf)?;
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr() as f64;
        }
        segments += 1;
        start += hop;
    }

    let fs = x.rate() as f64;
    let df = fs / n as f64;
    let scale = 1.0 / (segments as f64 * fs * window_power);
    let half = n / 2;
    let (freqs, psd) = (0..n)
        .map(|i| {
            // shifted index: i = 0 is -fs/2
            let k = (i + half) % n;
            ((i as f64 - half as f64) * df, acc[k] * scale)
        })
        .unzip();
    Ok(SpectrumEstimate { freqs, psd, df, total_power: x.mean_power(), segments })
}

/// Width `B` (1/T_s) of the smallest interval `[-B/2, B/2]` containing
/// `fraction` of the integrated PSD. Each bin is treated as uniform over its
/// width, so the result interpolates linearly between bin edges.
pub fn fractional_bandwidth(s: &SpectrumEstimate, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(invalid!("fraction {fraction} outside (0, 1)"));
    }
    let total = s.integrated_power();
    if !(total > 0.0) || s.psd.iter().any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(invalid!("spectrum has no positive finite power"));
    }
    let half_df = s.df / 2.0;
    let inside = |b: f64| -> f64 {
        s.freqs
            .iter()
            .zip(&s.psd)
            .map(|(&f, &p)| {
                let w = ((f + half_df).min(b) - (f - half_df).max(-b)).max(0.0);
                p * w
            })
            .sum()
    };
    let target = fraction * total;
    let mut hi = s.freqs.iter().fold(0.0f64, |m, f| m.max(f.abs())) + half_df;
    if inside(hi) < target * (1.0 - 1e-12) {
        return Err(invalid!("fraction {fraction} not reachable"));
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 * s.df {
            break;
        }
    }
    Ok(2.0 * hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use crate::Complex64;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn tone(f0: f64, rate: usize, n: usize) -> ComplexSignal {
        let s = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * f0 * k as f64 / rate as f64))
            .collect();
        ComplexSignal::new(s, rate).unwrap()
    }

    fn white(sigma2: f64, rate: usize, n: usize, seed: u64) -> ComplexSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = (sigma2 / 2.0).sqrt();
        let s = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(a * re, a * im)
            })
            .collect();
        ComplexSignal::new(s, rate).unwrap()
    }

    #[test]
    fn tone_has_single_peak() {
        // bin-centred tone at 2/T_s, rate 16, 256-point segments: df = 1/16
        let x = tone(2.0, 16, 16 * 1024);
        let s = welch_psd(&x, 256, 0.5).unwrap();
        let (imax, _) = s.psd.iter().enumerate().fold((0, 0.0), |a, (i, &p)| if p > a.1 { (i, p) } else { a });
        assert!((s.freqs[imax] - 2.0).abs() < 1e-12);
        assert!((s.integrated_power() - 1.0).abs() < 0.01);
        assert!((s.total_power - 1.0).abs() < 1e-12);
        // Hann main lobe: everything beyond two bins is negligible
        let off: f64 = s
            .freqs
            .iter()
            .zip(&s.psd)
            .filter(|(f, _)| (*f - 2.0).abs() > 2.5 * s.df)
            .map(|(_, p)| p * s.df)
            .sum();
        assert!(off < 1e-6);
    }

    #[test]
    fn white_noise_is_flat() {
        let sigma2 = 3.0;
        let x = white(sigma2, 8, 64 * 1024, 5);
        let s = welch_psd(&x, 256, 0.5).unwrap();
        assert!(s.segments >= 200);
        let expected = sigma2 / 8.0;
        for p in &s.psd {
            assert!((p / expected - 1.0).abs() < 0.25, "{p} vs {expected}");
        }
        assert!((s.integrated_power() / sigma2 - 1.0).abs() < 0.02);
    }

    #[test]
    fn parseval_on_arbitrary_signal() {
        let mut x = white(1.0, 4, 32 * 1024, 9).into_samples();
        for (k, v) in x.iter_mut().enumerate() {
            *v = *v * (1.0 + (k as f64 * 0.01).sin()) + Complex64::new(0.3, 0.0);
        }
        let x = ComplexSignal::new(x, 4).unwrap();
        let s = welch_psd(&x, 1024, 0.5).unwrap();
        assert!((s.integrated_power() / x.mean_power() - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_short_signal_and_bad_segment() {
        let x = tone(0.0, 4, 100);
        assert_eq!(welch_psd(&x, 128, 0.5), Err(Error::SignalTooShort { len: 100, segment: 128 }));
        assert!(welch_psd(&x, 48, 0.5).is_err());
        assert!(welch_psd(&x, 64, 1.0).is_err());
    }

    fn brick(width: f64, fs: f64, n: usize) -> SpectrumEstimate {
        let df = fs / n as f64;
        let freqs: Vec<f64> = (0..n).map(|i| (i as f64 - (n / 2) as f64) * df).collect();
        let psd = freqs.iter().map(|f| if f.abs() < width / 2.0 { 2.5 } else { 0.0 }).collect();
        SpectrumEstimate { freqs, psd, df, total_power: 0.0, segments: 1 }
    }

    #[test]
    fn brick_wall_bandwidth() {
        let s = brick(2.0, 16.0, 1024);
        let w = s.integrated_power() / 2.5;
        let b = fractional_bandwidth(&s, 0.9375).unwrap();
        assert!((b - 0.9375 * w).abs() <= s.df, "{b}");
        // scale invariance
        let mut scaled = s.clone();
        scaled.psd.iter_mut().for_each(|p| *p *= 1e-3);
        assert!((fractional_bandwidth(&scaled, 0.9375).unwrap() - b).abs() < 1e-9);
    }

    #[test]
    fn fraction_limits() {
        let s = brick(100.0, 16.0, 256);
        let b = fractional_bandwidth(&s, 1.0 - 1e-9).unwrap();
        assert!((b - 16.0).abs() <= s.df, "{b}");
        assert!(fractional_bandwidth(&s, 1.0).is_err());
        assert!(fractional_bandwidth(&s, 0.0).is_err());
        let mut prev = 0.0;
        for i in 1..100 {
            let b = fractional_bandwidth(&s, i as f64 / 100.0).unwrap();
            assert!(b >= prev);
            prev = b;
        }
    }
}
