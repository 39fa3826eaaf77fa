use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::error::invalid;
use crate::{Complex64, Result};

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    /// Frequency response at normalized angular frequency `omega` (rad/sample).
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        let num = self.b[0] + z1 * self.b[1] + z2 * self.b[2];
        let den = 1.0 + z1 * self.a[0] + z2 * self.a[1];
        num / den
    }

    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }

    fn process(&self, x: &mut [Complex64]) {
        // transposed direct form II
        let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for v in x.iter_mut() {
            let xin = *v;
            let y = xin * b0 + s1;
            s1 = xin * b1 - y * a1 + s2;
            s2 = xin * b2 - y * a2;
            *v = y;
        }
    }
}

/// Cascade of biquads running at `rate` samples per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct IirFilter {
    sections: Vec<Biquad>,
    f3db: f64,
    rate: usize,
}

impl IirFilter {
    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Design 3-dB cutoff in units of 1/T_s.
    pub fn f3db(&self) -> f64 {
        self.f3db
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    /// Frequency response at `f` (units of 1/T_s).
    pub fn response(&self, f: f64) -> Complex64 {
        let omega = 2.0 * PI * f / self.rate as f64;
        self.sections.iter().map(|s| s.response(omega)).product()
    }

    pub fn magnitude_db(&self, f: f64) -> f64 {
        20.0 * self.response(f).norm().log10()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(|s| s.poles().iter().all(|p| p.norm() < 1.0))
    }

    pub(crate) fn filter_in_place(&self, x: &mut [Complex64]) {
        for s in &self.sections {
            s.process(x);
        }
    }

    /// First `n` samples of the impulse response.
    pub fn impulse_response(&self, n: usize) -> Vec<f64> {
        let mut x = alloc::vec![Complex64::new(0.0, 0.0); n];
        if n > 0 {
            x[0] = Complex64::new(1.0, 0.0);
        }
        self.filter_in_place(&mut x);
        x.into_iter().map(|z| z.re).collect()
    }

    /// Impulse response cut where the remaining tail energy drops below
    /// `rel_tol` of the total.
    pub fn truncated_impulse_response(&self, rel_tol: f64) -> Vec<f64> {
        let mut n = 64 * self.rate.max(1);
        loop {
            let h = self.impulse_response(n);
            let total: f64 = h.iter().map(|v| v * v).sum();
            let mut tail = 0.0;
            let mut cut = h.len();
            for (k, v) in h.iter().enumerate().rev() {
                tail += v * v;
                if tail >= rel_tol * total {
                    cut = k + 1;
                    break;
                }
            }
            // the computed window must itself have a negligible tail
            if cut < n / 2 || n >= 1 << 22 {
                let mut h = h;
                h.truncate(cut.max(1));
                return h;
            }
            n *= 2;
        }
    }
}

/// Fourth-order Butterworth low-pass as two biquads, designed with the
/// bilinear transform and a prewarped cutoff so that the digital response is
/// exactly -3.01 dB at `f3db`. Both frequencies are in units of 1/T_s.
pub fn design_butterworth4(f3db: f64, fs: usize) -> Result<IirFilter> {
    let fs_f = fs as f64;
    if !(f3db > 0.0) || !f3db.is_finite() {
        return Err(invalid!("cutoff {f3db} must be positive"));
    }
    if f3db >= fs_f / 2.0 {
        return Err(invalid!("cutoff {f3db} is not below half the sample rate {fs}"));
    }
    let k = (PI * f3db / fs_f).tan();
    let sections = [PI / 8.0, 3.0 * PI / 8.0]
        .iter()
        .map(|&theta| {
            let q = 1.0 / (2.0 * theta.cos());
            let norm = 1.0 / (1.0 + k / q + k * k);
            let b0 = k * k * norm;
            Biquad {
                b: [b0, 2.0 * b0, b0],
                a: [2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm],
            }
        })
        .collect();
    Ok(IirFilter { sections, f3db, rate: fs })
}
