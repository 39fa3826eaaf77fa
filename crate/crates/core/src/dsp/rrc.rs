use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};


use super::FirFilter;
use crate::error::invalid;
use crate::Result;

/// Parameters of a sampled root-raised-cosine pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrcSpec {
    /// Roll-off factor in (0, 1].
    pub rho: f64,
    /// Fractional sampling offset in [0, 1), in units of the tap spacing.
    pub delta_n: f64,
    /// Taps per symbol period.
    pub l_u: usize,
    /// Filter order; the filter has `length + 1` taps.
    pub length: usize,
}

impl RrcSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(invalid!("roll-off {} outside (0, 1]", self.rho));
        }
        if !(self.delta_n >= 0.0 && self.delta_n < 1.0) {
            return Err(invalid!("fractional delay {} outside [0, 1)", self.delta_n));
        }
        if self.l_u == 0 {
            return Err(invalid!("oversampling factor must be at least 1"));
        }
        if self.length < 2 {
            return Err(invalid!("pulse length {} is below 2", self.length));
        }
        Ok(())
    }
}

/// Continuous-time root-raised-cosine pulse at `tau = t / T_s`, not
/// normalized (peak value `1 + rho (4/pi - 1)`).
pub fn rrc_pulse(tau: f64, rho: f64) -> f64 {
    const EPS: f64 = 1e-9;
    if tau.abs() < EPS {
        return 1.0 + rho * (4.0 / PI - 1.0);
    }
    if rho > 0.0 && (tau.abs() - 1.0 / (4.0 * rho)).abs() < EPS {
        let a = PI / (4.0 * rho);
        return rho * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * tau * (1.0 - rho)).sin() + 4.0 * rho * tau * (PI * tau * (1.0 + rho)).cos();
    let den = PI * tau * (1.0 - (4.0 * rho * tau) * (4.0 * rho * tau));
    num / den
}

/// Samples the RRC pulse at `t = (n - L/2 + delta_n) T_s / l_u` for
/// `n = 0..=L` and normalizes the taps to unit energy.
///
/// The peak sits near tap `L/2`, which is recorded as the filter delay.
pub fn design_rrc(spec: &RrcSpec) -> Result<FirFilter> {
    spec.validate()?;
    let half = spec.length as f64 / 2.0;
    let mut taps: Vec<f64> = (0..=spec.length)
        .map(|n| {
            let tau = (n as f64 - half + spec.delta_n) / spec.l_u as f64;
            rrc_pulse(tau, spec.rho)
        })
        .collect();
    let energy: f64 = taps.iter().map(|h| h * h).sum();
    let scale = 1.0 / energy.sqrt();
    taps.iter_mut().for_each(|h| *h *= scale);
    FirFilter::with_delay(taps, spec.l_u, half - spec.delta_n, true)
}
