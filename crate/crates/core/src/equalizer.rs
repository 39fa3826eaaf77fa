//! Quantization-aware MMSE equalizer.
//!
//! The chain is modeled on a finite block: `L_eq` consecutive ADC samples,
//! every DAC sample that reaches them through the analog response, and
//! every symbol that reaches those DAC samples through the pulse shaper.
//! Both converters are linearized with their Bussgang gains
//! `sqrt(4/pi) K`, and their output covariances follow the arcsine law.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::dsp::{convolution_matrix, strided_convolution_matrix, FirFilter, IirFilter};
use crate::error::invalid;
use crate::link::LinkConfig;
use crate::quant_stats::{kappa, ArcsineMode, CovMatrix, DiagNormalizer};
use crate::{CMatrix, Complex64, Error, Result};

/// Largest accepted condition number of `C_xQ`.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative tail energy below which analog responses are truncated.
pub const RESPONSE_TAIL: f64 = 1e-8;

/// Impulse responses of the continuous-time part of the chain, emulated at
/// `internal_rate` samples per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogResponse {
    /// One DAC sample through hold, TX LPF, channel gain and RX LPF.
    pub signal: Vec<f64>,
    /// RX LPF alone, the path seen by the channel noise.
    pub noise: Vec<f64>,
    pub internal_rate: usize,
    pub l_u: usize,
    pub l_d: usize,
}

impl AnalogResponse {
    /// Internal samples per DAC sample.
    pub fn hold(&self) -> usize {
        self.internal_rate / self.l_u
    }

    /// Internal samples per ADC sample.
    pub fn decimation(&self) -> usize {
        self.internal_rate / self.l_d
    }

    /// Response to a DAC sample at time 0 observed on the ADC grid.
    pub fn adc_grid(&self) -> Vec<f64> {
        self.signal.iter().step_by(self.decimation()).copied().collect()
    }

    /// Energy of the signal response on the internal grid.
    pub fn energy(&self) -> f64 {
        self.signal.iter().map(|v| v * v).sum()
    }
}

fn truncate_tail(h: &mut Vec<f64>, rel_tol: f64) {
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
    h.truncate(cut.max(1));
}

fn convolve_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Excites one DAC sample and runs it through the hold, both LPFs and the
/// channel gain at the internal rate. `None` filters are all-pass.
pub fn derive_analog_response(
    config: &LinkConfig,
    tx_lpf: Option<&IirFilter>,
    rx_lpf: Option<&IirFilter>,
) -> Result<AnalogResponse> {
    let r = config.internal_rate;
    if r == 0 || config.l_u == 0 || config.l_d == 0 || !r.is_multiple_of(config.l_u) || !r.is_multiple_of(config.l_d) {
        return Err(invalid!(
            "internal rate {r} must be a multiple of l_u = {} and l_d = {}",
            config.l_u,
            config.l_d
        ));
    }
    for g in [tx_lpf, rx_lpf].into_iter().flatten() {
        if g.rate() != r {
            return Err(Error::RateMismatch { expected: r, found: g.rate() });
        }
    }
    let ir = |g: Option<&IirFilter>| match g {
        Some(g) => g.truncated_impulse_response(RESPONSE_TAIL),
        None => alloc::vec![1.0],
    };
    let tx = ir(tx_lpf);
    let rx = ir(rx_lpf);
    let hold = alloc::vec![1.0; r / config.l_u];
    let mut signal = convolve_real(&convolve_real(&hold, &tx), &rx);
    let gain = config.alpha.sqrt();
    signal.iter_mut().for_each(|v| *v *= gain);
    truncate_tail(&mut signal, RESPONSE_TAIL);
    Ok(AnalogResponse { signal, noise: rx, internal_rate: r, l_u: config.l_u, l_d: config.l_d })
}

/// All second-order quantities of the block model.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    /// `E[s_u s_u^H]` on the upsampled symbol grid.
    pub c_su: CMatrix,
    /// `E[s_u s^H]`.
    pub c_sus: CMatrix,
    /// DAC input covariance.
    pub c_y: CovMatrix,
    /// ADC input covariance.
    pub c_x: CovMatrix,
    /// ADC output covariance.
    pub c_xq: CovMatrix,
    /// `E[x_Q s^H]`, one column per symbol of the block.
    pub c_xqs: CMatrix,
    pub h_ps: CMatrix,
    pub h_a: CMatrix,
    pub gamma: CMatrix,
    /// `diag(C_y)^(-1/2)`, identity when the DAC is not quantized.
    pub k_y: DiagNormalizer,
    /// `diag(C_x)^(-1/2)`, identity when the ADC is not quantized.
    pub k_x: DiagNormalizer,
    /// Global index of the first symbol column, relative to the symbol whose
    /// DAC sample coincides with ADC sample 0 of the window.
    pub first_symbol: isize,
    /// Global index of the first DAC sample of the block.
    pub first_dac: isize,
    pub sigma_s2: f64,
    pub l_d: usize,
}

impl CovarianceSet {
    pub fn n_symbols(&self) -> usize {
        self.c_xqs.ncols()
    }

    pub fn condition_number(&self) -> f64 {
        condition_number(&self.c_xq)
    }
}

fn condition_number(c: &CovMatrix) -> f64 {
    let ev = c.eigenvalues();
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

fn div_floor(a: isize, b: isize) -> isize {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: isize, b: isize) -> isize {
    -div_floor(-a, b)
}

/// Quantizer model applied to a covariance: output covariance and the
/// normalizer of its Bussgang gain.
fn converter(c_in: &CovMatrix, quantized: bool, mode: ArcsineMode) -> Result<(CovMatrix, DiagNormalizer)> {
    if quantized {
        Ok((mode.output_cov(c_in)?, kappa(c_in.matrix())?))
    } else {
        Ok((c_in.clone(), DiagNormalizer::identity(c_in.dim())))
    }
}

fn bussgang_gain(k: &DiagNormalizer, quantized: bool, m: &CMatrix) -> CMatrix {
    if quantized {
        k.scale_rows(m) * Complex64::new((4.0 / PI).sqrt(), 0.0)
    } else {
        m.clone()
    }
}

/// Assembles the block covariances for pulse shaper `h_ps` (taps as applied,
/// at `l_u` per symbol), the analog responses and noise power `sigma_n2`
/// (per symbol-rate bandwidth, `N_0 / T_s`).
pub fn build_covariance_set(
    config: &LinkConfig,
    h_ps: &FirFilter,
    analog: &AnalogResponse,
    sigma_n2: f64,
) -> Result<CovarianceSet> {
    let (l_u, l_d) = (config.l_u, config.l_d);
    if h_ps.rate() != l_u {
        return Err(Error::RateMismatch { expected: l_u, found: h_ps.rate() });
    }
    if analog.l_u != l_u || analog.l_d != l_d {
        return Err(invalid!("analog response was derived for other oversampling factors"));
    }
    if config.l_eq == 0 {
        return Err(invalid!("equalizer length must be positive"));
    }
    if !(sigma_n2 >= 0.0) || !sigma_n2.is_finite() {
        return Err(invalid!("noise power {sigma_n2} must be finite and non-negative"));
    }
    let hold = analog.hold() as isize;
    let decim = analog.decimation() as isize;
    let l_eq = config.l_eq;
    let la = analog.signal.len() as isize;
    let lh = h_ps.len() as isize;
    let lu = l_u as isize;

    // DAC samples reaching ADC samples 0..l_eq
    let i_lo = div_ceil(-(la - 1), hold);
    let i_hi = div_floor((l_eq as isize - 1) * decim, hold);
    let n_y = (i_hi - i_lo + 1) as usize;
    // symbols reaching those DAC samples
    let k_lo = div_ceil(i_lo - lh + 1, lu);
    let k_hi = div_floor(i_hi, lu);
    let n_s = (k_hi - k_lo + 1) as usize;
    let n_u = (n_s - 1) * l_u + 1;

    let sigma_s2 = config.sigma_s2;
    let s2 = Complex64::new(sigma_s2, 0.0);
    let c_su = CMatrix::from_fn(n_u, n_u, |i, j| {
        if i == j && i % l_u == 0 { s2 } else { Complex64::new(0.0, 0.0) }
    });
    let c_sus = CMatrix::from_fn(n_u, n_s, |i, j| {
        if i == j * l_u { s2 } else { Complex64::new(0.0, 0.0) }
    });

    let h_ps_m = convolution_matrix(h_ps.taps(), n_u, n_y, i_lo - k_lo * lu);
    // only the symbol columns of H_ps carry power
    let h_sym = CMatrix::from_fn(n_y, n_s, |i, k| h_ps_m[(i, k * l_u)]);
    let c_y = CovMatrix::from_hermitian(&h_sym * h_sym.adjoint() * s2);

    let h_a = strided_convolution_matrix(
        &analog.signal,
        n_y,
        l_eq,
        analog.hold(),
        analog.decimation(),
        -i_lo * hold,
    );
    let lg = analog.noise.len();
    let n_t = (l_eq - 1) * analog.decimation() + lg;
    let gamma = strided_convolution_matrix(&analog.noise, n_t, l_eq, 1, analog.decimation(), lg as isize - 1)
        * Complex64::new((analog.decimation() as f64).sqrt(), 0.0);

    let (c_yq, k_y) = converter(&c_y, config.quantize_tx, config.arcsine)?;
    let noise = &gamma * gamma.adjoint() * Complex64::new(l_d as f64 * sigma_n2, 0.0);
    let c_x = CovMatrix::from_hermitian(&h_a * c_yq.matrix() * h_a.adjoint() + noise);
    let (c_xq, k_x) = converter(&c_x, config.quantize_rx, config.arcsine)?;

    let through_dac = bussgang_gain(&k_y, config.quantize_tx, &(&h_ps_m * &c_sus));
    let c_xqs = bussgang_gain(&k_x, config.quantize_rx, &(&h_a * through_dac));

    let cond = condition_number(&c_xq);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned { cond });
    }

    Ok(CovarianceSet {
        c_su,
        c_sus,
        c_y,
        c_x,
        c_xq,
        c_xqs,
        h_ps: h_ps_m,
        h_a,
        gamma,
        k_y,
        k_x,
        first_symbol: k_lo,
        first_dac: i_lo,
        sigma_s2,
        l_d,
    })
}

/// Linear equalizer `ŝ = Σ_k w[k] x_Q[k]` over a window of ADC samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalizer {
    pub taps: Vec<Complex64>,
    /// Symbol column of the block model this equalizer estimates.
    pub nu: usize,
    /// Symbol estimated from a window starting at ADC sample `m l_d`,
    /// relative to `m`.
    pub symbol_offset: isize,
    pub l_d: usize,
}

impl Equalizer {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// First ADC sample of the window that estimates symbol `m`.
    pub fn window_start(&self, m: isize) -> isize {
        (m - self.symbol_offset) * self.l_d as isize
    }

    /// Estimate of symbol `m` from ADC samples `x`, or `None` when the
    /// window leaves the block.
    pub fn estimate(&self, x: &[Complex64], m: isize) -> Option<Complex64> {
        let start = self.window_start(m);
        if start < 0 || start as usize + self.taps.len() > x.len() {
            return None;
        }
        let win = &x[start as usize..start as usize + self.taps.len()];
        Some(self.taps.iter().zip(win).map(|(w, v)| w * v).sum())
    }
}

/// Column of `C_xQs` with the largest energy; ties go to the column nearest
/// the block center.
pub fn select_delay(cs: &CovarianceSet) -> usize {
    let n = cs.c_xqs.ncols();
    let energy: Vec<f64> = (0..n).map(|j| cs.c_xqs.column(j).norm_squared()).collect();
    let max = energy.iter().cloned().fold(0.0, f64::max);
    let center = (n as f64 - 1.0) / 2.0;
    (0..n)
        .filter(|&j| energy[j] >= max * (1.0 - 1e-9))
        .min_by(|&a, &b| (a as f64 - center).abs().total_cmp(&(b as f64 - center).abs()).then(a.cmp(&b)))
        .unwrap_or(0)
}

/// Solves `w C_xQ = c^H` with `c` the column `nu` of `C_xQs`.
pub fn mmse_weights(c_xq: &CovMatrix, c_xqs: &CMatrix, nu: usize) -> Result<Vec<Complex64>> {
    if nu >= c_xqs.ncols() {
        return Err(invalid!("delay {nu} outside the {} symbols of the block", c_xqs.ncols()));
    }
    if c_xqs.nrows() != c_xq.dim() {
        return Err(invalid!("cross-covariance has {} rows, expected {}", c_xqs.nrows(), c_xq.dim()));
    }
    let c = c_xqs.column(nu).into_owned();
    let chol = c_xq
        .matrix()
        .clone()
        .cholesky()
        .ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let v = chol.solve(&c);
    Ok(v.iter().map(|z| z.conj()).collect())
}

/// MMSE equalizer for the modeled chain, estimating symbol column `nu`.
pub fn solve_mmse(cs: &CovarianceSet, nu: usize) -> Result<Equalizer> {
    let taps = mmse_weights(&cs.c_xq, &cs.c_xqs, nu)?;
    Ok(Equalizer { taps, nu, symbol_offset: cs.first_symbol + nu as isize, l_d: cs.l_d })
}

/// Model MSE `σ_s² - 2 Re(w c) + w C_xQ w^H` of an arbitrary tap vector.
pub fn model_mse(cs: &CovarianceSet, nu: usize, taps: &[Complex64]) -> f64 {
    let w = nalgebra::DVector::from_column_slice(taps);
    let c = cs.c_xqs.column(nu);
    let quad = (w.transpose() * cs.c_xq.matrix() * w.map(|z| z.conj()))[(0, 0)].re;
    let lin = (w.transpose() * c)[(0, 0)].re;
    cs.sigma_s2 - 2.0 * lin + quad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::design_butterworth4;
    use alloc::vec;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn base(rho: f64, delta_n: f64, l: usize) -> LinkConfig {
        LinkConfig { rho, delta_n, l_u: l, l_d: l, ..LinkConfig::default() }
    }

    fn design(cfg: &LinkConfig, sigma_n2: f64) -> Result<CovarianceSet> {
        let ps = cfg.pulse_shaper()?;
        let lpf = cfg.lpf()?;
        let analog = derive_analog_response(cfg, lpf.as_ref(), lpf.as_ref())?;
        build_covariance_set(cfg, &ps, &analog, sigma_n2)
    }

    #[test]
    fn all_pass_response_is_unit_impulse() {
        let cfg = LinkConfig { l_u: 4, l_d: 4, internal_rate: 4, ..LinkConfig::default() };
        let a = derive_analog_response(&cfg, None, None).unwrap();
        assert_eq!(a.signal, vec![1.0]);
        assert_eq!(a.adc_grid(), vec![1.0]);
    }

    #[test]
    fn analog_response_rejects_indivisible_rate() {
        let cfg = LinkConfig { l_u: 3, internal_rate: 16, ..LinkConfig::default() };
        assert!(derive_analog_response(&cfg, None, None).is_err());
    }

    #[test]
    fn analog_response_converges_in_internal_rate() {
        // The ADC-grid response is a discretisation of a continuous-time
        // response; the error is first order in 1/R (half-sample alignment of
        // the hold and the bilinear filters), so successive gaps must halve.
        let at = |r: usize| {
            let cfg = LinkConfig { internal_rate: r, ..base(0.5, 0.0, 2) };
            let g = design_butterworth4(1.0, r).unwrap();
            derive_analog_response(&cfg, Some(&g), Some(&g)).unwrap().adc_grid()
        };
        let gap = |a: &Vec<f64>, b: &Vec<f64>| {
            let n = a.len().max(b.len());
            let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
            let diff: f64 = (0..n).map(|i| (get(a, i) - get(b, i)).powi(2)).sum();
            let norm: f64 = b.iter().map(|v| v * v).sum();
            (diff / norm).sqrt()
        };
        let g: Vec<Vec<f64>> = [16, 32, 64, 128].iter().map(|&r| at(r)).collect();
        let gaps: Vec<f64> = g.windows(2).map(|w| gap(&w[0], &w[1])).collect();
        for w in gaps.windows(2) {
            assert!(w[1] < 0.6 * w[0], "{gaps:?}");
        }
        assert!(gaps[2] < 0.02, "{gaps:?}");
    }

    #[test]
    fn diag_of_c_y_reflects_cyclostationarity() {
        let cs = design(&base(0.5, 0.0, 2), 0.1).unwrap();
        let d = cs.c_y.diagonal();
        let (lo, hi) = d[10..d.len() - 10]
            .iter()
            .fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!((hi - lo) / hi > 1e-6, "{lo} {hi}");
    }

    #[test]
    fn two_tap_shaper_gives_stationary_dac_input() {
        let cs = design(&base(1.0, 0.5, 2), 0.1).unwrap();
        // away from the block edges every DAC sample carries one symbol
        let interior = &cs.k_y.values()[10..cs.k_y.len() - 10];
        let first = interior[0];
        assert!(interior.iter().all(|v| (v - first).abs() < 1e-6 * first));
    }

    #[test]
    fn c_xq_diagonal_is_two() {
        for (rho, dn, l) in [(0.5, 0.0, 2), (1.0, 0.5, 2), (0.1, 0.3, 4)] {
            let cs = design(&base(rho, dn, l), 0.05).unwrap();
            assert!(cs.c_xq.diagonal().iter().all(|d| *d == 2.0));
            assert!(cs.c_x.is_psd() && cs.c_xq.is_psd() && cs.c_y.is_psd());
        }
    }

    #[test]
    fn block_structure_of_symbol_covariances() {
        let cs = design(&base(0.3, 0.0, 4), 0.1).unwrap();
        let l_u = 4;
        for i in 0..cs.c_su.nrows() {
            for j in 0..cs.c_su.ncols() {
                let expect = if i == j && i % l_u == 0 { 1.0 } else { 0.0 };
                assert_eq!(cs.c_su[(i, j)].re, expect);
            }
            for j in 0..cs.c_sus.ncols() {
                let expect = if i == j * l_u { 1.0 } else { 0.0 };
                assert_eq!(cs.c_sus[(i, j)].re, expect);
            }
        }
    }

    #[test]
    fn ill_conditioning_is_reported() {
        let cfg = LinkConfig { quantize_rx: false, quantize_tx: false, ..base(0.5, 0.0, 8) };
        assert!(matches!(design(&cfg, 0.0), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn identity_problem() {
        let c = CovMatrix::new(CMatrix::identity(4, 4)).unwrap();
        let sigma = Complex64::new(0.7, -0.2);
        let mut x = CMatrix::zeros(4, 3);
        x[(2, 1)] = sigma;
        let w = mmse_weights(&c, &x, 1).unwrap();
        assert_eq!(w, vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), sigma.conj(), Complex64::new(0.0, 0.0)]);
        let w2 = mmse_weights(&c, &(x * Complex64::new(2.5, 0.0)), 1).unwrap();
        assert_eq!(w2[2], sigma.conj() * 2.5);
        assert!(mmse_weights(&c, &CMatrix::zeros(4, 3), 3).is_err());
    }

    #[test]
    fn all_pass_delay_is_recovered() {
        for d in 0..5usize {
            let mut taps = vec![0.0; d + 1];
            taps[d] = 1.0;
            let ps = FirFilter::new(taps, 1).unwrap();
            let cfg = LinkConfig {
                l_u: 1,
                l_d: 1,
                internal_rate: 1,
                l_eq: 1,
                quantize_tx: false,
                quantize_rx: false,
                ..LinkConfig::default()
            };
            let analog = derive_analog_response(&cfg, None, None).unwrap();
            let cs = build_covariance_set(&cfg, &ps, &analog, 0.01).unwrap();
            let eq = solve_mmse(&cs, select_delay(&cs)).unwrap();
            assert_eq!(eq.symbol_offset, -(d as isize));
        }
    }

    #[test]
    fn delay_ties_break_toward_center() {
        let ps = FirFilter::new(vec![1.0], 1).unwrap();
        let cfg = LinkConfig {
            l_u: 1,
            l_d: 1,
            internal_rate: 1,
            l_eq: 6,
            quantize_tx: false,
            quantize_rx: false,
            ..LinkConfig::default()
        };
        let analog = derive_analog_response(&cfg, None, None).unwrap();
        let cs = build_covariance_set(&cfg, &ps, &analog, 0.01).unwrap();
        // six equal-energy columns, centre between 2 and 3
        assert_eq!(cs.n_symbols(), 6);
        assert_eq!(select_delay(&cs), 2);
    }

    #[test]
    fn delay_follows_group_delay_budget() {
        for l in [2usize, 4] {
            let cfg = base(0.5, 0.0, l);
            let cs = design(&cfg, 0.05).unwrap();
            let nu = select_delay(&cs);
            // group delays (internal samples) from filter metadata
            let ps_delay = cfg.l_ps as f64 / 2.0 * (cfg.internal_rate / l) as f64;
            let g = cfg.lpf().unwrap().unwrap();
            let h = g.impulse_response(4096);
            let lpf_delay = h.iter().enumerate().map(|(n, v)| n as f64 * v).sum::<f64>() / h.iter().sum::<f64>();
            let hold_delay = ((cfg.internal_rate / l) as f64 - 1.0) / 2.0;
            let centre = (cfg.l_eq as f64 - 1.0) / 2.0 * (cfg.internal_rate / l) as f64;
            let symbol = (centre - ps_delay - 2.0 * lpf_delay - hold_delay) / cfg.internal_rate as f64;
            let expected = symbol - cs.first_symbol as f64;
            assert!((nu as f64 - expected).abs() <= 1.0, "l={l}: nu={nu} expected {expected}");
        }
    }

    #[test]
    fn solution_is_stationary_point() {
        let cfg = base(0.3, 0.4, 2);
        let cs = design(&cfg, 0.05).unwrap();
        let nu = select_delay(&cs);
        let eq = solve_mmse(&cs, nu).unwrap();
        let mse = model_mse(&cs, nu, &eq.taps);
        assert!(mse > 0.0 && mse < cfg.sigma_s2);
        for k in 0..eq.len() {
            for d in [Complex64::new(1e-3, 0.0), Complex64::new(0.0, -1e-3)] {
                let mut w = eq.taps.clone();
                w[k] += d;
                assert!(model_mse(&cs, nu, &w) >= mse);
            }
        }
        // gradient w C - c^H
        let w = nalgebra::DVector::from_column_slice(&eq.taps);
        let grad = w.transpose() * cs.c_xq.matrix() - cs.c_xqs.column(nu).adjoint();
        assert!(grad.norm() < 1e-8, "{}", grad.norm());
    }

    #[test]
    fn unquantized_matches_direct_normal_equations() {
        // bypass mode reduces to the classical Wiener solution built from
        // the raw linear model
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for l_eq in [4usize, 9, 16] {
            let cfg = LinkConfig { l_eq, quantize_tx: false, quantize_rx: false, ..base(0.5, 0.2, 2) };
            let z: f64 = StandardNormal.sample(&mut rng);
            let sigma_n2 = 0.05 + z.abs() * 0.01;
            let cs = design(&cfg, sigma_n2).unwrap();
            let nu = select_delay(&cs);
            let eq = solve_mmse(&cs, nu).unwrap();
            // x = H_a H_ps s_u + n; Wiener: w^T = (R_xx^T)^-1 r_xs^*
            let a = &cs.h_a * &cs.h_ps;
            let r_xx = &a * &cs.c_su * a.adjoint()
                + &cs.gamma * cs.gamma.adjoint() * Complex64::new(cfg.l_d as f64 * sigma_n2, 0.0);
            let r_xs = &a * &cs.c_sus;
            let pinv = r_xx.clone().pseudo_inverse(1e-14).unwrap();
            let w: Vec<Complex64> = (pinv * r_xs.column(nu)).iter().map(|z| z.conj()).collect();
            let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, b) in eq.taps.iter().zip(&w) {
                assert!((a - b).norm() < 1e-8 * scale);
            }
        }
    }
}
