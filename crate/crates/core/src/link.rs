//! Monte Carlo simulation of the complete link.
//!
//! QPSK symbols → ↑l_u → pulse shaper → (1-bit DAC) → hold to the internal
//! rate → TX LPF → √α → AWGN → RX LPF → sample at l_d → (1-bit ADC) →
//! MMSE equalizer → ↓l_d → hard decisions.

use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::dsp::{
    convolve, design_butterworth4, design_rrc, sign_1bit, ComplexSignal, FirFilter,
    IirFilter, RrcSpec,
};
use crate::equalizer::{build_covariance_set, derive_analog_response, select_delay, solve_mmse, AnalogResponse, Equalizer};
use crate::error::invalid;
use crate::quant_stats::ArcsineMode;
use crate::special::db_to_linear;
use crate::spectrum::{welch_psd, SpectrumEstimate, DEFAULT_OVERLAP};
use crate::{Complex64, Error, Result};

/// Symbols counted per Monte Carlo batch.
pub const BATCH_SYMBOLS: usize = 8192;
/// Symbols of the transmit-power calibration run.
pub const CALIBRATION_SYMBOLS: usize = 20_000;

const CALIBRATION_STREAM: u64 = u64::MAX;

/// Every parameter of the simulated chain.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// RRC roll-off in (0, 1].
    pub rho: f64,
    /// Fractional delay of the sampled RRC, in [0, 1).
    pub delta_n: f64,
    /// DAC samples per symbol.
    pub l_u: usize,
    /// ADC samples per symbol.
    pub l_d: usize,
    /// Pulse shaper order (`l_ps + 1` taps).
    pub l_ps: usize,
    /// Equalizer taps.
    pub l_eq: usize,
    /// Symbol power.
    pub sigma_s2: f64,
    /// Channel power gain.
    pub alpha: f64,
    /// Samples per symbol emulating continuous time.
    pub internal_rate: usize,
    pub quantize_tx: bool,
    pub quantize_rx: bool,
    pub arcsine: ArcsineMode,
    /// Whether the TX and RX low-pass filters are present.
    pub lpf: bool,
    /// 3-dB cutoff of both LPFs in 1/T_s.
    pub lpf_cutoff: f64,
    pub seed: u64,
    /// Symbols counted by [`run_chain`].
    pub n_symbols: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            delta_n: 0.0,
            l_u: 2,
            l_d: 2,
            l_ps: 128,
            l_eq: 64,
            sigma_s2: 1.0,
            alpha: 1.0,
            internal_rate: 16,
            quantize_tx: true,
            quantize_rx: true,
            arcsine: ArcsineMode::Exact,
            lpf: true,
            lpf_cutoff: 1.0,
            seed: 1,
            n_symbols: 100_000,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        self.rrc_spec().validate()?;
        if self.l_d == 0 || self.l_eq == 0 {
            return Err(invalid!("l_d and l_eq must be positive"));
        }
        if self.internal_rate == 0
            || !self.internal_rate.is_multiple_of(self.l_u)
            || !self.internal_rate.is_multiple_of(self.l_d)
        {
            return Err(invalid!(
                "internal rate {} must be a multiple of l_u = {} and l_d = {}",
                self.internal_rate,
                self.l_u,
                self.l_d
            ));
        }
        if !(self.sigma_s2 > 0.0 && self.sigma_s2.is_finite()) {
            return Err(invalid!("symbol power must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid!("channel gain must be positive"));
        }
        if self.lpf && !(self.lpf_cutoff > 0.0 && self.lpf_cutoff < self.internal_rate as f64 / 2.0) {
            return Err(invalid!("LPF cutoff {} outside (0, {})", self.lpf_cutoff, self.internal_rate / 2));
        }
        Ok(())
    }

    pub fn rrc_spec(&self) -> RrcSpec {
        RrcSpec { rho: self.rho, delta_n: self.delta_n, l_u: self.l_u, length: self.l_ps }
    }

    /// Unit-energy RRC scaled by `sqrt(l_u)`, so the DAC input has power
    /// `sigma_s2` independent of the oversampling factor.
    pub fn pulse_shaper(&self) -> Result<FirFilter> {
        Ok(design_rrc(&self.rrc_spec())?.scaled((self.l_u as f64).sqrt()))
    }

    /// The TX/RX low-pass filter at the internal rate, if enabled.
    pub fn lpf(&self) -> Result<Option<IirFilter>> {
        if self.lpf {
            design_butterworth4(self.lpf_cutoff, self.internal_rate).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Symbols dropped at each end of a block: the combined span of pulse
    /// shaper, analog response and equalizer.
    pub fn transient_symbols(&self, analog_len: usize) -> usize {
        let span = (self.l_ps + 1) as f64 / self.l_u as f64
            + analog_len as f64 / self.internal_rate as f64
            + self.l_eq as f64 / self.l_d as f64;
        span.ceil() as usize + 1
    }
}

/// Bit and symbol error counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorCounts {
    pub bit_errors: u64,
    pub bits: u64,
    pub symbol_errors: u64,
    pub symbols: u64,
}

impl ErrorCounts {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.symbol_errors as f64 / self.symbols as f64
        }
    }
}

impl core::ops::AddAssign for ErrorCounts {
    fn add_assign(&mut self, o: Self) {
        self.bit_errors += o.bit_errors;
        self.bits += o.bits;
        self.symbol_errors += o.symbol_errors;
        self.symbols += o.symbols;
    }
}

/// Signals of one block at every stage of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Stages {
    pub symbols: ComplexSignal,
    /// Pulse-shaper output (DAC input).
    pub y: ComplexSignal,
    /// DAC output.
    pub y_q: ComplexSignal,
    /// TX LPF output at the internal rate.
    pub y_t: ComplexSignal,
    /// ADC input.
    pub x: ComplexSignal,
    /// ADC output.
    pub x_q: ComplexSignal,
    /// Equalizer output at the symbol rate, aligned with `symbols`
    /// (zero where the window leaves the block).
    pub s_hat: ComplexSignal,
}

/// Outcome of [`run_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    pub ber: f64,
    pub n_bit_errors: u64,
    pub n_bits: u64,
    pub n_symbol_errors: u64,
    pub n_symbols: u64,
    /// Measured transmit power.
    pub p_t: f64,
    pub snr_db: f64,
    /// Noise power per symbol-rate bandwidth, `N_0 / T_s`.
    pub sigma_n2: f64,
    /// Stages of the first batch, when requested.
    pub stages: Option<Stages>,
}

/// Gray-mapped QPSK: bit 0 on the in-phase rail, bit 1 on quadrature.
fn qpsk(bits: u8, amp: f64) -> Complex64 {
    let re = if bits & 1 == 0 { amp } else { -amp };
    let im = if bits & 2 == 0 { amp } else { -amp };
    Complex64::new(re, im)
}

fn decide(z: Complex64) -> u8 {
    (z.re < 0.0) as u8 | (((z.im < 0.0) as u8) << 1)
}

fn batch_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Filters and equalizer prepared for one configuration and noise level.
///
/// Batches are independent: batch `b` draws from stream `b` of a ChaCha
/// generator keyed by the seed, so results can be reduced in any order.
#[derive(Debug, Clone)]
pub struct LinkSimulator {
    config: LinkConfig,
    pulse: FirFilter,
    lpf: Option<IirFilter>,
    analog: AnalogResponse,
    equalizer: Option<Equalizer>,
    sigma_n2: f64,
    transient: usize,
}

impl LinkSimulator {
    /// Transmit-side simulator without equalizer or noise.
    pub fn transmitter(config: &LinkConfig) -> Result<Self> {
        config.validate()?;
        let pulse = config.pulse_shaper()?;
        let lpf = config.lpf()?;
        let analog = derive_analog_response(config, lpf.as_ref(), lpf.as_ref())?;
        let transient = config.transient_symbols(analog.signal.len());
        Ok(Self { config: config.clone(), pulse, lpf, analog, equalizer: None, sigma_n2: 0.0, transient })
    }

    /// Full-link simulator for noise power `sigma_n2` with the MMSE
    /// equalizer designed for that noise level.
    pub fn new(config: &LinkConfig, sigma_n2: f64) -> Result<Self> {
        let mut sim = Self::transmitter(config)?;
        let cs = build_covariance_set(config, &sim.pulse, &sim.analog, sigma_n2)?;
        sim.equalizer = Some(solve_mmse(&cs, select_delay(&cs))?);
        sim.sigma_n2 = sigma_n2;
        Ok(sim)
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    pub fn equalizer(&self) -> Option<&Equalizer> {
        self.equalizer.as_ref()
    }

    pub fn analog(&self) -> &AnalogResponse {
        &self.analog
    }

    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }

    /// Symbols discarded at each end of a block.
    pub fn transient(&self) -> usize {
        self.transient
    }

    fn draw_symbols(&self, rng: &mut ChaCha8Rng, n: usize) -> (Vec<u8>, Vec<Complex64>) {
        let amp = (self.config.sigma_s2 / 2.0).sqrt();
        let mut bits = Vec::with_capacity(n);
        let mut word = 0u64;
        for k in 0..n {
            if k % 32 == 0 {
                word = rng.next_u64();
            }
            bits.push(((word >> (2 * (k % 32))) & 3) as u8);
        }
        let syms = bits.iter().map(|&b| qpsk(b, amp)).collect();
        (bits, syms)
    }

    /// DAC input, DAC output and TX LPF output for a symbol block.
    fn transmit(&self, symbols: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
        let l_u = self.config.l_u;
        let mut s_u = alloc::vec![Complex64::new(0.0, 0.0); symbols.len() * l_u];
        for (k, &s) in symbols.iter().enumerate() {
            s_u[k * l_u] = s;
        }
        let y = convolve(&s_u, self.pulse.taps());
        let y_q: Vec<Complex64> = if self.config.quantize_tx {
            y.iter().map(|&z| sign_1bit(z)).collect()
        } else {
            y.clone()
        };
        let hold = self.analog.hold();
        let mut y_t: Vec<Complex64> = y_q.iter().flat_map(|&v| core::iter::repeat_n(v, hold)).collect();
        if let Some(g) = &self.lpf {
            g.filter_in_place(&mut y_t);
        }
        (y, y_q, y_t)
    }

    /// Transmit-power estimate from a block of `n_symbols` counted symbols
    /// (transients excluded) drawn from `stream`.
    pub fn transmit_power(&self, n_symbols: usize, stream: u64) -> f64 {
        let y_t = self.transmit_block(n_symbols, stream);
        crate::dsp::mean_power(y_t.samples())
    }

    /// TX LPF output for `n_symbols` symbols with block-edge transients
    /// removed.
    pub fn transmit_block(&self, n_symbols: usize, stream: u64) -> ComplexSignal {
        let mut rng = batch_rng(self.config.seed, stream);
        let (_, syms) = self.draw_symbols(&mut rng, n_symbols + 2 * self.transient);
        let (_, _, y_t) = self.transmit(&syms);
        let r = self.config.internal_rate;
        let start = self.transient * r;
        let end = (self.transient + n_symbols) * r;
        ComplexSignal::from_parts(y_t[start..end].to_vec(), r)
    }

    /// Simulates batch `index` with `n_symbols` counted symbols.
    pub fn run_batch(&self, index: u64, n_symbols: usize) -> ErrorCounts {
        self.run_batch_inner(index, n_symbols, false).0
    }

    fn run_batch_inner(&self, index: u64, n_symbols: usize, keep: bool) -> (ErrorCounts, Option<Stages>) {
        let eq = self.equalizer.as_ref().expect("simulator built without equalizer");
        let cfg = &self.config;
        let mut rng = batch_rng(cfg.seed, index);
        let total = n_symbols + 2 * self.transient;
        let (bits, syms) = self.draw_symbols(&mut rng, total);
        let (y, y_q, mut r) = self.transmit(&syms);
        let y_t = keep.then(|| r.clone());

        let gain = cfg.alpha.sqrt();
        let noise_std = (self.sigma_n2 * cfg.internal_rate as f64 / 2.0).sqrt();
        for v in r.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v = *v * gain + Complex64::new(re, im) * noise_std;
        }
        if let Some(g) = &self.lpf {
            g.filter_in_place(&mut r);
        }
        let decim = self.analog.decimation();
        let x: Vec<Complex64> = r.iter().step_by(decim).copied().collect();
        let x_q: Vec<Complex64> = if cfg.quantize_rx {
            x.iter().map(|&z| sign_1bit(z)).collect()
        } else {
            x.clone()
        };

        let mut counts = ErrorCounts::default();
        let mut s_hat = keep.then(|| alloc::vec![Complex64::new(0.0, 0.0); total]);
        for m in self.transient..self.transient + n_symbols {
            let Some(est) = eq.estimate(&x_q, m as isize) else {
                continue;
            };
            if let Some(v) = s_hat.as_mut() {
                v[m] = est;
            }
            let diff = (decide(est) ^ bits[m]) as u32;
            counts.bit_errors += diff.count_ones() as u64;
            counts.symbol_errors += (diff != 0) as u64;
            counts.bits += 2;
            counts.symbols += 1;
        }
        let stages = s_hat.map(|s_hat| Stages {
            symbols: ComplexSignal::from_parts(syms, 1),
            y: ComplexSignal::from_parts(y, cfg.l_u),
            y_q: ComplexSignal::from_parts(y_q, cfg.l_u),
            y_t: ComplexSignal::from_parts(y_t.unwrap_or_default(), cfg.internal_rate),
            x: ComplexSignal::from_parts(x, cfg.l_d),
            x_q: ComplexSignal::from_parts(x_q, cfg.l_d),
            s_hat: ComplexSignal::from_parts(s_hat, 1),
        });
        (counts, stages)
    }
}

/// Mean `|y_t|²` over a calibration run of [`CALIBRATION_SYMBOLS`] symbols.
pub fn measure_transmit_power(config: &LinkConfig, seed: u64) -> Result<f64> {
    let cfg = LinkConfig { seed, ..config.clone() };
    let sim = LinkSimulator::transmitter(&cfg)?;
    Ok(sim.transmit_power(CALIBRATION_SYMBOLS, CALIBRATION_STREAM))
}

/// Welch PSD of the TX LPF output `y_t` over `n_symbols` symbols (rate
/// `R/T_s`, frequencies in `1/T_s`), using the first Monte Carlo stream.
pub fn transmit_spectrum(config: &LinkConfig, n_symbols: usize, segment_len: usize) -> Result<SpectrumEstimate> {
    let sim = LinkSimulator::transmitter(config)?;
    welch_psd(&sim.transmit_block(n_symbols, 0), segment_len, DEFAULT_OVERLAP)
}

/// `σ_n² = α P_T / SNR`; zero for an infinite SNR.
pub fn noise_power(alpha: f64, p_t: f64, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        alpha * p_t / db_to_linear(snr_db)
    }
}

/// Runs `config.n_symbols` symbols at `snr_db` (SNR = α P_T / σ_n²).
/// `snr_db = +inf` disables the noise.
pub fn run_chain(config: &LinkConfig, snr_db: f64, seed: u64) -> Result<LinkResult> {
    run_chain_with(config, snr_db, seed, false)
}

/// [`run_chain`], optionally retaining the signals of the first batch.
pub fn run_chain_with(config: &LinkConfig, snr_db: f64, seed: u64, keep_stages: bool) -> Result<LinkResult> {
    let cfg = LinkConfig { seed, ..config.clone() };
    let tx = LinkSimulator::transmitter(&cfg)?;
    if cfg.n_symbols < 2 * tx.transient() {
        return Err(invalid!(
            "{} symbols do not cover the {}-symbol filter spans",
            cfg.n_symbols,
            2 * tx.transient()
        ));
    }
    if snr_db.is_nan() {
        return Err(invalid!("SNR is NaN"));
    }
    let p_t = tx.transmit_power(CALIBRATION_SYMBOLS, CALIBRATION_STREAM);
    let sigma_n2 = noise_power(cfg.alpha, p_t, snr_db);
    let sim = LinkSimulator::new(&cfg, sigma_n2)?;

    let mut counts = ErrorCounts::default();
    let mut stages = None;
    let mut remaining = cfg.n_symbols;
    let mut index = 0u64;
    while remaining > 0 {
        let n = remaining.min(BATCH_SYMBOLS);
        let (c, s) = sim.run_batch_inner(index, n, keep_stages && index == 0);
        counts += c;
        if s.is_some() {
            stages = s;
        }
        remaining -= n;
        index += 1;
    }
    Ok(LinkResult {
        ber: counts.ber(),
        n_bit_errors: counts.bit_errors,
        n_bits: counts.bits,
        n_symbol_errors: counts.symbol_errors,
        n_symbols: counts.symbols,
        p_t,
        snr_db,
        sigma_n2,
        stages,
    })
}

/// When an adaptive BER estimate stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Stop once this many bit errors are observed.
    pub min_errors: u64,
    /// Hard cap on simulated symbols.
    pub max_symbols: u64,
    /// Stop once this many bits were simulated; with fewer than
    /// `min_errors` errors by then the BER is far below the target.
    pub max_bits: u64,
}

impl StopRule {
    pub fn for_target(target_ber: f64) -> Self {
        let min_errors = 200;
        Self {
            min_errors,
            max_symbols: 10_000_000,
            max_bits: (10.0 * min_errors as f64 / target_ber).ceil() as u64,
        }
    }

    pub fn done(&self, c: &ErrorCounts) -> bool {
        c.bit_errors >= self.min_errors || c.symbols >= self.max_symbols || c.bits >= self.max_bits
    }
}

/// One BER estimate of the required-SNR search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub counts: ErrorCounts,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.counts.ber()
    }
}

/// Adaptive BER estimate at `snr_db`: batches are added in order until
/// `rule` is satisfied.
pub fn estimate_ber(config: &LinkConfig, p_t: f64, snr_db: f64, rule: &StopRule) -> Result<BerPoint> {
    let sim = LinkSimulator::new(config, noise_power(config.alpha, p_t, snr_db))?;
    let mut counts = ErrorCounts::default();
    let mut index = 0;
    while !rule.done(&counts) {
        counts += sim.run_batch(index, BATCH_SYMBOLS);
        index += 1;
    }
    Ok(BerPoint { snr_db, counts })
}

/// Result of a required-SNR search.
#[derive(Debug, Clone, PartialEq)]
pub struct RequiredSnr {
    pub snr_db: f64,
    pub p_t: f64,
    /// Every evaluation in order, bracket checks first.
    pub evaluations: Vec<BerPoint>,
}

impl RequiredSnr {
    pub fn total_symbols(&self) -> u64 {
        self.evaluations.iter().map(|p| p.counts.symbols).sum()
    }

    pub fn total_errors(&self) -> u64 {
        self.evaluations.iter().map(|p| p.counts.bit_errors).sum()
    }
}

/// Lower and upper end of the SNR search bracket, in dB.
pub const SNR_BRACKET_DB: (f64, f64) = (-10.0, 30.0);

/// Standard deviations by which a BER may rise with SNR before the search
/// is aborted.
const MONOTONE_SIGMAS: f64 = 5.0;

fn check_monotone(points: &[BerPoint]) -> Result<()> {
    for a in points {
        for b in points {
            if a.snr_db < b.snr_db && b.ber() > a.ber() {
                let var = |p: &BerPoint| {
                    let n = p.counts.bits.max(1) as f64;
                    let q = p.ber().max(1.0 / n);
                    q * (1.0 - q) / n
                };
                let z = (b.ber() - a.ber()) / (var(a) + var(b)).sqrt();
                if z > MONOTONE_SIGMAS {
                    return Err(Error::NonMonotoneBer {
                        snr_lo_db: a.snr_db,
                        ber_lo: a.ber(),
                        snr_hi_db: b.snr_db,
                        ber_hi: b.ber(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Bisection for the SNR at which the BER crosses `target_ber`, using the
/// supplied BER estimator.
pub fn required_snr_with<F>(target_ber: f64, tol_db: f64, mut eval: F) -> Result<(f64, Vec<BerPoint>)>
where
    F: FnMut(f64) -> Result<BerPoint>,
{
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return Err(invalid!("target BER {target_ber} outside (0, 0.5)"));
    }
    if !(tol_db > 0.0) {
        return Err(invalid!("tolerance must be positive"));
    }
    let (mut lo, mut hi) = SNR_BRACKET_DB;
    let unreachable = |reason: String| Error::TargetUnreachable {
        target: target_ber,
        lo_db: SNR_BRACKET_DB.0,
        hi_db: SNR_BRACKET_DB.1,
        reason,
    };
    let mut points = Vec::new();
    let top = eval(hi)?;
    points.push(top);
    if top.ber() > target_ber {
        return Err(unreachable(alloc::format!("BER {:.3e} at the upper end", top.ber())));
    }
    let bottom = eval(lo)?;
    points.push(bottom);
    if bottom.ber() <= target_ber {
        return Err(unreachable(alloc::format!("BER {:.3e} already at the lower end", bottom.ber())));
    }
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        let p = eval(mid)?;
        points.push(p);
        check_monotone(&points)?;
        if p.ber() > target_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), points))
}

/// SNR (dB) at which the uncoded BER crosses `target_ber`, found by
/// bisection on [`SNR_BRACKET_DB`] to a bracket of width `tol_db`.
pub fn required_snr(config: &LinkConfig, target_ber: f64, tol_db: f64) -> Result<RequiredSnr> {
    let p_t = measure_transmit_power(config, config.seed)?;
    let rule = StopRule::for_target(target_ber);
    let (snr_db, evaluations) =
        required_snr_with(target_ber, tol_db, |snr| estimate_ber(config, p_t, snr, &rule))?;
    Ok(RequiredSnr { snr_db, p_t, evaluations })
}
