//! Per-grid-point computations and the bounded worker pool.
//!
//! Every function returns a row even when the simulation fails: the metric
//! becomes NaN and the error text is kept, so a sweep never loses the
//! points that did complete.

use onebit_core::dsp::design_rrc;
use onebit_core::link::{required_snr, run_chain, transmit_spectrum};
use onebit_core::spectrum::{fractional_bandwidth, SpectrumEstimate, OCCUPIED_FRACTION};
use rayon::prelude::*;

use crate::config::{Config, GridPoint};
use crate::CliError;

/// Runs `f` over `items` on at most `jobs` threads (0 = all cores) and
/// returns the results in input order, whatever the completion order.
pub fn run_ordered<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

/// Fields shared by every output row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCommon {
    pub point: GridPoint,
    pub n_symbols: u64,
    pub n_errors: u64,
    pub seed: u64,
    /// Empty on success.
    pub error: String,
}

impl RowCommon {
    fn new(point: GridPoint, seed: u64) -> Self {
        Self { point, n_symbols: 0, n_errors: 0, seed, error: String::new() }
    }

    fn fail(&mut self, e: impl std::fmt::Display) {
        if !self.error.is_empty() {
            self.error.push_str("; ");
        }
        self.error.push_str(&e.to_string());
    }

    pub fn failed(&self) -> bool {
        !self.error.is_empty()
    }
}

/// Required SNR at the target BER plus the occupied bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct RequiredSnrRow {
    pub common: RowCommon,
    pub required_snr_db: f64,
    pub b_09375: f64,
}

pub fn required_snr_point(cfg: &Config, p: GridPoint) -> RequiredSnrRow {
    let link = cfg.link(p);
    let mut common = RowCommon::new(p, cfg.seed);
    let required_snr_db = match required_snr(&link, cfg.target_ber, cfg.tol_db) {
        Ok(r) => {
            common.n_symbols = r.total_symbols();
            common.n_errors = r.total_errors();
            r.snr_db
        }
        Err(e) => {
            common.fail(e);
            f64::NAN
        }
    };
    let b_09375 = match spectrum(cfg, p).and_then(|s| fractional_bandwidth(&s, OCCUPIED_FRACTION)) {
        Ok(b) => b,
        Err(e) => {
            common.fail(e);
            f64::NAN
        }
    };
    RequiredSnrRow { common, required_snr_db, b_09375 }
}

/// One point of a BER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    pub common: RowCommon,
    pub snr_db: f64,
    pub ber: f64,
    pub ser: f64,
}

pub fn ber_point(cfg: &Config, p: GridPoint, snr_db: f64) -> BerRow {
    let mut common = RowCommon::new(p, cfg.seed);
    match run_chain(&cfg.link(p), snr_db, cfg.seed) {
        Ok(r) => {
            common.n_symbols = r.n_symbols;
            common.n_errors = r.n_bit_errors;
            let ser = r.n_symbol_errors as f64 / r.n_symbols.max(1) as f64;
            BerRow { common, snr_db, ber: r.ber, ser }
        }
        Err(e) => {
            common.fail(e);
            BerRow { common, snr_db, ber: f64::NAN, ser: f64::NAN }
        }
    }
}

fn spectrum(cfg: &Config, p: GridPoint) -> onebit_core::Result<SpectrumEstimate> {
    transmit_spectrum(&cfg.link(p), cfg.psd_symbols, cfg.segment_len)
}

/// Transmit PSD summary; the spectrum itself is kept for the PSD file.
#[derive(Debug, Clone)]
pub struct PsdRow {
    pub common: RowCommon,
    pub b_09375: f64,
    pub stopband_db: f64,
    pub spectrum: Option<SpectrumEstimate>,
}

pub fn psd_point(cfg: &Config, p: GridPoint) -> PsdRow {
    let mut common = RowCommon::new(p, cfg.seed);
    common.n_symbols = cfg.psd_symbols as u64;
    match spectrum(cfg, p).and_then(|s| Ok((fractional_bandwidth(&s, OCCUPIED_FRACTION)?, s))) {
        Ok((b, s)) => PsdRow { common, b_09375: b, stopband_db: s.stopband_level_db(), spectrum: Some(s) },
        Err(e) => {
            common.fail(e);
            PsdRow { common, b_09375: f64::NAN, stopband_db: f64::NAN, spectrum: None }
        }
    }
}

/// Pulse-shaper taps and how many of them dominate.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseRow {
    pub common: RowCommon,
    /// Taps within 30 dB of the largest.
    pub n_dominant: usize,
    /// Largest tap outside the dominant set, relative to the largest, in dB.
    pub sidelobe_db: f64,
    pub taps: Vec<f64>,
}

/// Threshold separating dominant taps from the rest.
pub const DOMINANT_DB: f64 = -30.0;

pub fn impulse_point(cfg: &Config, p: GridPoint) -> ImpulseRow {
    let mut common = RowCommon::new(p, cfg.seed);
    let spec = cfg.link(p).rrc_spec();
    match design_rrc(&spec) {
        Ok(h) => {
            let taps = h.taps().to_vec();
            let peak = taps.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            let level = |t: f64| 20.0 * (t.abs() / peak).log10();
            let n_dominant = taps.iter().filter(|&&t| level(t) >= DOMINANT_DB).count();
            let sidelobe_db =
                taps.iter().map(|&t| level(t)).filter(|&l| l < DOMINANT_DB).fold(f64::NEG_INFINITY, f64::max);
            ImpulseRow { common, n_dominant, sidelobe_db, taps }
        }
        Err(e) => {
            common.fail(e);
            ImpulseRow { common, n_dominant: 0, sidelobe_db: f64::NAN, taps: Vec::new() }
        }
    }
}
