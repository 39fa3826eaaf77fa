//! Experiment configuration: a flat TOML file merged with command-line
//! overrides.

use std::path::{Path, PathBuf};

use onebit_core::link::LinkConfig;
use onebit_core::quant_stats::ArcsineMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// What a sweep measures at every grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    RequiredSnr,
    BerCurve,
    Psd,
    ImpulseResponse,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::RequiredSnr => "required_snr",
            Mode::BerCurve => "ber_curve",
            Mode::Psd => "psd",
            Mode::ImpulseResponse => "impulse_response",
        }
    }
}

/// Arcsine-law variant used in the equalizer design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Arcsine {
    Exact,
    Linearized,
}

impl From<Arcsine> for ArcsineMode {
    fn from(a: Arcsine) -> Self {
        match a {
            Arcsine::Exact => ArcsineMode::Exact,
            Arcsine::Linearized => ArcsineMode::Linearized,
        }
    }
}

/// Every key accepted in a configuration file. Missing keys take the
/// defaults below; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub mode: Mode,
    /// Sweep grid; an empty list means "the single value of `rho`" etc.
    pub rho_list: Vec<f64>,
    pub delta_n_list: Vec<f64>,
    pub l_u_list: Vec<usize>,
    pub l_d_list: Vec<usize>,
    /// Target BER of the required-SNR search.
    pub target_ber: f64,
    /// Final bisection bracket width in dB.
    pub tol_db: f64,
    /// SNR points (dB) of BER curves.
    pub snr_db_list: Vec<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    /// Whether gnuplot scripts are written next to the CSVs.
    pub plots: bool,

    pub rho: f64,
    pub delta_n: f64,
    pub l_u: usize,
    pub l_d: usize,
    pub l_ps: usize,
    pub l_eq: usize,
    pub sigma_s2: f64,
    pub alpha: f64,
    pub internal_rate: usize,
    pub quantize_tx: bool,
    pub quantize_rx: bool,
    pub arcsine: Arcsine,
    pub lpf: bool,
    pub lpf_cutoff: f64,
    /// Symbols per point of BER curves.
    pub n_symbols: usize,
    /// Symbols of the transmitted block used for PSD estimates.
    pub psd_symbols: usize,
    /// Welch segment length in internal-rate samples.
    pub segment_len: usize,
}

impl Default for Config {
    fn default() -> Self {
        let link = LinkConfig::default();
        Self {
            mode: Mode::RequiredSnr,
            rho_list: Vec::new(),
            delta_n_list: Vec::new(),
            l_u_list: Vec::new(),
            l_d_list: Vec::new(),
            target_ber: 1e-3,
            tol_db: 0.1,
            snr_db_list: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
            output_dir: PathBuf::from("out"),
            seed: link.seed,
            jobs: 0,
            plots: true,
            rho: link.rho,
            delta_n: link.delta_n,
            l_u: link.l_u,
            l_d: link.l_d,
            l_ps: link.l_ps,
            l_eq: link.l_eq,
            sigma_s2: link.sigma_s2,
            alpha: link.alpha,
            internal_rate: link.internal_rate,
            quantize_tx: link.quantize_tx,
            quantize_rx: link.quantize_rx,
            arcsine: Arcsine::Exact,
            lpf: link.lpf,
            lpf_cutoff: link.lpf_cutoff,
            n_symbols: link.n_symbols,
            psd_symbols: 40_000,
            segment_len: onebit_core::spectrum::DEFAULT_SEGMENT,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub quantize_tx: Option<bool>,
    pub quantize_rx: Option<bool>,
    pub arcsine: Option<Arcsine>,
}

/// One point of the (ρ, Δn, ℓ_u, ℓ_d) grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub rho: f64,
    pub delta_n: f64,
    pub l_u: usize,
    pub l_d: usize,
}

impl Config {
    /// Parses TOML text; syntax errors and unknown keys are config errors.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a configuration file; unreadable files are I/O errors.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.output_dir = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.jobs {
            self.jobs = v;
        }
        if let Some(v) = o.quantize_tx {
            self.quantize_tx = v;
        }
        if let Some(v) = o.quantize_rx {
            self.quantize_rx = v;
        }
        if let Some(v) = o.arcsine {
            self.arcsine = v;
        }
    }

    /// Chain parameters of one grid point.
    pub fn link(&self, p: GridPoint) -> LinkConfig {
        LinkConfig {
            rho: p.rho,
            delta_n: p.delta_n,
            l_u: p.l_u,
            l_d: p.l_d,
            l_ps: self.l_ps,
            l_eq: self.l_eq,
            sigma_s2: self.sigma_s2,
            alpha: self.alpha,
            internal_rate: self.internal_rate,
            quantize_tx: self.quantize_tx,
            quantize_rx: self.quantize_rx,
            arcsine: self.arcsine.into(),
            lpf: self.lpf,
            lpf_cutoff: self.lpf_cutoff,
            seed: self.seed,
            n_symbols: self.n_symbols,
        }
    }

    /// The single point given by the scalar keys.
    pub fn base_point(&self) -> GridPoint {
        GridPoint { rho: self.rho, delta_n: self.delta_n, l_u: self.l_u, l_d: self.l_d }
    }

    /// Grid points in row-major order: ρ outermost, then Δn, ℓ_u, ℓ_d.
    pub fn grid(&self) -> Vec<GridPoint> {
        fn or<T: Copy>(list: &[T], v: T) -> Vec<T> {
            if list.is_empty() {
                vec![v]
            } else {
                list.to_vec()
            }
        }
        let mut out = Vec::new();
        for &rho in &or(&self.rho_list, self.rho) {
            for &delta_n in &or(&self.delta_n_list, self.delta_n) {
                for &l_u in &or(&self.l_u_list, self.l_u) {
                    for &l_d in &or(&self.l_d_list, self.l_d) {
                        out.push(GridPoint { rho, delta_n, l_u, l_d });
                    }
                }
            }
        }
        out
    }

    /// Checks every grid point and the sweep-level keys.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.target_ber > 0.0 && self.target_ber < 0.5) {
            return bad(format!("target_ber {} outside (0, 0.5)", self.target_ber));
        }
        if !(self.tol_db > 0.0) {
            return bad(format!("tol_db {} must be positive", self.tol_db));
        }
        if self.snr_db_list.iter().any(|s| s.is_nan()) {
            return bad("snr_db_list contains NaN".into());
        }
        if !self.segment_len.is_power_of_two() {
            return bad(format!("segment_len {} must be a power of two", self.segment_len));
        }
        for p in self.grid() {
            self.link(p).validate().map_err(|e| CliError::Config(format!("grid point {p:?}: {e}")))?;
        }
        Ok(())
    }

    /// Keys that influence the results of `mode`. Output location, thread
    /// count and plot emission never do.
    fn semantic_keys(mode: Mode) -> &'static [&'static str] {
        match mode {
            Mode::RequiredSnr => &[
                "rho_list", "delta_n_list", "l_u_list", "l_d_list", "rho", "delta_n", "l_u", "l_d", "l_ps",
                "l_eq", "sigma_s2", "alpha", "internal_rate", "quantize_tx", "quantize_rx", "arcsine", "lpf",
                "lpf_cutoff", "seed", "target_ber", "tol_db", "psd_symbols", "segment_len",
            ],
            Mode::BerCurve => &[
                "rho_list", "delta_n_list", "l_u_list", "l_d_list", "rho", "delta_n", "l_u", "l_d", "l_ps",
                "l_eq", "sigma_s2", "alpha", "internal_rate", "quantize_tx", "quantize_rx", "arcsine", "lpf",
                "lpf_cutoff", "seed", "snr_db_list", "n_symbols",
            ],
            Mode::Psd => &[
                "rho_list", "delta_n_list", "l_u_list", "l_d_list", "rho", "delta_n", "l_u", "l_d", "l_ps", "sigma_s2",
                "internal_rate", "quantize_tx", "lpf", "lpf_cutoff", "seed", "psd_symbols", "segment_len",
            ],
            Mode::ImpulseResponse => {
                &["rho_list", "delta_n_list", "l_u_list", "l_d_list", "rho", "delta_n", "l_u", "l_d", "l_ps"]
            }
        }
    }

    /// SHA-256 over the canonical JSON of the keys that influence the
    /// results of `mode` (sorted keys, shortest round-trip floats).
    pub fn hash(&self, mode: Mode) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let all = value.as_object().expect("config is an object");
        let keys = Self::semantic_keys(mode);
        let subset: serde_json::Map<String, serde_json::Value> =
            all.iter().filter(|(k, _)| keys.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
        let mut h = Sha256::new();
        h.update(mode.name().as_bytes());
        h.update(serde_json::to_vec(&subset).expect("json"));
        format!("{:x}", h.finalize())
    }
}
