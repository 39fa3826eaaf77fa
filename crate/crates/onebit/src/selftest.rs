//! Fast end-to-end consistency checks (`onebit selftest`).

use std::fmt;

use onebit_core::dsp::{design_rrc, downsample, upsample, ComplexSignal};
use onebit_core::equalizer::{build_covariance_set, derive_analog_response};
use onebit_core::link::{run_chain, run_chain_with, transmit_spectrum, LinkConfig};
use onebit_core::special::q_function;
use onebit_core::Complex64;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, f: impl FnOnce() -> onebit_core::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn two_tap() -> LinkConfig {
    LinkConfig { rho: 1.0, delta_n: 0.5, l_u: 2, l_d: 2, ..LinkConfig::default() }
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("two-tap pulse shaper", || {
            let h = design_rrc(&two_tap().rrc_spec())?;
            let t = h.taps();
            let (a, b) = (t[63], t[64]);
            let rest = t.iter().enumerate().filter(|(i, _)| *i != 63 && *i != 64).fold(0.0f64, |m, (_, v)| m.max(v.abs()));
            let rest_db = 20.0 * (rest / a.abs()).log10();
            Ok(((a - b).abs() <= 1e-6 * a.abs() && rest_db <= -30.0, format!("taps {a:.6} {b:.6}, others {rest_db:.1} dB")))
        }),
        check("C_xQ diagonal", || {
            let cfg = LinkConfig { rho: 0.3, delta_n: 0.2, l_u: 4, l_d: 4, ..LinkConfig::default() };
            let lpf = cfg.lpf()?;
            let analog = derive_analog_response(&cfg, lpf.as_ref(), lpf.as_ref())?;
            let cs = build_covariance_set(&cfg, &cfg.pulse_shaper()?, &analog, 0.1)?;
            let ok = cs.c_xq.diagonal().iter().all(|d| *d == 2.0);
            Ok((ok, format!("{} entries exactly 2: {ok}", cs.c_xq.dim())))
        }),
        check("downsample(upsample(x))", || {
            let x: Vec<Complex64> = (0..97).map(|k| Complex64::new(k as f64, -(k as f64).sqrt())).collect();
            let x = ComplexSignal::new(x, 1)?;
            let y = downsample(&upsample(&x, 4)?, 4, 0)?;
            Ok((y == x, format!("{} samples", x.len())))
        }),
        check("Parseval", || {
            let s = transmit_spectrum(&LinkConfig::default(), 4_000, 1024)?;
            let rel = (s.integrated_power() / s.total_power - 1.0).abs();
            Ok((rel < 0.01, format!("relative error {rel:.2e}")))
        }),
        check("seeded rerun", || {
            let cfg = LinkConfig { n_symbols: 10_000, ..LinkConfig::default() };
            let a = run_chain_with(&cfg, 8.0, 3, true)?;
            let b = run_chain_with(&cfg, 8.0, 3, true)?;
            Ok((a == b, format!("{} bit errors both runs", a.n_bit_errors)))
        }),
        check("noiseless two-tap link", || {
            let r = run_chain(&LinkConfig { n_symbols: 50_000, ..two_tap() }, f64::INFINITY, 1)?;
            Ok((r.n_bit_errors == 0, format!("{} errors in {} bits", r.n_bit_errors, r.n_bits)))
        }),
        check("unquantized BER vs Q-function", || {
            let cfg = LinkConfig {
                rho: 0.1,
                l_u: 4,
                l_d: 4,
                quantize_tx: false,
                quantize_rx: false,
                n_symbols: 200_000,
                ..LinkConfig::default()
            };
            let r = run_chain(&cfg, 8.0, 1)?;
            let q = q_function((r.p_t / r.sigma_n2).sqrt());
            let ratio = r.ber / q;
            Ok(((1.0 / 1.3..=1.3).contains(&ratio), format!("BER {:.3e}, Q {:.3e}", r.ber, q)))
        }),
    ]
}
