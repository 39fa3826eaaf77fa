//! CSV tables, the run manifest and gnuplot scripts.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! rerun with the same configuration reproduces every file byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Config, GridPoint, Mode};
use crate::experiments::{BerRow, ImpulseRow, PsdRow, RequiredSnrRow, RowCommon};
use crate::CliError;

/// Decimal text of a float (`NaN`, `inf` for non-finite values).
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes files below one output directory and remembers their names.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Files written so far, relative to the root, in write order.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn path(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        self.files.push(rel.to_string());
        Ok(path)
    }

    pub fn write_text(&mut self, rel: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(rel)?;
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    /// Writes a UTF-8 CSV with a header row.
    pub fn write_csv<I>(&mut self, rel: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(rel)?;
        let io = |e: csv::Error| {
            let kind = std::io::Error::other(e.to_string());
            CliError::io(&path, kind)
        };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }
}

/// `rho, delta_n, l_u, l_d` columns.
const KEY_COLUMNS: [&str; 4] = ["rho", "delta_n", "l_u", "l_d"];
/// Columns closing every row.
const TAIL_COLUMNS: [&str; 4] = ["n_symbols", "n_errors", "seed", "error"];

fn header(metrics: &[&'static str]) -> Vec<&'static str> {
    KEY_COLUMNS.iter().chain(metrics).chain(TAIL_COLUMNS.iter()).copied().collect()
}

fn row(c: &RowCommon, metrics: Vec<String>) -> Vec<String> {
    let p = c.point;
    let mut out = vec![num(p.rho), num(p.delta_n), p.l_u.to_string(), p.l_d.to_string()];
    out.extend(metrics);
    out.extend([c.n_symbols.to_string(), c.n_errors.to_string(), c.seed.to_string(), c.error.clone()]);
    out
}

/// File-name tag of a grid point.
pub fn point_tag(p: GridPoint) -> String {
    format!("rho{}_dn{}_lu{}_ld{}", num(p.rho), num(p.delta_n), p.l_u, p.l_d)
}

pub const REQUIRED_SNR_CSV: &str = "required_snr.csv";
pub const BER_CSV: &str = "ber.csv";
pub const PSD_SUMMARY_CSV: &str = "psd_summary.csv";
pub const IMPULSE_SUMMARY_CSV: &str = "impulse_summary.csv";
pub const MANIFEST: &str = "manifest.json";

pub fn write_required_snr(out: &mut OutputDir, rows: &[RequiredSnrRow]) -> Result<(), CliError> {
    let h = header(&["required_snr_db", "b_09375"]);
    out.write_csv(
        REQUIRED_SNR_CSV,
        &h,
        rows.iter().map(|r| row(&r.common, vec![num(r.required_snr_db), num(r.b_09375)])),
    )
}

pub fn write_ber(out: &mut OutputDir, rows: &[BerRow]) -> Result<(), CliError> {
    let h = header(&["snr_db", "ber", "ser"]);
    out.write_csv(BER_CSV, &h, rows.iter().map(|r| row(&r.common, vec![num(r.snr_db), num(r.ber), num(r.ser)])))
}

/// Summary table plus one `freq, psd_db` file per successful point, named
/// by `name(point)`. Returns the PSD file names in row order.
pub fn write_psd(
    out: &mut OutputDir,
    rows: &[PsdRow],
    name: impl Fn(GridPoint) -> String,
) -> Result<Vec<(GridPoint, String)>, CliError> {
    let h = header(&["b_09375", "stopband_db"]);
    out.write_csv(
        PSD_SUMMARY_CSV,
        &h,
        rows.iter().map(|r| row(&r.common, vec![num(r.b_09375), num(r.stopband_db)])),
    )?;
    let mut files = Vec::new();
    for r in rows {
        let Some(s) = &r.spectrum else { continue };
        let file = name(r.common.point);
        let db = s.psd_db();
        out.write_csv(&file, &["freq", "psd_db"], s.freqs.iter().zip(&db).map(|(f, p)| vec![num(*f), num(*p)]))?;
        files.push((r.common.point, file));
    }
    Ok(files)
}

/// Summary table plus one `n, t, tap` file per successful point; `t` is the
/// sampling instant in symbol periods.
pub fn write_impulse(
    out: &mut OutputDir,
    cfg: &Config,
    rows: &[ImpulseRow],
    name: impl Fn(GridPoint) -> String,
) -> Result<Vec<(GridPoint, String)>, CliError> {
    let h = header(&["n_dominant", "sidelobe_db"]);
    out.write_csv(
        IMPULSE_SUMMARY_CSV,
        &h,
        rows.iter().map(|r| row(&r.common, vec![r.n_dominant.to_string(), num(r.sidelobe_db)])),
    )?;
    let mut files = Vec::new();
    for r in rows.iter().filter(|r| !r.common.failed()) {
        let p = r.common.point;
        let file = name(p);
        let half = cfg.l_ps as f64 / 2.0;
        out.write_csv(
            &file,
            &["n", "t", "tap"],
            r.taps.iter().enumerate().map(|(n, &tap)| {
                let t = (n as f64 - half + p.delta_n) / p.l_u as f64;
                vec![n.to_string(), num(t), num(tap)]
            }),
        )?;
        files.push((p, file));
    }
    Ok(files)
}

/// Contents of `manifest.json`.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub mode: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub grid_points: usize,
    pub failed_points: usize,
    pub files: Vec<String>,
    /// Resolved configuration without output location and thread count.
    pub config: serde_json::Value,
}

pub fn write_manifest(out: &mut OutputDir, m: &Manifest) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(m).expect("manifest serializes");
    text.push('\n');
    out.write_text(MANIFEST, &text)
}

/// Resolved configuration as recorded in the manifest.
pub fn manifest_config(cfg: &Config) -> serde_json::Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(o) = v.as_object_mut() {
        o.remove("output_dir");
        o.remove("jobs");
    }
    v
}

fn label(p: GridPoint) -> String {
    format!("rho={} dn={} lu={} ld={}", num(p.rho), num(p.delta_n), p.l_u, p.l_d)
}

/// File name of the gnuplot script of `mode`.
pub fn script_name(mode: Mode) -> String {
    format!("plot_{}.gp", mode.name())
}

fn script_head(mode: Mode, png: &str, title: &str) -> String {
    format!(
        "# gnuplot script; run from this directory: gnuplot {script}\n\
         set datafile separator ','\n\
         set terminal pngcairo size 900,600\n\
         set output '{png}'\n\
         set key outside right\n\
         set grid\n\
         set title '{title}'\n",
        script = script_name(mode),
    )
}

/// gnuplot script plotting the results of `mode`. `files` lists the
/// per-point data files of PSD and impulse-response runs.
pub fn gnuplot_script(mode: Mode, grid: &[GridPoint], files: &[(GridPoint, String)]) -> String {
    let mut s = String::new();
    match mode {
        Mode::RequiredSnr => {
            s += &script_head(mode, "required_snr.png", "Required SNR and 93.75% bandwidth vs fractional delay");
            s += "set multiplot layout 2,1\nset xlabel 'delta_n'\n";
            for (col, ylabel) in [(5, "required SNR [dB]"), (6, "B_0.9375 [1/T_s]")] {
                s += &format!("set ylabel '{ylabel}'\n");
                let mut series: Vec<(f64, usize, usize)> = Vec::new();
                for p in grid {
                    if !series.contains(&(p.rho, p.l_u, p.l_d)) {
                        series.push((p.rho, p.l_u, p.l_d));
                    }
                }
                let plots: Vec<String> = series
                    .iter()
                    .map(|(rho, lu, ld)| {
                        format!(
                            "'{REQUIRED_SNR_CSV}' skip 1 using 2:(($1=={r} && $3=={lu} && $4=={ld}) ? ${col} : 1/0) \
                             with linespoints title 'rho={r} lu={lu} ld={ld}'",
                            r = num(*rho)
                        )
                    })
                    .collect();
                s += &format!("plot {}\n", plots.join(", \\\n     "));
            }
            s += "unset multiplot\n";
        }
        Mode::BerCurve => {
            s += &script_head(mode, "ber.png", "Uncoded BER");
            s += "set logscale y\nset format y '10^{%L}'\nset xlabel 'SNR [dB]'\nset ylabel 'BER'\n";
            let plots: Vec<String> = grid
                .iter()
                .map(|p| {
                    format!(
                        "'{BER_CSV}' skip 1 using 5:(($1=={} && $2=={} && $3=={} && $4=={}) ? $6 : 1/0) \
                         with linespoints title '{}'",
                        num(p.rho),
                        num(p.delta_n),
                        p.l_u,
                        p.l_d,
                        label(*p)
                    )
                })
                .collect();
            s += &format!("plot {}\n", plots.join(", \\\n     "));
        }
        Mode::Psd => {
            s += &script_head(mode, "psd.png", "PSD of the transmitted signal");
            s += "set xlabel 'f T_s'\nset ylabel 'PSD [dB]'\n";
            let plots: Vec<String> = files
                .iter()
                .map(|(p, f)| format!("'{f}' skip 1 using 1:2 with lines title '{}'", label(*p)))
                .collect();
            s += &format!("plot {}\n", plots.join(", \\\n     "));
        }
        Mode::ImpulseResponse => {
            s += &script_head(mode, "impulse.png", "Pulse-shaper impulse response");
            s += "set xlabel 't / T_s'\nset ylabel 'tap'\n";
            let plots: Vec<String> = files
                .iter()
                .map(|(p, f)| format!("'{f}' skip 1 using 2:3 with impulses title '{}'", label(*p)))
                .collect();
            s += &format!("plot {}\n", plots.join(", \\\n     "));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_round_trips() {
        for v in [0.1, 1.0, 1e-3, 12.3046875, -0.0, 1.0 / 3.0] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn rows_carry_the_rerun_columns() {
        let h = header(&["x"]);
        assert_eq!(h, ["rho", "delta_n", "l_u", "l_d", "x", "n_symbols", "n_errors", "seed", "error"]);
        let c = RowCommon {
            point: GridPoint { rho: 0.5, delta_n: 0.25, l_u: 4, l_d: 2 },
            n_symbols: 10,
            n_errors: 3,
            seed: 7,
            error: String::new(),
        };
        assert_eq!(row(&c, vec!["1".into()]), ["0.5", "0.25", "4", "2", "1", "10", "3", "7", ""]);
    }

    #[test]
    fn csv_quotes_error_text() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write_csv("t.csv", &["a", "error"], [vec!["NaN".into(), "bad, \"x\"".into()]]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "a,error\nNaN,\"bad, \"\"x\"\"\"\n");
        assert_eq!(out.files(), ["t.csv"]);
    }
}
