//! Command-line interface.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{Arcsine, Config, GridPoint, Mode, Overrides};
use crate::experiments::{ber_point, impulse_point, psd_point, required_snr_point, run_ordered};
use crate::output::{self, gnuplot_script, point_tag, Manifest, OutputDir};
use crate::{exit, selftest, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        s == Switch::On
    }
}

#[derive(Debug, Parser)]
#[command(name = "onebit", version, about = "Oversampled single-carrier links with 1-bit DAC and ADC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub quantize_tx: Option<Switch>,
    #[arg(long, global = true, value_enum)]
    pub quantize_rx: Option<Switch>,
    #[arg(long, global = true, value_enum)]
    pub arcsine: Option<Arcsine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the configured `mode` over the (rho, delta_n, l_u, l_d) grid.
    Sweep,
    /// BER at every SNR of `snr_db_list` for the configured point.
    Ber,
    /// Transmit PSD and occupied bandwidth for the configured point.
    Psd,
    /// Pulse-shaper taps for the configured point.
    Impulse,
    /// Quick internal consistency checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Ber => "ber",
            Command::Psd => "psd",
            Command::Impulse => "impulse",
            Command::Selftest => "selftest",
        }
    }
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            jobs: self.jobs,
            quantize_tx: self.quantize_tx.map(bool::from),
            quantize_rx: self.quantize_rx.map(bool::from),
            arcsine: self.arcsine,
        }
    }

    /// File configuration with the flags applied. Single-point commands
    /// ignore the grid lists.
    pub fn resolve(&self) -> Result<Config, CliError> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        cfg.apply(&self.overrides());
        match self.command {
            Command::Sweep | Command::Selftest => {}
            Command::Ber | Command::Psd | Command::Impulse => {
                cfg.rho_list.clear();
                cfg.delta_n_list.clear();
                cfg.l_u_list.clear();
                cfg.l_d_list.clear();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG_ERROR } else { exit::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    if cli.command == Command::Selftest {
        let checks = selftest::run_all();
        for c in &checks {
            println!("{c}");
        }
        let failed = checks.iter().filter(|c| !c.passed).count();
        println!("selftest: {} passed, {failed} failed", checks.len() - failed);
        return Ok(if failed == 0 { exit::SUCCESS } else { exit::PARTIAL_FAILURE });
    }
    let mut cfg = cli.resolve()?;
    cfg.mode = match cli.command {
        Command::Sweep => cfg.mode,
        Command::Ber => Mode::BerCurve,
        Command::Psd => Mode::Psd,
        Command::Impulse => Mode::ImpulseResponse,
        Command::Selftest => unreachable!("handled above"),
    };
    let mode = cfg.mode;
    let single = cli.command != Command::Sweep;
    let report = execute(&cfg, mode, single, cli.command.name())?;
    eprintln!(
        "{}: {} grid points, {} failed; results in {}",
        cli.command.name(),
        report.grid_points,
        report.failed_points,
        cfg.output_dir.display()
    );
    Ok(if report.failed_points == 0 { exit::SUCCESS } else { exit::PARTIAL_FAILURE })
}

/// Outcome of [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub grid_points: usize,
    pub failed_points: usize,
    pub files: Vec<String>,
}

/// Runs `mode` over the grid of `cfg` and writes all outputs to
/// `cfg.output_dir`. `single` selects the file names of the one-point
/// commands.
pub fn execute(cfg: &Config, mode: Mode, single: bool, command: &str) -> Result<Report, CliError> {
    let grid = cfg.grid();
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let named = |dir: &'static str| {
        move |p: GridPoint| if single { format!("{dir}.csv") } else { format!("{dir}/{dir}_{}.csv", point_tag(p)) }
    };
    let (failed, files) = match mode {
        Mode::RequiredSnr => {
            let rows = run_ordered(cfg.jobs, &grid, |&p| required_snr_point(cfg, p))?;
            output::write_required_snr(&mut out, &rows)?;
            (rows.iter().filter(|r| r.common.failed()).count(), Vec::new())
        }
        Mode::BerCurve => {
            let jobs: Vec<(GridPoint, f64)> =
                grid.iter().flat_map(|&p| cfg.snr_db_list.iter().map(move |&s| (p, s))).collect();
            let rows = run_ordered(cfg.jobs, &jobs, |&(p, s)| ber_point(cfg, p, s))?;
            output::write_ber(&mut out, &rows)?;
            (rows.iter().filter(|r| r.common.failed()).count(), Vec::new())
        }
        Mode::Psd => {
            let rows = run_ordered(cfg.jobs, &grid, |&p| psd_point(cfg, p))?;
            let files = output::write_psd(&mut out, &rows, named("psd"))?;
            (rows.iter().filter(|r| r.common.failed()).count(), files)
        }
        Mode::ImpulseResponse => {
            let rows = run_ordered(cfg.jobs, &grid, |&p| impulse_point(cfg, p))?;
            let files = output::write_impulse(&mut out, cfg, &rows, named("impulse"))?;
            (rows.iter().filter(|r| r.common.failed()).count(), files)
        }
    };
    if cfg.plots {
        out.write_text(&output::script_name(mode), &gnuplot_script(mode, &grid, &files))?;
    }
    let mut listed = out.files().to_vec();
    listed.push(output::MANIFEST.to_string());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        mode: mode.name(),
        seed: cfg.seed,
        config_hash: cfg.hash(mode),
        grid_points: grid.len(),
        failed_points: failed,
        files: listed.clone(),
        config: output::manifest_config(cfg),
    };
    output::write_manifest(&mut out, &manifest)?;
    Ok(Report { grid_points: grid.len(), failed_points: failed, files: listed })
}
