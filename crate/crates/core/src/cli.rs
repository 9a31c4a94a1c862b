// SPDX-License-Identifier: Apache-2.0

//! The `echocorr` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{BackendKind, RunConfig};
use crate::engine::{sweep_amplitude, sweep_delay, sweep_echo, sweep_echo_amplitude, Backend, SemiclassicalBackend, SweepResult};
use crate::error::{Error, Result};
use crate::oracle::ExactBackend;
use crate::sequence::{dsl, IntermediateMode};
use crate::verify::run_verify;

#[derive(Debug, Parser)]
#[command(name = "echocorr", version, about = "Correlated spin-echo measurements on a nuclear spin bath")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// INI config file, or a CSV written by this tool
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Shots per point
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_parser = ["semiclassical", "exact"])]
    pub backend: Option<String>,
    /// Output CSV (stdout if absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Intermediate mode(s) for fig2b, comma separated
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Override any config key, e.g. --set bath.knight_khz=0
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand, Clone)]
pub enum Command {
    /// Single-echo P(S) versus τ_echo
    Fig1d,
    /// Covariance versus delay with the qubit locked in S, for several τ_echo
    Fig1e,
    /// Covariance versus delay for each intermediate mode
    Fig2b,
    /// Single-echo P(S) versus exchange pulse amplitude
    Fig2c,
    /// Covariance versus intermediate pulse amplitude, with the single-echo curve
    Fig2d,
    /// Run a sequence file
    RunSeq { file: PathBuf },
    /// Compare the semiclassical engine with the exact backend
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fig1d => "fig1d",
            Command::Fig1e => "fig1e",
            Command::Fig2b => "fig2b",
            Command::Fig2c => "fig2c",
            Command::Fig2d => "fig2d",
            Command::RunSeq { .. } => "run-seq",
            Command::Verify => "verify",
        }
    }
}

/// Builds the effective config: defaults, then the file, then flags.
pub fn resolve_config(args: &CommonArgs, command: &Command) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for s in &args.set {
        cfg.set_assignment(s)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(shots) = args.shots {
        if matches!(command, Command::Verify) {
            cfg.verify_shots = shots;
        } else {
            cfg.shots = shots;
        }
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(b) = &args.backend {
        cfg.backend = b.parse()?;
    }
    if let Some(m) = &args.mode {
        cfg.set("fig2b.modes", m)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn backend(cfg: &RunConfig) -> Result<Box<dyn Backend>> {
    Ok(match cfg.backend {
        BackendKind::Semiclassical => Box::new(SemiclassicalBackend::new(
            cfg.model()?,
            cfg.sequence_options(),
            cfg.shots,
            cfg.workers,
        )?),
        BackendKind::Exact => Box::new(ExactBackend::new(cfg.small_bath()?, &cfg.sequence_options())?),
    })
}

/// A CSV table: header row and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn num(x: f64) -> String {
    x.to_string()
}

fn us(x: f64) -> String {
    num((x * 1e6 * 1e9).round() / 1e9)
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// The table with `header` prepended, in the CSV dialect used by every
    /// subcommand: commas, LF line endings, `#` metadata lines.
    pub fn to_csv(&self, header: &str) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let body = String::from_utf8(body).map_err(|e| Error::Config(e.to_string()))?;
        Ok(format!("{header}{body}"))
    }
}

pub fn fig1d(cfg: &RunConfig) -> Result<Table> {
    let b = backend(cfg)?;
    let grid: Vec<f64> = cfg.fig1d_tau.values().iter().map(|t| t * 1e-6).collect();
    let mut t = Table::new(&["tau_echo_us", "p_singlet", "stderr"]);
    for r in sweep_echo(b.as_ref(), &grid)? {
        t.rows.push(vec![us(r.axis), num(r.p1_mean), num(r.p1_stderr)]);
    }
    Ok(t)
}

fn delay_rows(b: &dyn Backend, tau_echo_us: f64, delays_us: &[f64], mode: IntermediateMode) -> Result<Vec<SweepResult>> {
    let delays: Vec<f64> = delays_us.iter().map(|d| d * 1e-6).collect();
    sweep_delay(b, tau_echo_us * 1e-6, &delays, mode)
}

pub fn fig1e(cfg: &RunConfig) -> Result<Table> {
    let b = backend(cfg)?;
    let delays = cfg.fig1e_delay.values();
    let mut t = Table::new(&["tau_echo_us", "tau_delay_us", "covariance", "stderr"]);
    for &tau in &cfg.fig1e_tau_echo {
        let valid: Vec<f64> = delays.iter().copied().filter(|&d| d >= tau).collect();
        for r in delay_rows(b.as_ref(), tau, &valid, IntermediateMode::LockSinglet)? {
            t.rows.push(vec![
                num(tau),
                us(r.axis),
                num(r.covariance.unwrap_or(f64::NAN)),
                num(r.cov_stderr.unwrap_or(f64::NAN)),
            ]);
        }
    }
    Ok(t)
}

pub fn fig2b(cfg: &RunConfig) -> Result<Table> {
    let b = backend(cfg)?;
    let delays = cfg.fig2b_delay.values();
    let mut columns = vec!["tau_delay_us".to_string()];
    let mut traces = Vec::new();
    for &m in &cfg.fig2b_modes {
        columns.push(format!("cov_{}", m.name()));
        columns.push(format!("stderr_{}", m.name()));
        traces.push(delay_rows(b.as_ref(), cfg.fig2b_tau_echo, &delays, m)?);
    }
    let mut t = Table {
        columns,
        rows: Vec::new(),
    };
    for (i, d) in delays.iter().enumerate() {
        let mut row = vec![num(*d)];
        for tr in &traces {
            row.push(num(tr[i].covariance.unwrap_or(f64::NAN)));
            row.push(num(tr[i].cov_stderr.unwrap_or(f64::NAN)));
        }
        t.rows.push(row);
    }
    Ok(t)
}

fn pulse_duration(cfg: &RunConfig) -> Result<f64> {
    let d = cfg.pulse_duration_ns * 1e-9;
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::param("sequence.pulse_duration_ns", "amplitude sweeps need a positive pulse duration"))
    }
}

pub fn fig2c(cfg: &RunConfig) -> Result<Table> {
    let b = backend(cfg)?;
    let d = pulse_duration(cfg)?;
    let jmap = cfg.jmap();
    let mut t = Table::new(&["amplitude", "theta_rad", "p_singlet", "stderr"]);
    for r in sweep_echo_amplitude(b.as_ref(), cfg.fig2c_tau_echo * 1e-6, &cfg.fig2c_amplitude.values(), d)? {
        t.rows.push(vec![num(r.axis), num(jmap.angle(r.axis, d)), num(r.p1_mean), num(r.p1_stderr)]);
    }
    Ok(t)
}

pub fn fig2d(cfg: &RunConfig) -> Result<Table> {
    let b = backend(cfg)?;
    let d = pulse_duration(cfg)?;
    let jmap = cfg.jmap();
    let sweep = sweep_amplitude(
        b.as_ref(),
        cfg.fig2d_tau_echo * 1e-6,
        cfg.fig2d_tau_delay * 1e-6,
        &cfg.fig2d_amplitude.values(),
        d,
    )?;
    let mut t = Table::new(&["amplitude", "theta_rad", "covariance", "cov_stderr", "p_singlet", "p_stderr"]);
    for (c, e) in sweep.covariance.iter().zip(&sweep.single_echo) {
        t.rows.push(vec![
            num(c.axis),
            num(jmap.angle(c.axis, d)),
            num(c.covariance.unwrap_or(f64::NAN)),
            num(c.cov_stderr.unwrap_or(f64::NAN)),
            num(e.p1_mean),
            num(e.p1_stderr),
        ]);
    }
    Ok(t)
}

/// Runs a sequence file. Returns the table and the rendered sequence for
/// the metadata header.
pub fn run_seq(cfg: &RunConfig, path: &Path) -> Result<(Table, String)> {
    if cfg.backend != BackendKind::Semiclassical {
        return Err(Error::Config("run-seq needs the semiclassical backend".into()));
    }
    let seq = dsl::parse_sequence(&std::fs::read_to_string(path)?)?;
    let b = SemiclassicalBackend::new(cfg.model()?, cfg.sequence_options(), cfg.shots, cfg.workers)?;
    let acc = b.run_counts(&seq)?;
    let t = if seq.measurement_count() == 1 {
        let r = SweepResult::from_singles(0.0, acc.n, acc.n1);
        let mut t = Table::new(&["shots", "p_singlet", "stderr"]);
        t.rows.push(vec![acc.n.to_string(), num(r.p1_mean), num(r.p1_stderr)]);
        t
    } else {
        let r = SweepResult::from_pairs(0.0, &acc);
        let mut t = Table::new(&["shots", "p1", "p1_stderr", "p2", "p2_stderr", "covariance", "cov_stderr"]);
        t.rows.push(vec![
            acc.n.to_string(),
            num(r.p1_mean),
            num(r.p1_stderr),
            num(r.p2_mean.unwrap_or(f64::NAN)),
            num(r.p2_stderr.unwrap_or(f64::NAN)),
            num(r.covariance.unwrap_or(f64::NAN)),
            num(r.cov_stderr.unwrap_or(f64::NAN)),
        ]);
        t
    };
    Ok((t, dsl::render_sequence(&seq)))
}

/// Output of one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Full CSV text including the metadata header.
    pub csv: String,
    /// Human-readable text for stdout when the CSV goes to a file.
    pub report: Option<String>,
    pub success: bool,
}

/// Runs a subcommand against a resolved config.
pub fn execute(cfg: &RunConfig, command: &Command) -> Result<Outcome> {
    let mut header = cfg.metadata_header(command.name());
    let (table, report, success) = match command {
        Command::Fig1d => (fig1d(cfg)?, None, true),
        Command::Fig1e => (fig1e(cfg)?, None, true),
        Command::Fig2b => (fig2b(cfg)?, None, true),
        Command::Fig2c => (fig2c(cfg)?, None, true),
        Command::Fig2d => (fig2d(cfg)?, None, true),
        Command::RunSeq { file } => {
            let (t, text) = run_seq(cfg, file)?;
            for line in text.lines() {
                header.push_str(&format!("# ; seq: {line}\n"));
            }
            (t, None, true)
        }
        Command::Verify => {
            let report = run_verify(&cfg.verify_config()?)?;
            let mut t = Table::new(&["check", "passed", "detail"]);
            for c in &report.checks {
                t.rows.push(vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]);
            }
            (t, Some(report.to_string()), report.passed())
        }
    };
    Ok(Outcome {
        csv: table.to_csv(&header)?,
        report,
        success,
    })
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = resolve_config(&cli.common, &cli.command).and_then(|cfg| execute(&cfg, &cli.command));
    match result {
        Ok(outcome) => {
            let written = match &cli.common.out {
                Some(p) => std::fs::write(p, &outcome.csv).map_err(Error::from),
                None if outcome.report.is_none() => std::io::stdout().write_all(outcome.csv.as_bytes()).map_err(Error::from),
                None => Ok(()),
            };
            if let Some(r) = &outcome.report {
                println!("{r}");
            }
            if let Err(e) = written {
                eprintln!("echocorr: {e}");
                return 1;
            }
            if outcome.success {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("echocorr: {e}");
            if matches!(e, Error::Config(_) | Error::InvalidParameter { .. } | Error::Parse { .. }) {
                2
            } else {
                1
            }
        }
    }
}
