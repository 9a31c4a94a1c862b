// SPDX-License-Identifier: Apache-2.0

//! Run configuration: INI files, `section.key=value` overrides and the
//! metadata header written ahead of every CSV.
//!
//! Units at this boundary are µs, mT, kHz and ns; everything is converted to
//! SI when the model is built.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::bath::{BathConfig, KnightWeights};
use crate::engine::Model;
use crate::error::{Error, Result};
use crate::oracle::SmallBathSpec;
use crate::physics::{ElectronParams, NuclearSpecies};
use crate::sequence::{IntermediateMode, JMap, SequenceOptions};
use crate::verify::VerifyConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Semiclassical,
    Exact,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::Semiclassical => "semiclassical",
            BackendKind::Exact => "exact",
        }
    }
}

impl FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semiclassical" => Ok(BackendKind::Semiclassical),
            "exact" => Ok(BackendKind::Exact),
            _ => Err(Error::Config(format!("unknown backend '{s}' (expected semiclassical or exact)"))),
        }
    }
}

/// A uniform grid `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Grid { start, stop, step }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.step > 0.0 && self.start.is_finite() && self.stop.is_finite() && self.stop >= self.start) {
            return Err(Error::Config(format!(
                "{name}: grid needs finite start <= stop and step > 0 (got {}, {}, {})",
                self.start, self.stop, self.step
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid values, rounded to 1e-9 of the grid unit so that printed axes
    /// stay short.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub shots: u64,
    pub workers: usize,
    pub backend: BackendKind,

    pub electron: ElectronParams,

    /// `name:γ/2π in MHz/T:abundance` entries.
    pub species: Vec<(String, f64, f64)>,
    pub rms_transverse_mt: f64,
    pub rms_longitudinal_mt: f64,
    pub frequency_spread: f64,
    pub macro_spins: usize,
    pub knight_khz: f64,
    pub knight_weights: KnightWeights,

    pub fidelity_s: f64,
    pub fidelity_t: f64,
    pub adiabatic_error: f64,
    pub echo_error_rms: f64,
    pub intermediate_error_rms: f64,
    pub pulse_duration_ns: f64,
    pub j0_mhz: f64,
    pub amp_scale: f64,

    pub fig1d_tau: Grid,
    pub fig1e_tau_echo: Vec<f64>,
    pub fig1e_delay: Grid,
    pub fig2b_tau_echo: f64,
    pub fig2b_delay: Grid,
    pub fig2b_modes: Vec<IntermediateMode>,
    pub fig2c_tau_echo: f64,
    pub fig2c_amplitude: Grid,
    pub fig2d_tau_echo: f64,
    pub fig2d_tau_delay: f64,
    pub fig2d_amplitude: Grid,

    /// Exact-backend bath; couplings and Zeeman frequencies in rad/µs.
    pub oracle_n_left: usize,
    pub oracle_n_right: usize,
    pub oracle_couplings: Vec<f64>,
    pub oracle_zeeman: Vec<f64>,
    pub oracle_lambda: f64,

    pub verify_shots: u64,
    pub verify_knight_factor: f64,
    pub verify_sigma: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let v = VerifyConfig::default();
        let bath = BathConfig::default();
        let opts = SequenceOptions::default();
        RunConfig {
            seed: 1,
            shots: 20_000,
            workers: 1,
            backend: BackendKind::Semiclassical,
            electron: ElectronParams::default(),
            species: vec![
                ("75As".into(), 7.315, 0.5),
                ("69Ga".into(), 10.248, 0.301),
                ("71Ga".into(), 13.021, 0.199),
            ],
            rms_transverse_mt: 4.0,
            rms_longitudinal_mt: 2.0,
            frequency_spread: 0.002,
            macro_spins: bath.macro_spins_per_species,
            knight_khz: 8.0,
            knight_weights: bath.knight_weights,
            fidelity_s: opts.fidelity_s,
            fidelity_t: opts.fidelity_t,
            adiabatic_error: opts.adiabatic_error,
            echo_error_rms: opts.echo_error_rms,
            intermediate_error_rms: opts.intermediate_error_rms,
            pulse_duration_ns: opts.pulse_duration * 1e9,
            j0_mhz: 1.0,
            amp_scale: 1.0,
            fig1d_tau: Grid::new(0.1, 10.0, 0.1),
            fig1e_tau_echo: vec![1.5, 3.4, 5.0, 6.87],
            fig1e_delay: Grid::new(7.0, 12.0, 0.05),
            fig2b_tau_echo: 3.1,
            fig2b_delay: Grid::new(21.0, 24.0, 0.1),
            fig2b_modes: vec![
                IntermediateMode::LockSinglet,
                IntermediateMode::UpDownPi,
                IntermediateMode::UpDown,
            ],
            fig2c_tau_echo: 3.1,
            fig2c_amplitude: Grid::new(-1.0, 3.9, 0.1),
            fig2d_tau_echo: 3.1,
            fig2d_tau_delay: 22.3,
            fig2d_amplitude: Grid::new(-1.0, 3.9, 0.1),
            oracle_n_left: v.spec.n_left,
            oracle_n_right: v.spec.n_right,
            oracle_couplings: v.spec.couplings.iter().map(|a| (a * 1e6).round() / 1e12).collect(),
            oracle_zeeman: v.spec.zeeman.iter().map(|w| (w * 1e6).round() / 1e12).collect(),
            oracle_lambda: v.spec.transverse_ratio,
            verify_shots: v.shots,
            verify_knight_factor: v.knight_factor,
            verify_sigma: v.sigma_tolerance,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_species(v: &str) -> Result<Vec<(String, f64, f64)>> {
    v.split(',')
        .map(|entry| {
            let parts: Vec<&str> = entry.trim().split(':').collect();
            match parts.as_slice() {
                [name, gamma, abundance] => Ok((
                    name.to_string(),
                    parse_num("bath.species", gamma)?,
                    parse_num("bath.species", abundance)?,
                )),
                _ => Err(Error::Config(format!(
                    "bath.species: expected name:gamma_mhz_per_t:abundance, got '{}'",
                    entry.trim()
                ))),
            }
        })
        .collect()
}

fn parse_modes(v: &str) -> Result<Vec<IntermediateMode>> {
    v.split(',').map(|s| s.trim().parse()).collect()
}

impl RunConfig {
    /// Sets one `section.key` to a textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "run.seed" => self.seed = parse_num(key, v)?,
            "run.shots" => self.shots = parse_num(key, v)?,
            "run.workers" => self.workers = parse_num(key, v)?,
            "run.backend" => self.backend = v.parse()?,
            "electron.g_par" => self.electron.g_par = parse_num(key, v)?,
            "electron.g_perp_ratio" => self.electron.g_perp_ratio = parse_num(key, v)?,
            "electron.b_ext_t" => self.electron.b_ext = parse_num(key, v)?,
            "electron.include_quadratic" => self.electron.include_quadratic = parse_bool(key, v)?,
            "bath.species" => self.species = parse_species(v)?,
            "bath.rms_transverse_mt" => self.rms_transverse_mt = parse_num(key, v)?,
            "bath.rms_longitudinal_mt" => self.rms_longitudinal_mt = parse_num(key, v)?,
            "bath.frequency_spread" => self.frequency_spread = parse_num(key, v)?,
            "bath.macro_spins" => self.macro_spins = parse_num(key, v)?,
            "bath.knight_khz" => self.knight_khz = parse_num(key, v)?,
            "bath.knight_weights" => {
                self.knight_weights = KnightWeights::parse(v)
                    .ok_or_else(|| Error::Config(format!("{key}: expected uniform or exponential, got '{v}'")))?
            }
            "sequence.fidelity_s" => self.fidelity_s = parse_num(key, v)?,
            "sequence.fidelity_t" => self.fidelity_t = parse_num(key, v)?,
            "sequence.adiabatic_error" => self.adiabatic_error = parse_num(key, v)?,
            "sequence.echo_error_rms" => self.echo_error_rms = parse_num(key, v)?,
            "sequence.intermediate_error_rms" => self.intermediate_error_rms = parse_num(key, v)?,
            "sequence.pulse_duration_ns" => self.pulse_duration_ns = parse_num(key, v)?,
            "sequence.j0_mhz" => self.j0_mhz = parse_num(key, v)?,
            "sequence.amp_scale" => self.amp_scale = parse_num(key, v)?,
            "fig1d.tau_start_us" => self.fig1d_tau.start = parse_num(key, v)?,
            "fig1d.tau_stop_us" => self.fig1d_tau.stop = parse_num(key, v)?,
            "fig1d.tau_step_us" => self.fig1d_tau.step = parse_num(key, v)?,
            "fig1e.tau_echo_us" => self.fig1e_tau_echo = parse_list(key, v)?,
            "fig1e.delay_start_us" => self.fig1e_delay.start = parse_num(key, v)?,
            "fig1e.delay_stop_us" => self.fig1e_delay.stop = parse_num(key, v)?,
            "fig1e.delay_step_us" => self.fig1e_delay.step = parse_num(key, v)?,
            "fig2b.tau_echo_us" => self.fig2b_tau_echo = parse_num(key, v)?,
            "fig2b.delay_start_us" => self.fig2b_delay.start = parse_num(key, v)?,
            "fig2b.delay_stop_us" => self.fig2b_delay.stop = parse_num(key, v)?,
            "fig2b.delay_step_us" => self.fig2b_delay.step = parse_num(key, v)?,
            "fig2b.modes" => self.fig2b_modes = parse_modes(v)?,
            "fig2c.tau_echo_us" => self.fig2c_tau_echo = parse_num(key, v)?,
            "fig2c.amp_start" => self.fig2c_amplitude.start = parse_num(key, v)?,
            "fig2c.amp_stop" => self.fig2c_amplitude.stop = parse_num(key, v)?,
            "fig2c.amp_step" => self.fig2c_amplitude.step = parse_num(key, v)?,
            "fig2d.tau_echo_us" => self.fig2d_tau_echo = parse_num(key, v)?,
            "fig2d.tau_delay_us" => self.fig2d_tau_delay = parse_num(key, v)?,
            "fig2d.amp_start" => self.fig2d_amplitude.start = parse_num(key, v)?,
            "fig2d.amp_stop" => self.fig2d_amplitude.stop = parse_num(key, v)?,
            "fig2d.amp_step" => self.fig2d_amplitude.step = parse_num(key, v)?,
            "oracle.n_left" => self.oracle_n_left = parse_num(key, v)?,
            "oracle.n_right" => self.oracle_n_right = parse_num(key, v)?,
            "oracle.couplings_rad_per_us" => self.oracle_couplings = parse_list(key, v)?,
            "oracle.zeeman_rad_per_us" => self.oracle_zeeman = parse_list(key, v)?,
            "oracle.lambda" => self.oracle_lambda = parse_num(key, v)?,
            "verify.shots" => self.verify_shots = parse_num(key, v)?,
            "verify.knight_factor" => self.verify_knight_factor = parse_num(key, v)?,
            "verify.sigma" => self.verify_sigma = parse_num(key, v)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `section.key=value`.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{assignment}'")))?;
        self.set(k.trim(), v)
    }

    /// Applies every key of an INI document on top of `self`. A CSV written
    /// by this crate is accepted too: its `# ` metadata header is the INI.
    pub fn apply_ini(&mut self, text: &str) -> Result<()> {
        let text = if text.lines().any(|l| l.trim() == "# [run]") {
            text.lines()
                .take_while(|l| l.starts_with('#'))
                .map(|l| l.trim_start_matches('#').trim_start())
                .collect::<Vec<_>>()
                .join("\n")
        } else {
            text.to_string()
        };
        let ini = Ini::load_from_str(&text).map_err(|e| Error::Config(format!("config: {e}")))?;
        for (section, props) in ini.iter() {
            for (k, v) in props.iter() {
                let key = match section {
                    Some(s) => format!("{s}.{k}"),
                    None => return Err(Error::Config(format!("config key '{k}' is outside a section"))),
                };
                self.set(&key, v)?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_ini(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    /// The configuration as INI. The worker count is left out since it never
    /// changes results.
    pub fn to_ini(&self) -> String {
        let species: Vec<String> = self.species.iter().map(|(n, g, a)| format!("{n}:{g}:{a}")).collect();
        let modes: Vec<String> = self.fig2b_modes.iter().map(|m| m.name()).collect();
        let sections: Vec<(&str, Vec<(&str, String)>)> = vec![
            (
                "run",
                vec![
                    ("seed", self.seed.to_string()),
                    ("shots", self.shots.to_string()),
                    ("backend", self.backend.name().to_string()),
                ],
            ),
            (
                "electron",
                vec![
                    ("g_par", self.electron.g_par.to_string()),
                    ("g_perp_ratio", self.electron.g_perp_ratio.to_string()),
                    ("b_ext_t", self.electron.b_ext.to_string()),
                    ("include_quadratic", self.electron.include_quadratic.to_string()),
                ],
            ),
            (
                "bath",
                vec![
                    ("species", species.join(", ")),
                    ("rms_transverse_mt", self.rms_transverse_mt.to_string()),
                    ("rms_longitudinal_mt", self.rms_longitudinal_mt.to_string()),
                    ("frequency_spread", self.frequency_spread.to_string()),
                    ("macro_spins", self.macro_spins.to_string()),
                    ("knight_khz", self.knight_khz.to_string()),
                    ("knight_weights", self.knight_weights.name().to_string()),
                ],
            ),
            (
                "sequence",
                vec![
                    ("fidelity_s", self.fidelity_s.to_string()),
                    ("fidelity_t", self.fidelity_t.to_string()),
                    ("adiabatic_error", self.adiabatic_error.to_string()),
                    ("echo_error_rms", self.echo_error_rms.to_string()),
                    ("intermediate_error_rms", self.intermediate_error_rms.to_string()),
                    ("pulse_duration_ns", self.pulse_duration_ns.to_string()),
                    ("j0_mhz", self.j0_mhz.to_string()),
                    ("amp_scale", self.amp_scale.to_string()),
                ],
            ),
            (
                "fig1d",
                vec![
                    ("tau_start_us", self.fig1d_tau.start.to_string()),
                    ("tau_stop_us", self.fig1d_tau.stop.to_string()),
                    ("tau_step_us", self.fig1d_tau.step.to_string()),
                ],
            ),
            (
                "fig1e",
                vec![
                    ("tau_echo_us", join(&self.fig1e_tau_echo)),
                    ("delay_start_us", self.fig1e_delay.start.to_string()),
                    ("delay_stop_us", self.fig1e_delay.stop.to_string()),
                    ("delay_step_us", self.fig1e_delay.step.to_string()),
                ],
            ),
            (
                "fig2b",
                vec![
                    ("tau_echo_us", self.fig2b_tau_echo.to_string()),
                    ("delay_start_us", self.fig2b_delay.start.to_string()),
                    ("delay_stop_us", self.fig2b_delay.stop.to_string()),
                    ("delay_step_us", self.fig2b_delay.step.to_string()),
                    ("modes", modes.join(", ")),
                ],
            ),
            (
                "fig2c",
                vec![
                    ("tau_echo_us", self.fig2c_tau_echo.to_string()),
                    ("amp_start", self.fig2c_amplitude.start.to_string()),
                    ("amp_stop", self.fig2c_amplitude.stop.to_string()),
                    ("amp_step", self.fig2c_amplitude.step.to_string()),
                ],
            ),
            (
                "fig2d",
                vec![
                    ("tau_echo_us", self.fig2d_tau_echo.to_string()),
                    ("tau_delay_us", self.fig2d_tau_delay.to_string()),
                    ("amp_start", self.fig2d_amplitude.start.to_string()),
                    ("amp_stop", self.fig2d_amplitude.stop.to_string()),
                    ("amp_step", self.fig2d_amplitude.step.to_string()),
                ],
            ),
            (
                "oracle",
                vec![
                    ("n_left", self.oracle_n_left.to_string()),
                    ("n_right", self.oracle_n_right.to_string()),
                    ("couplings_rad_per_us", join(&self.oracle_couplings)),
                    ("zeeman_rad_per_us", join(&self.oracle_zeeman)),
                    ("lambda", self.oracle_lambda.to_string()),
                ],
            ),
            (
                "verify",
                vec![
                    ("shots", self.verify_shots.to_string()),
                    ("knight_factor", self.verify_knight_factor.to_string()),
                    ("sigma", self.verify_sigma.to_string()),
                ],
            ),
        ];
        let mut out = String::new();
        for (i, (name, keys)) in sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
            for (k, v) in keys {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    /// `#`-prefixed metadata block; feeding it back through
    /// [`RunConfig::apply_ini`] restores this configuration.
    pub fn metadata_header(&self, command: &str) -> String {
        let mut out = format!("# ; echocorr {VERSION}\n# ; command: {command}\n");
        for line in self.to_ini().lines() {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                let _ = writeln!(out, "# {line}");
            }
        }
        out
    }

    pub fn sequence_options(&self) -> SequenceOptions {
        SequenceOptions {
            fidelity_s: self.fidelity_s,
            fidelity_t: self.fidelity_t,
            adiabatic_error: self.adiabatic_error,
            echo_error_rms: self.echo_error_rms,
            intermediate_error_rms: self.intermediate_error_rms,
            pulse_duration: self.pulse_duration_ns * 1e-9,
            jmap: self.jmap(),
        }
    }

    pub fn jmap(&self) -> JMap {
        JMap {
            j0: std::f64::consts::TAU * self.j0_mhz * 1e6,
            amp_scale: self.amp_scale,
        }
    }

    pub fn model(&self) -> Result<Model> {
        let t = self.rms_transverse_mt * 1e-3;
        let l = self.rms_longitudinal_mt * 1e-3;
        let species = self
            .species
            .iter()
            .map(|(name, gamma, abundance)| {
                let mut s = NuclearSpecies::new(name.clone(), *gamma, *abundance);
                s.rms_transverse_field = t * abundance.sqrt();
                s.rms_longitudinal_field = l * abundance.sqrt();
                s.frequency_spread = self.frequency_spread;
                s
            })
            .collect();
        let model = Model {
            electron: self.electron,
            bath: BathConfig {
                species,
                macro_spins_per_species: self.macro_spins,
                knight_rms: std::f64::consts::TAU * self.knight_khz * 1e3,
                knight_weights: self.knight_weights,
                rng_seed: self.seed,
            },
            jmap: self.jmap(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn small_bath(&self) -> Result<SmallBathSpec> {
        let spec = SmallBathSpec {
            n_left: self.oracle_n_left,
            n_right: self.oracle_n_right,
            couplings: self.oracle_couplings.iter().map(|a| a * 1e6).collect(),
            zeeman: self.oracle_zeeman.iter().map(|w| w * 1e6).collect(),
            transverse_ratio: self.oracle_lambda,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn verify_config(&self) -> Result<VerifyConfig> {
        let spec = self.small_bath()?;
        let mut v = VerifyConfig {
            shots: self.verify_shots,
            seed: self.seed,
            workers: self.workers,
            knight_factor: self.verify_knight_factor,
            sigma_tolerance: self.verify_sigma,
            ..VerifyConfig::default()
        };
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * y.abs());
        let same_zeeman = close(&spec.zeeman, &v.spec.zeeman);
        if !same_zeeman {
            // rescale the default grid to the first Larmor period of the new bath
            let period = std::f64::consts::TAU / spec.zeeman.first().copied().unwrap_or(1e6);
            let scale = period / v.tau_echo;
            v.tau_echo = period;
            for point in &mut v.grid {
                point.1 *= scale;
            }
        }
        v.spec = spec;
        Ok(v)
    }

    /// Checks everything that the subcommands rely on.
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 || self.verify_shots == 0 {
            return Err(Error::param("shots", "must be at least 1"));
        }
        self.model()?;
        self.jmap().validate()?;
        for (name, g) in [
            ("fig1d.tau", self.fig1d_tau),
            ("fig1e.delay", self.fig1e_delay),
            ("fig2b.delay", self.fig2b_delay),
            ("fig2c.amp", self.fig2c_amplitude),
            ("fig2d.amp", self.fig2d_amplitude),
        ] {
            g.validate(name)?;
        }
        if self.fig1e_tau_echo.is_empty() {
            return Err(Error::Config("fig1e.tau_echo_us: list is empty".into()));
        }
        if self.fig2b_modes.is_empty() {
            return Err(Error::Config("fig2b.modes: list is empty".into()));
        }
        for p in [self.fidelity_s, self.fidelity_t, self.adiabatic_error] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param("fidelity", format!("{p} not in [0, 1]")));
            }
        }
        if !(self.pulse_duration_ns >= 0.0) {
            return Err(Error::param("pulse_duration_ns", "must be >= 0"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matches_library_defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.sequence_options(), SequenceOptions::default());
        let m = cfg.model().unwrap();
        let d = Model::default();
        assert_eq!(m.electron, d.electron);
        assert_eq!(m.bath.knight_rms, d.bath.knight_rms);
        assert_eq!(m.bath.species.len(), 3);
        for (a, b) in m.bath.species.iter().zip(&d.bath.species) {
            assert!((a.gamma - b.gamma).abs() < 1e-6 * b.gamma);
            assert!((a.rms_transverse_field - b.rms_transverse_field).abs() < 1e-15);
        }
        let v = cfg.verify_config().unwrap();
        let d = VerifyConfig::default();
        assert_eq!((v.tau_echo, &v.grid, v.shots, v.knight_factor), (d.tau_echo, &d.grid, d.shots, d.knight_factor));
        for (a, b) in v.spec.couplings.iter().zip(&d.spec.couplings) {
            assert!((a - b).abs() < 1e-9 * b);
        }
    }

    #[test]
    fn ini_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("run.seed", "99").unwrap();
        cfg.set("fig2b.modes", "updown, updown_theta:1.5").unwrap();
        cfg.set("bath.knight_khz", "0").unwrap();
        let mut back = RunConfig::default();
        back.apply_ini(&cfg.to_ini()).unwrap();
        assert_eq!(back, RunConfig { workers: 1, ..cfg.clone() });
        let mut from_header = RunConfig::default();
        let csv = format!("{}a,b\n1,2\n", cfg.metadata_header("fig2b"));
        from_header.apply_ini(&csv).unwrap();
        assert_eq!(from_header, cfg);
    }

    #[test]
    fn precedence_is_flag_over_file_over_default() {
        let mut cfg = RunConfig::default();
        cfg.apply_ini("[run]\nseed = 5\nshots = 10\n").unwrap();
        cfg.set_assignment("run.shots=7").unwrap();
        assert_eq!((cfg.seed, cfg.shots), (5, 7));
        assert_eq!(cfg.fig2d_tau_delay, 22.3);
    }

    #[test]
    fn bad_input_is_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("run.nope", "1").is_err());
        assert!(cfg.set("run.seed", "x").is_err());
        let err = cfg.set("fig2b.modes", "lock").unwrap_err().to_string();
        assert!(err.contains("lock_singlet") && err.contains("updown_pi"), "{err}");
        assert!(cfg.apply_ini("seed = 1\n").is_err());
        assert!(cfg.set_assignment("run.seed").is_err());
        cfg.shots = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grids() {
        let g = Grid::new(0.1, 10.0, 0.1);
        assert_eq!(g.len(), 100);
        let v = g.values();
        assert_eq!(v[2], 0.3);
        assert_eq!(*v.last().unwrap(), 10.0);
        assert_eq!(Grid::new(7.0, 12.0, 0.05).len(), 101);
        assert!(Grid::new(1.0, 0.0, 0.1).validate("g").is_err());
    }

    #[test]
    fn header_lines_are_comments() {
        let h = RunConfig::default().metadata_header("fig1d");
        assert!(h.lines().all(|l| l.starts_with('#')));
        assert!(h.contains(&format!("echocorr {VERSION}")));
        assert!(!h.contains("workers"));
        assert!(!h.contains('\r'));
    }
}
