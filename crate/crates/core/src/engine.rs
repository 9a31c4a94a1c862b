// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo execution of pulse sequences over freshly sampled baths,
//! covariance estimation and the figure sweeps.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bath::{sample_bath, BathConfig, DotBathState};
use crate::error::{Error, Result};
use crate::physics::{self, ElectronParams, FieldSample};
use crate::rng::{substream, StreamPurpose};
use crate::sequence::{
    build_correlation_experiment, build_echo_with_pulse, exchange_angle, ElectronConfig, IntermediateMode, JMap,
    PulseAngle, PulseSequence, QubitState, Segment, SequenceOptions,
};

/// Everything the semiclassical engine needs besides the sequence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub electron: ElectronParams,
    pub bath: BathConfig,
    pub jmap: JMap,
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        self.electron.validate()?;
        self.bath.validate()?;
        self.jmap.validate()
    }
}

fn field_now(state: &DotBathState) -> FieldSample {
    FieldSample {
        b_par: state.b_par,
        b_perp: state.total_phasor().re,
    }
}

/// Runs one shot and returns the reported outcome of every measurement
/// (true = singlet). The shot draws only from substreams addressed by
/// `(model.bath.rng_seed, purpose, shot_index)`.
pub fn run_sequence(model: &Model, seq: &PulseSequence, shot_index: u64) -> Result<Vec<bool>> {
    let seed = model.bath.rng_seed;
    let mut bath_rng = substream(seed, StreamPurpose::Bath, shot_index);
    let mut meas_rng = substream(seed, StreamPurpose::Measurement, shot_index);
    let mut pulse_rng = substream(seed, StreamPurpose::PulseNoise, shot_index);
    let mut prep_rng = substream(seed, StreamPurpose::Preparation, shot_index);

    let (mut left, mut right) = sample_bath(&model.bath, model.electron.b_ext, &mut bath_rng);
    let knight = model.bath.knight_rms;
    let quad = model.electron.include_quadratic;
    let mut q = QubitState::SINGLET;
    let mut outcomes = Vec::with_capacity(2);

    for seg in &seq.segments {
        match *seg {
            Segment::InitSinglet => q = QubitState::SINGLET,
            Segment::InitUpDown { adiabatic_error } => {
                let u: f64 = prep_rng.random();
                q = if u < adiabatic_error { QubitState::SINGLET } else { QubitState::UP_DOWN };
            }
            Segment::LockSinglet { duration } => {
                q = QubitState::SINGLET;
                left.advance(duration, 0.0, knight);
                right.advance(duration, 0.0, knight);
            }
            Segment::FreeEvolve {
                duration,
                electron: ElectronConfig::Merged,
            } => {
                left.advance(duration, 0.0, knight);
                right.advance(duration, 0.0, knight);
            }
            Segment::FreeEvolve {
                duration,
                electron: ElectronConfig::Separated,
            } => {
                let sz = 0.5 * q.bloch[2];
                let il = left.evolve_integrate(duration, sz, knight, quad);
                let ir = right.evolve_integrate(duration, -sz, knight, quad);
                q.rotate_z(physics::accumulated_qubit_phase(&model.electron, &il, &ir));
            }
            Segment::ExchangePulse { angle, angle_error_rms } => {
                let eps: f64 = pulse_rng.sample(StandardNormal);
                let theta = exchange_angle(&model.jmap, angle) + angle_error_rms * eps;
                match angle {
                    PulseAngle::Amplitude { duration, .. } if duration > 0.0 => {
                        // The gradient keeps acting while the exchange is on
                        // and tilts the rotation axis out of the x direction.
                        let rate = physics::qubit_phase_rate(&model.electron, field_now(&left), field_now(&right))?;
                        q.rotate_xz(theta, rate * duration);
                    }
                    _ => q.rotate_x(theta),
                }
            }
            Segment::MeasureST0 { fidelity_s, fidelity_t } => {
                let p = q.singlet_probability()?;
                let u_state: f64 = meas_rng.random();
                let u_read: f64 = meas_rng.random();
                let singlet = u_state < p;
                outcomes.push(if singlet { u_read < fidelity_s } else { u_read >= fidelity_t });
                q = if singlet { QubitState::SINGLET } else { QubitState::TRIPLET0 };
            }
        }
    }
    Ok(outcomes)
}

/// Outcome pair of one correlation shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotRecord {
    pub shot_index: u64,
    /// Stream id of every substream the shot drew from.
    pub substream: u64,
    pub x1: bool,
    pub x2: bool,
}

pub fn run_shot(model: &Model, seq: &PulseSequence, shot_index: u64) -> Result<ShotRecord> {
    let n = seq.measurement_count();
    if n != 2 {
        return Err(Error::Sequence(format!("a correlation shot needs exactly two measurements, found {n}")));
    }
    let out = run_sequence(model, seq, shot_index)?;
    Ok(ShotRecord {
        shot_index,
        substream: shot_index,
        x1: out[0],
        x2: out[1],
    })
}

/// Integer outcome counts of a set of shot pairs. Counts merge exactly, so
/// every statistic is independent of how shots were split across workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CovarianceAccumulator {
    pub n: u64,
    pub n1: u64,
    pub n2: u64,
    pub n12: u64,
}

impl CovarianceAccumulator {
    pub fn push(&mut self, x1: bool, x2: bool) {
        self.n += 1;
        self.n1 += x1 as u64;
        self.n2 += x2 as u64;
        self.n12 += (x1 && x2) as u64;
    }

    pub fn merge(self, o: Self) -> Self {
        CovarianceAccumulator {
            n: self.n + o.n,
            n1: self.n1 + o.n1,
            n2: self.n2 + o.n2,
            n12: self.n12 + o.n12,
        }
    }

    pub fn from_records(records: &[ShotRecord]) -> Self {
        let mut acc = Self::default();
        for r in records {
            acc.push(r.x1, r.x2);
        }
        acc
    }

    fn cov_of(n: f64, n1: f64, n2: f64, n12: f64) -> f64 {
        n12 / n - (n1 / n) * (n2 / n)
    }

    pub fn covariance(&self) -> f64 {
        Self::cov_of(self.n as f64, self.n1 as f64, self.n2 as f64, self.n12 as f64)
    }

    /// Delete-one jackknife standard error of the covariance. All records in
    /// one outcome class give the same leave-one-out value, so the sum runs
    /// over four classes.
    pub fn covariance_stderr(&self) -> f64 {
        let (n, n1, n2, n12) = (self.n as f64, self.n1 as f64, self.n2 as f64, self.n12 as f64);
        let classes = [
            (n12, 1.0, 1.0),
            (n1 - n12, 1.0, 0.0),
            (n2 - n12, 0.0, 1.0),
            (n - n1 - n2 + n12, 0.0, 0.0),
        ];
        let loo = |x1: f64, x2: f64| Self::cov_of(n - 1.0, n1 - x1, n2 - x2, n12 - x1 * x2);
        let mean: f64 = classes.iter().map(|&(m, a, b)| m * loo(a, b)).sum::<f64>() / n;
        let ss: f64 = classes
            .iter()
            .filter(|c| c.0 > 0.0)
            .map(|&(m, a, b)| m * (loo(a, b) - mean).powi(2))
            .sum();
        ((n - 1.0) / n * ss).sqrt()
    }

    pub fn p1(&self) -> f64 {
        self.n1 as f64 / self.n as f64
    }

    pub fn p2(&self) -> f64 {
        self.n2 as f64 / self.n as f64
    }
}

/// `(C, stderr)` of a list of shot records.
pub fn covariance(records: &[ShotRecord]) -> Result<(f64, f64)> {
    if records.len() < 2 {
        return Err(Error::param("records", "covariance needs at least two records"));
    }
    let acc = CovarianceAccumulator::from_records(records);
    Ok((acc.covariance(), acc.covariance_stderr()))
}

/// Standard error of a mean of `n` Bernoulli outcomes with sample mean `p`.
pub fn proportion_stderr(p: f64, n: u64) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    (p * (1.0 - p) / (n as f64 - 1.0)).sqrt()
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepResult {
    /// τ_echo or τ_delay in seconds, or a pulse amplitude.
    pub axis: f64,
    /// Shots behind the row; zero for exact evaluation.
    pub shots: u64,
    pub p1_mean: f64,
    pub p1_stderr: f64,
    pub p2_mean: Option<f64>,
    pub p2_stderr: Option<f64>,
    pub covariance: Option<f64>,
    pub cov_stderr: Option<f64>,
}

impl SweepResult {
    pub fn from_singles(axis: f64, shots: u64, singlets: u64) -> Self {
        let p = singlets as f64 / shots as f64;
        SweepResult {
            axis,
            shots,
            p1_mean: p,
            p1_stderr: proportion_stderr(p, shots),
            p2_mean: None,
            p2_stderr: None,
            covariance: None,
            cov_stderr: None,
        }
    }

    pub fn from_pairs(axis: f64, acc: &CovarianceAccumulator) -> Self {
        SweepResult {
            axis,
            shots: acc.n,
            p1_mean: acc.p1(),
            p1_stderr: proportion_stderr(acc.p1(), acc.n),
            p2_mean: Some(acc.p2()),
            p2_stderr: Some(proportion_stderr(acc.p2(), acc.n)),
            covariance: Some(acc.covariance()),
            cov_stderr: Some(acc.covariance_stderr()),
        }
    }
}

/// A single measurement configuration a backend can evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Experiment {
    Echo {
        tau_echo: f64,
        pulse: PulseAngle,
    },
    Correlation {
        tau_echo: f64,
        tau_delay: f64,
        mode: IntermediateMode,
    },
}

pub trait Backend: Sync {
    /// Evaluates `exp`; the returned row has `axis` set to zero.
    fn evaluate(&self, exp: &Experiment) -> Result<SweepResult>;

    fn name(&self) -> &'static str;
}

/// The Monte Carlo engine over the macro-spin bath.
#[derive(Debug)]
pub struct SemiclassicalBackend {
    pub model: Model,
    pub options: SequenceOptions,
    pub shots: u64,
    pool: rayon::ThreadPool,
    workers: usize,
}

impl SemiclassicalBackend {
    pub fn new(model: Model, options: SequenceOptions, shots: u64, workers: usize) -> Result<Self> {
        model.validate()?;
        options.jmap.validate()?;
        if shots == 0 {
            return Err(Error::param("shots", "must be at least 1"));
        }
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(SemiclassicalBackend {
            model,
            options,
            shots,
            pool,
            workers,
        })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn sequence_for(&self, exp: &Experiment) -> Result<PulseSequence> {
        match *exp {
            Experiment::Echo { tau_echo, pulse } => build_echo_with_pulse(tau_echo, pulse, &self.options),
            Experiment::Correlation {
                tau_echo,
                tau_delay,
                mode,
            } => build_correlation_experiment(tau_echo, tau_delay, mode, &self.options),
        }
    }

    /// Runs `shots` shots of a sequence with one or two measurements and
    /// folds the outcomes into counts.
    pub fn run_counts(&self, seq: &PulseSequence) -> Result<CovarianceAccumulator> {
        let m = seq.measurement_count();
        if !(1..=2).contains(&m) {
            return Err(Error::Sequence(format!("expected one or two measurements, found {m}")));
        }
        let model = &self.model;
        self.pool.install(|| {
            (0..self.shots)
                .into_par_iter()
                .map(|i| {
                    let out = run_sequence(model, seq, i)?;
                    let mut acc = CovarianceAccumulator::default();
                    acc.push(out[0], *out.get(1).unwrap_or(&false));
                    Ok(acc)
                })
                .try_reduce(CovarianceAccumulator::default, |a, b| Ok(a.merge(b)))
        })
    }

    pub fn records(&self, seq: &PulseSequence) -> Result<Vec<ShotRecord>> {
        let model = &self.model;
        self.pool
            .install(|| (0..self.shots).into_par_iter().map(|i| run_shot(model, seq, i)).collect())
    }
}

impl Backend for SemiclassicalBackend {
    fn evaluate(&self, exp: &Experiment) -> Result<SweepResult> {
        let seq = self.sequence_for(exp)?;
        let acc = self.run_counts(&seq)?;
        Ok(match exp {
            Experiment::Echo { .. } => SweepResult::from_singles(0.0, acc.n, acc.n1),
            Experiment::Correlation { .. } => SweepResult::from_pairs(0.0, &acc),
        })
    }

    fn name(&self) -> &'static str {
        "semiclassical"
    }
}

fn nonempty(grid: &[f64], name: &'static str) -> Result<()> {
    if grid.is_empty() {
        Err(Error::param(name, "grid is empty"))
    } else {
        Ok(())
    }
}

fn at(axis: f64, mut r: SweepResult) -> SweepResult {
    r.axis = axis;
    r
}

/// Single-echo singlet return probability versus τ_echo.
pub fn sweep_echo(backend: &dyn Backend, tau_grid: &[f64]) -> Result<Vec<SweepResult>> {
    nonempty(tau_grid, "tau_echo")?;
    tau_grid
        .iter()
        .map(|&tau_echo| {
            backend
                .evaluate(&Experiment::Echo {
                    tau_echo,
                    pulse: PulseAngle::PiMultiple(1.0),
                })
                .map(|r| at(tau_echo, r))
        })
        .collect()
}

/// Covariance versus τ_delay for one intermediate mode.
pub fn sweep_delay(
    backend: &dyn Backend,
    tau_echo: f64,
    delay_grid: &[f64],
    mode: IntermediateMode,
) -> Result<Vec<SweepResult>> {
    nonempty(delay_grid, "tau_delay")?;
    delay_grid
        .iter()
        .map(|&tau_delay| {
            backend
                .evaluate(&Experiment::Correlation {
                    tau_echo,
                    tau_delay,
                    mode,
                })
                .map(|r| at(tau_delay, r))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSweep {
    /// Covariance versus the intermediate pulse amplitude.
    pub covariance: Vec<SweepResult>,
    /// Single-echo singlet return versus the echo pulse amplitude.
    pub single_echo: Vec<SweepResult>,
}

/// Single-echo P(S) versus the amplitude of the refocusing pulse.
pub fn sweep_echo_amplitude(
    backend: &dyn Backend,
    tau_echo: f64,
    amp_grid: &[f64],
    pulse_duration: f64,
) -> Result<Vec<SweepResult>> {
    nonempty(amp_grid, "amplitude")?;
    if !(pulse_duration > 0.0) {
        return Err(Error::param("pulse_duration", "an amplitude sweep needs a positive pulse duration"));
    }
    amp_grid
        .iter()
        .map(|&amplitude| {
            backend
                .evaluate(&Experiment::Echo {
                    tau_echo,
                    pulse: PulseAngle::Amplitude {
                        amplitude,
                        duration: pulse_duration,
                    },
                })
                .map(|r| at(amplitude, r))
        })
        .collect()
}

/// Covariance versus the intermediate pulse amplitude, together with the
/// single-echo curve for the same amplitudes.
pub fn sweep_amplitude(
    backend: &dyn Backend,
    tau_echo: f64,
    tau_delay: f64,
    amp_grid: &[f64],
    pulse_duration: f64,
) -> Result<AmplitudeSweep> {
    let single_echo = sweep_echo_amplitude(backend, tau_echo, amp_grid, pulse_duration)?;
    let covariance = amp_grid
        .iter()
        .map(|&amplitude| {
            backend
                .evaluate(&Experiment::Correlation {
                    tau_echo,
                    tau_delay,
                    mode: IntermediateMode::UpDownTheta { amplitude },
                })
                .map(|r| at(amplitude, r))
        })
        .collect::<Result<_>>()?;
    Ok(AmplitudeSweep {
        covariance,
        single_echo,
    })
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{NuclearSpecies, BOHR_MAGNETON, HBAR};
    use crate::sequence::{build_echo, parse_sequence};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn quiet_model() -> Model {
        let mut m = Model::default();
        for s in &mut m.bath.species {
            s.rms_transverse_field = 0.0;
            s.rms_longitudinal_field = 0.0;
        }
        m
    }

    fn backend(model: Model, shots: u64) -> SemiclassicalBackend {
        SemiclassicalBackend::new(model, SequenceOptions::default(), shots, 1).unwrap()
    }

    #[test]
    fn zero_field_gives_deterministic_singlets() {
        let b = backend(quiet_model(), 200);
        let seq = build_correlation_experiment(3e-6, 20e-6, IntermediateMode::UpDown, &SequenceOptions::default()).unwrap();
        for r in b.records(&seq).unwrap() {
            assert!(r.x1 && r.x2);
        }
    }

    #[test]
    fn shot_is_deterministic() {
        let m = Model::default();
        let seq = build_correlation_experiment(3e-6, 20e-6, IntermediateMode::UpDownPi, &SequenceOptions::default()).unwrap();
        assert_eq!(run_shot(&m, &seq, 17).unwrap(), run_shot(&m, &seq, 17).unwrap());
    }

    #[test]
    fn run_shot_needs_two_measurements() {
        let seq = build_echo(3e-6, &SequenceOptions::default()).unwrap();
        assert!(run_shot(&Model::default(), &seq, 0).is_err());
    }

    #[test]
    fn static_fields_are_refocused() {
        let mut m = Model::default();
        for s in &mut m.bath.species {
            s.rms_transverse_field = 0.0;
        }
        let b = backend(m, 2000);
        let r = b
            .evaluate(&Experiment::Echo {
                tau_echo: 5e-6,
                pulse: PulseAngle::PiMultiple(1.0),
            })
            .unwrap();
        assert_eq!(r.p1_mean, 1.0);
    }

    #[test]
    fn free_evolution_without_bath_is_identity() {
        let seq = parse_sequence("init S\nevolve 2us sep\nmeasure").unwrap();
        let out = run_sequence(&quiet_model(), &seq, 3).unwrap();
        assert_eq!(out, vec![true]);
    }

    #[test]
    fn readout_noise_alone_gives_no_covariance() {
        let mut o = SequenceOptions::default();
        o.fidelity_s = 0.5;
        o.fidelity_t = 0.5;
        let b = SemiclassicalBackend::new(Model::default(), o, 100_000, 1).unwrap();
        let r = b
            .evaluate(&Experiment::Correlation {
                tau_echo: 3e-6,
                tau_delay: 10e-6,
                mode: IntermediateMode::LockSinglet,
            })
            .unwrap();
        assert!(r.covariance.unwrap().abs() < 3.0 * r.cov_stderr.unwrap());
        assert!((r.p1_mean - 0.5).abs() < 3.0 * r.p1_stderr);
    }

    fn acc_from(pairs: impl Iterator<Item = (bool, bool)>) -> CovarianceAccumulator {
        let mut a = CovarianceAccumulator::default();
        for (x, y) in pairs {
            a.push(x, y);
        }
        a
    }

    #[test]
    fn covariance_extremes() {
        let n = 4000u64;
        let bits: Vec<bool> = (0..n).map(|i| (i * 2654435761 % 1000) < 500).collect();
        let same = acc_from(bits.iter().map(|&b| (b, b)));
        assert!((same.covariance() - 0.25).abs() < 3.0 * same.covariance_stderr() + 1e-3);
        let anti = acc_from(bits.iter().map(|&b| (b, !b)));
        assert!((anti.covariance() + 0.25).abs() < 3.0 * anti.covariance_stderr() + 1e-3);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let pairs: Vec<(bool, bool)> = (0..57u64).map(|i| (i % 3 == 0, i % 5 < 2 || i % 7 == 0)).collect();
        let acc = acc_from(pairs.iter().copied());
        let n = pairs.len() as f64;
        let loo: Vec<f64> = (0..pairs.len())
            .map(|skip| {
                acc_from(pairs.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| *p)).covariance()
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / n;
        let var = (n - 1.0) / n * loo.iter().map(|c| (c - mean).powi(2)).sum::<f64>();
        assert_abs_diff_eq!(acc.covariance_stderr(), var.sqrt(), epsilon = 1e-14);
        // direct sample moments
        let m12 = pairs.iter().filter(|p| p.0 && p.1).count() as f64 / n;
        let m1 = pairs.iter().filter(|p| p.0).count() as f64 / n;
        let m2 = pairs.iter().filter(|p| p.1).count() as f64 / n;
        assert_abs_diff_eq!(acc.covariance(), m12 - m1 * m2, epsilon = 1e-15);
    }

    #[test]
    fn covariance_needs_records() {
        assert!(covariance(&[]).is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let seq = build_correlation_experiment(3e-6, 12e-6, IntermediateMode::UpDownPi, &SequenceOptions::default()).unwrap();
        let one = SemiclassicalBackend::new(Model::default(), SequenceOptions::default(), 3000, 1).unwrap();
        let four = SemiclassicalBackend::new(Model::default(), SequenceOptions::default(), 3000, 4).unwrap();
        assert_eq!(one.run_counts(&seq).unwrap(), four.run_counts(&seq).unwrap());
        assert_eq!(one.records(&seq).unwrap(), four.records(&seq).unwrap());
    }

    /// One species, one macro-spin per dot. The echo phase of a cosine
    /// component with amplitude B and phase φ is
    /// k·r·(4B/ω)·sin²(ωT/2)·sin(φ + ωT) for half-time T.
    fn single_species_model() -> Model {
        let mut m = Model::default();
        let mut s = NuclearSpecies::new("75As", 7.315, 1.0);
        s.rms_transverse_field = 4e-3;
        m.bath.species = vec![s];
        m.bath.macro_spins_per_species = 1;
        m
    }

    #[test]
    fn single_species_matches_echo_filter() {
        let m = single_species_model();
        let omega = m.bath.species[0].gamma * m.electron.b_ext;
        let k = BOHR_MAGNETON * m.electron.g_par / HBAR * m.electron.g_perp_ratio;
        let period = 2.0 * PI / omega;
        for t_half in [period, 0.25 * period, 0.5 * period, 0.37 * period] {
            let seq = build_echo(2.0 * t_half, &SequenceOptions::default()).unwrap();
            let mut expected = 0.0;
            let mut got = 0.0;
            for shot in 0..400 {
                let mut rng = substream(m.bath.rng_seed, StreamPurpose::Bath, shot);
                let (l, r) = sample_bath(&m.bath, m.electron.b_ext, &mut rng);
                let filter = 4.0 / omega * (omega * t_half / 2.0).sin().powi(2);
                let phase = |c: num_complex::Complex64| k * filter * c.norm() * (c.arg() + omega * t_half).sin();
                let alpha = phase(l.total_phasor()) - phase(r.total_phasor());
                expected += 0.5 * (1.0 + alpha.cos());
                // the engine's own probability via the Bloch vector
                let mut q = QubitState::SINGLET;
                let (mut l2, mut r2) = (l.clone(), r.clone());
                for seg in &seq.segments {
                    if let Segment::FreeEvolve { duration, .. } = *seg {
                        let il = l2.evolve_integrate(duration, 0.0, 0.0, false);
                        let ir = r2.evolve_integrate(duration, 0.0, 0.0, false);
                        q.rotate_z(physics::accumulated_qubit_phase(&m.electron, &il, &ir));
                    } else if let Segment::ExchangePulse { .. } = *seg {
                        q.rotate_x(PI);
                    }
                }
                got += q.singlet_probability().unwrap();
            }
            assert_abs_diff_eq!(got / 400.0, expected / 400.0, epsilon = 1e-9);
            if t_half == period {
                assert_abs_diff_eq!(got / 400.0, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn knight_free_modes_agree() {
        let mut m = Model::default();
        m.bath.knight_rms = 0.0;
        let b = backend(m, 4000);
        let eval = |mode| {
            b.evaluate(&Experiment::Correlation {
                tau_echo: 3.1e-6,
                tau_delay: 15e-6,
                mode,
            })
            .unwrap()
        };
        let lock = eval(IntermediateMode::LockSinglet);
        let ud = eval(IntermediateMode::UpDown);
        // common random numbers: with no Knight drive the bath never sees the
        // electron, so the outcomes coincide shot for shot
        assert_eq!(lock.covariance, ud.covariance);
    }

    #[test]
    fn pearson_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(pearson(&a, &[2.0, 4.0, 6.0, 8.0]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pearson(&a, &[-1.0, -2.0, -3.0, -4.0]), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_grids_are_rejected() {
        let b = backend(Model::default(), 10);
        assert!(sweep_echo(&b, &[]).is_err());
        assert!(sweep_delay(&b, 1e-6, &[], IntermediateMode::UpDown).is_err());
    }
}
