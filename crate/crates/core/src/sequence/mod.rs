// SPDX-License-Identifier: Apache-2.0

//! Pulse sequences for the S–T0 qubit.
//!
//! Bloch convention: the poles ±z are ↑↓ and ↓↑, +x is S and −x is T0.
//! Exchange rotates about x, the hyperfine gradient rotates about z.

pub mod dsl;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use dsl::{parse_sequence, render_sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElectronConfig {
    /// Both electrons in one dot, ⟨S_z⟩ = 0 on both sides.
    Merged,
    /// One electron per dot, ⟨S_z⟩_L = +r_z/2 and ⟨S_z⟩_R = −r_z/2.
    Separated,
}

/// Rotation requested by an exchange pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseAngle {
    /// Instantaneous rotation by `k·π`.
    PiMultiple(f64),
    /// Finite pulse at a detuning amplitude; the angle follows from a [`JMap`].
    Amplitude { amplitude: f64, duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    InitSinglet,
    /// Adiabatic preparation of ↑↓; with probability `adiabatic_error` the
    /// qubit stays in S.
    InitUpDown { adiabatic_error: f64 },
    /// Singlet held with both electrons in one dot.
    LockSinglet { duration: f64 },
    FreeEvolve { duration: f64, electron: ElectronConfig },
    ExchangePulse { angle: PulseAngle, angle_error_rms: f64 },
    MeasureST0 { fidelity_s: f64, fidelity_t: f64 },
}

impl Segment {
    /// Wall time of the segment. Pulses, initialisation and readout take none.
    pub fn duration(&self) -> f64 {
        match *self {
            Segment::LockSinglet { duration } | Segment::FreeEvolve { duration, .. } => duration,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Sequence(format!("{name} {p} not in [0, 1]")))
            }
        };
        let dur = |d: f64| {
            if d >= 0.0 && d.is_finite() {
                Ok(())
            } else {
                Err(Error::Sequence(format!("duration {d} must be finite and >= 0")))
            }
        };
        match *self {
            Segment::InitSinglet => Ok(()),
            Segment::InitUpDown { adiabatic_error } => prob("adiabatic error", adiabatic_error),
            Segment::LockSinglet { duration } | Segment::FreeEvolve { duration, .. } => dur(duration),
            Segment::ExchangePulse { angle, angle_error_rms } => {
                if !(angle_error_rms >= 0.0 && angle_error_rms.is_finite()) {
                    return Err(Error::Sequence(format!("angle error {angle_error_rms} must be >= 0")));
                }
                match angle {
                    PulseAngle::PiMultiple(k) if !k.is_finite() => Err(Error::Sequence("pulse angle must be finite".into())),
                    PulseAngle::Amplitude { amplitude, duration } => {
                        if !amplitude.is_finite() {
                            return Err(Error::Sequence("pulse amplitude must be finite".into()));
                        }
                        dur(duration)
                    }
                    _ => Ok(()),
                }
            }
            Segment::MeasureST0 { fidelity_s, fidelity_t } => {
                prob("singlet fidelity", fidelity_s)?;
                prob("triplet fidelity", fidelity_t)
            }
        }
    }

    fn initialises(&self) -> bool {
        matches!(self, Segment::InitSinglet | Segment::InitUpDown { .. } | Segment::LockSinglet { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSequence {
    pub segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let seq = PulseSequence { segments };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Sequence("empty sequence".into()));
        }
        let mut initialised = false;
        for (i, seg) in self.segments.iter().enumerate() {
            seg.validate().map_err(|e| Error::Sequence(format!("segment {}: {e}", i + 1)))?;
            initialised |= seg.initialises();
            if matches!(seg, Segment::MeasureST0 { .. }) && !initialised {
                return Err(Error::Sequence(format!("segment {}: measure before init", i + 1)));
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    pub fn measurement_count(&self) -> usize {
        self.segments.iter().filter(|s| matches!(s, Segment::MeasureST0 { .. })).count()
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_sequence(self))
    }
}

/// Bloch vector of the S–T0 qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub bloch: [f64; 3],
}

impl QubitState {
    pub const SINGLET: QubitState = QubitState { bloch: [1.0, 0.0, 0.0] };
    pub const TRIPLET0: QubitState = QubitState { bloch: [-1.0, 0.0, 0.0] };
    pub const UP_DOWN: QubitState = QubitState { bloch: [0.0, 0.0, 1.0] };

    pub fn norm(&self) -> f64 {
        self.bloch.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Exchange rotation about x. Takes ↑↓ to ↓↑ at `theta = π`.
    pub fn rotate_x(&mut self, theta: f64) {
        let [x, y, z] = self.bloch;
        let (s, c) = theta.sin_cos();
        self.bloch = [x, y * c - z * s, y * s + z * c];
    }

    /// Gradient precession about z by the accumulated qubit phase.
    pub fn rotate_z(&mut self, phi: f64) {
        let [x, y, z] = self.bloch;
        let (s, c) = phi.sin_cos();
        self.bloch = [x * c - y * s, x * s + y * c, z];
    }

    /// Rotation generated by `(theta_x, 0, theta_z)`: an exchange pulse with a
    /// gradient acting during it.
    pub fn rotate_xz(&mut self, theta_x: f64, theta_z: f64) {
        let angle = theta_x.hypot(theta_z);
        if angle == 0.0 {
            return;
        }
        let n = [theta_x / angle, 0.0, theta_z / angle];
        let r = self.bloch;
        let (s, c) = angle.sin_cos();
        let cross = [n[1] * r[2] - n[2] * r[1], n[2] * r[0] - n[0] * r[2], n[0] * r[1] - n[1] * r[0]];
        let dot = n[0] * r[0] + n[2] * r[2];
        for i in 0..3 {
            self.bloch[i] = r[i] * c + cross[i] * s + n[i] * dot * (1.0 - c);
        }
    }

    pub fn singlet_probability(&self) -> Result<f64> {
        if self.norm() > 1.0 + 1e-9 {
            return Err(Error::Sequence(format!("Bloch vector norm {} exceeds 1", self.norm())));
        }
        Ok((0.5 * (1.0 + self.bloch[0])).clamp(0.0, 1.0))
    }
}

/// Exchange strength versus detuning amplitude, `J(A) = j0·exp(A/amp_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JMap {
    /// rad/s
    pub j0: f64,
    pub amp_scale: f64,
}

impl Default for JMap {
    fn default() -> Self {
        JMap {
            j0: std::f64::consts::TAU * 1e6,
            amp_scale: 1.0,
        }
    }
}

impl JMap {
    pub fn validate(&self) -> Result<()> {
        if !(self.j0 > 0.0 && self.j0.is_finite()) {
            return Err(Error::param("j0", "must be positive"));
        }
        if !(self.amp_scale > 0.0 && self.amp_scale.is_finite()) {
            return Err(Error::param("amp_scale", "must be positive"));
        }
        Ok(())
    }

    pub fn exchange(&self, amplitude: f64) -> f64 {
        self.j0 * (amplitude / self.amp_scale).exp()
    }

    pub fn angle(&self, amplitude: f64, duration: f64) -> f64 {
        self.exchange(amplitude) * duration
    }

    /// Amplitude giving rotation `theta` in `duration`.
    pub fn amplitude_for(&self, theta: f64, duration: f64) -> Result<f64> {
        if !(theta > 0.0 && duration > 0.0) {
            return Err(Error::param("duration", "calibration needs a positive angle and duration"));
        }
        Ok(self.amp_scale * (theta / (self.j0 * duration)).ln())
    }

    pub fn calibrate_pi(&self, duration: f64) -> Result<f64> {
        self.amplitude_for(PI, duration)
    }
}

/// Pulse angle in radians, resolving amplitudes through `jmap`.
pub fn exchange_angle(jmap: &JMap, angle: PulseAngle) -> f64 {
    match angle {
        PulseAngle::PiMultiple(k) => k * PI,
        PulseAngle::Amplitude { amplitude, duration } => jmap.angle(amplitude, duration),
    }
}

/// What the qubit does between the two echoes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntermediateMode {
    LockSinglet,
    UpDown,
    /// ↑↓ with a calibrated exchange π pulse halfway through.
    UpDownPi,
    /// ↑↓ with an exchange pulse of the given amplitude halfway through.
    UpDownTheta { amplitude: f64 },
}

impl IntermediateMode {
    pub const NAMES: [&'static str; 3] = ["lock_singlet", "updown", "updown_pi"];

    pub fn name(&self) -> String {
        match self {
            IntermediateMode::LockSinglet => "lock_singlet".into(),
            IntermediateMode::UpDown => "updown".into(),
            IntermediateMode::UpDownPi => "updown_pi".into(),
            IntermediateMode::UpDownTheta { amplitude } => format!("updown_theta:{amplitude}"),
        }
    }
}

impl FromStr for IntermediateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lock_singlet" => Ok(IntermediateMode::LockSinglet),
            "updown" => Ok(IntermediateMode::UpDown),
            "updown_pi" => Ok(IntermediateMode::UpDownPi),
            _ => {
                if let Some(a) = s.strip_prefix("updown_theta:") {
                    if let Ok(amplitude) = a.parse::<f64>() {
                        return Ok(IntermediateMode::UpDownTheta { amplitude });
                    }
                }
                Err(Error::Config(format!(
                    "unknown mode `{s}`; valid modes: {}, updown_theta:<amplitude>",
                    Self::NAMES.join(", ")
                )))
            }
        }
    }
}

/// Knobs shared by the sequence builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceOptions {
    pub fidelity_s: f64,
    pub fidelity_t: f64,
    pub adiabatic_error: f64,
    /// RMS angle error of the echo π pulses, rad.
    pub echo_error_rms: f64,
    /// RMS angle error of the intermediate exchange pulse, rad.
    pub intermediate_error_rms: f64,
    /// Duration of the intermediate exchange pulse, s. Zero selects an
    /// instantaneous ideal rotation.
    pub pulse_duration: f64,
    pub jmap: JMap,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            fidelity_s: 1.0,
            fidelity_t: 1.0,
            adiabatic_error: 0.0,
            echo_error_rms: 0.0,
            intermediate_error_rms: 0.8,
            pulse_duration: 20e-9,
            jmap: JMap::default(),
        }
    }
}

impl SequenceOptions {
    /// Options with every pulse imperfection removed.
    pub fn ideal() -> Self {
        SequenceOptions {
            intermediate_error_rms: 0.0,
            pulse_duration: 0.0,
            ..Default::default()
        }
    }

    fn measure(&self) -> Segment {
        Segment::MeasureST0 {
            fidelity_s: self.fidelity_s,
            fidelity_t: self.fidelity_t,
        }
    }
}

fn echo_segments(tau_echo: f64, pulse: PulseAngle, error_rms: f64, opts: &SequenceOptions) -> [Segment; 5] {
    let half = Segment::FreeEvolve {
        duration: tau_echo / 2.0,
        electron: ElectronConfig::Separated,
    };
    [
        Segment::InitSinglet,
        half,
        Segment::ExchangePulse {
            angle: pulse,
            angle_error_rms: error_rms,
        },
        half,
        opts.measure(),
    ]
}

fn check_tau(tau_echo: f64) -> Result<()> {
    if tau_echo > 0.0 && tau_echo.is_finite() {
        Ok(())
    } else {
        Err(Error::param("tau_echo", format!("{tau_echo} must be positive")))
    }
}

/// Hahn echo: S, τ/2 separated, π, τ/2 separated, measure.
pub fn build_echo(tau_echo: f64, opts: &SequenceOptions) -> Result<PulseSequence> {
    build_echo_with_pulse(tau_echo, PulseAngle::PiMultiple(1.0), opts)
}

/// Hahn echo whose refocusing pulse is `pulse` instead of an ideal π.
pub fn build_echo_with_pulse(tau_echo: f64, pulse: PulseAngle, opts: &SequenceOptions) -> Result<PulseSequence> {
    check_tau(tau_echo)?;
    PulseSequence::new(echo_segments(tau_echo, pulse, opts.echo_error_rms, opts).to_vec())
}

/// Two echoes whose π pulses are `tau_delay` apart, with the intermediate
/// block filling the gap `tau_delay − tau_echo`.
pub fn build_correlation_experiment(
    tau_echo: f64,
    tau_delay: f64,
    mode: IntermediateMode,
    opts: &SequenceOptions,
) -> Result<PulseSequence> {
    check_tau(tau_echo)?;
    if !(tau_delay >= tau_echo && tau_delay.is_finite()) {
        return Err(Error::Sequence(format!(
            "tau_delay {tau_delay} s is shorter than tau_echo {tau_echo} s"
        )));
    }
    let gap = tau_delay - tau_echo;
    let echo = echo_segments(tau_echo, PulseAngle::PiMultiple(1.0), opts.echo_error_rms, opts);
    let mut segments = echo.to_vec();
    let up_down = Segment::InitUpDown {
        adiabatic_error: opts.adiabatic_error,
    };
    let sep = |duration| Segment::FreeEvolve {
        duration,
        electron: ElectronConfig::Separated,
    };
    let flipped = |angle| {
        [
            up_down,
            sep(gap / 2.0),
            Segment::ExchangePulse {
                angle,
                angle_error_rms: opts.intermediate_error_rms,
            },
            sep(gap / 2.0),
        ]
    };
    match mode {
        IntermediateMode::LockSinglet => segments.push(Segment::LockSinglet { duration: gap }),
        IntermediateMode::UpDown => segments.extend([up_down, sep(gap)]),
        IntermediateMode::UpDownPi => {
            let angle = if opts.pulse_duration > 0.0 {
                PulseAngle::Amplitude {
                    amplitude: opts.jmap.calibrate_pi(opts.pulse_duration)?,
                    duration: opts.pulse_duration,
                }
            } else {
                PulseAngle::PiMultiple(1.0)
            };
            segments.extend(flipped(angle));
        }
        IntermediateMode::UpDownTheta { amplitude } => {
            if opts.pulse_duration <= 0.0 {
                return Err(Error::param("pulse_duration", "an amplitude pulse needs a positive duration"));
            }
            segments.extend(flipped(PulseAngle::Amplitude {
                amplitude,
                duration: opts.pulse_duration,
            }));
        }
    }
    segments.extend(echo);
    PulseSequence::new(segments)
}
