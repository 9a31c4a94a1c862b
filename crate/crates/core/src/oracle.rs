// SPDX-License-Identifier: Apache-2.0

//! Exact small-bath backend.
//!
//! The qubit couples to a few spin-1/2 nuclei through a pure-dephasing
//! Hamiltonian. In the ↑↓ / ↓↑ branches the bath evolves under
//! `H_Z ± ½·B̂` with `H_Z = Σ ω_k I_z,k` and
//! `B̂ = Σ_left a_k (I_z,k + λ I_x,k) − Σ_right a_k (I_z,k + λ I_x,k)`.
//! An echo cycle is then a pair of Kraus operators on the bath, and the
//! covariance of two cycles follows from traces over the bath alone.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::bath::{BathConfig, KnightWeights};
use crate::engine::{Backend, Experiment, Model, SweepResult};
use crate::error::{Error, Result};
use crate::physics::{DotPresence, ElectronParams, NuclearSpecies};
use crate::sequence::{exchange_angle, IntermediateMode, JMap, SequenceOptions};

pub type CMatrix = DMatrix<Complex64>;

pub const MAX_SPINS: usize = 12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Electron branch of the separated qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    UpDown,
    DownUp,
    /// Both electrons in one dot; no hyperfine coupling.
    Locked,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::UpDown => 0.5,
            Branch::DownUp => -0.5,
            Branch::Locked => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallBathSpec {
    pub n_left: usize,
    pub n_right: usize,
    /// Hyperfine couplings a_k, rad/s, left nuclei first.
    pub couplings: Vec<f64>,
    /// Nuclear Zeeman frequencies ω_k, rad/s.
    pub zeeman: Vec<f64>,
    pub transverse_ratio: f64,
}

impl Default for SmallBathSpec {
    /// Three nuclei per dot at ω = 1 rad/µs with couplings around 0.4 rad/µs.
    fn default() -> Self {
        SmallBathSpec {
            n_left: 3,
            n_right: 3,
            couplings: [1.0, 0.8, 1.2, 0.9, 1.1, 1.0].iter().map(|x| 0.4e6 * x).collect(),
            zeeman: vec![1e6; 6],
            transverse_ratio: 0.1,
        }
    }
}

impl SmallBathSpec {
    pub fn spins(&self) -> usize {
        self.n_left + self.n_right
    }

    pub fn dim(&self) -> usize {
        1 << self.spins()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.spins();
        if n > MAX_SPINS {
            return Err(Error::DimensionOverflow {
                spins: n,
                max: MAX_SPINS,
            });
        }
        if self.couplings.len() != n || self.zeeman.len() != n {
            return Err(Error::param(
                "couplings",
                format!("need {n} couplings and Zeeman frequencies, got {} and {}", self.couplings.len(), self.zeeman.len()),
            ));
        }
        if self.couplings.iter().chain(&self.zeeman).any(|x| !x.is_finite()) {
            return Err(Error::param("couplings", "must be finite"));
        }
        if !(self.transverse_ratio.is_finite()) {
            return Err(Error::param("transverse_ratio", "must be finite"));
        }
        Ok(())
    }

    fn dot_sign(&self, k: usize) -> f64 {
        if k < self.n_left {
            1.0
        } else {
            -1.0
        }
    }

    /// Single-spin Hamiltonian of nucleus `k` in branch `branch`, as the
    /// 2×2 matrix `(b_z/2)σ_z + (b_x/2)σ_x`.
    fn local_field(&self, k: usize, branch: Branch) -> (f64, f64) {
        let s = branch.sign() * self.dot_sign(k) * self.couplings[k];
        (self.zeeman[k] + s, s * self.transverse_ratio)
    }
}

fn local_unitary(bz: f64, bx: f64, t: f64) -> Matrix2<Complex64> {
    let b = bz.hypot(bx);
    if b == 0.0 {
        return Matrix2::identity();
    }
    let (s, c) = (0.5 * b * t).sin_cos();
    let (nz, nx) = (bz / b, bx / b);
    Matrix2::new(
        Complex64::new(c, -s * nz),
        Complex64::new(0.0, -s * nx),
        Complex64::new(0.0, -s * nx),
        Complex64::new(c, s * nz),
    )
}

fn kron_all(factors: &[Matrix2<Complex64>]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        let f = CMatrix::from_iterator(2, 2, f.iter().copied());
        out = out.kronecker(&f);
    }
    out
}

/// `U_q(t) = exp(−i t (H_Z + s_q B̂))`. The Hamiltonian is a sum of
/// single-spin terms, so the propagator is a Kronecker product of 2×2
/// exponentials.
pub fn conditional_propagator(spec: &SmallBathSpec, branch: Branch, t: f64) -> Result<CMatrix> {
    spec.validate()?;
    let factors: Vec<_> = (0..spec.spins())
        .map(|k| {
            let (bz, bx) = spec.local_field(k, branch);
            local_unitary(bz, bx, t)
        })
        .collect();
    Ok(kron_all(&factors))
}

fn embed(op: &Matrix2<Complex64>, k: usize, n: usize) -> CMatrix {
    let mut factors = vec![Matrix2::identity(); n];
    factors[k] = *op;
    kron_all(&factors)
}

/// The full conditional Hamiltonian as a dense matrix.
pub fn conditional_hamiltonian(spec: &SmallBathSpec, branch: Branch) -> Result<CMatrix> {
    spec.validate()?;
    let n = spec.spins();
    let half = Complex64::new(0.5, 0.0);
    let sz = Matrix2::new(half, Complex64::ZERO, Complex64::ZERO, -half);
    let sx = Matrix2::new(Complex64::ZERO, half, half, Complex64::ZERO);
    let mut h = CMatrix::zeros(spec.dim(), spec.dim());
    for k in 0..n {
        let (bz, bx) = spec.local_field(k, branch);
        h += embed(&(sz * Complex64::from(bz) + sx * Complex64::from(bx)), k, n);
    }
    Ok(h)
}

/// Outcome operators of one echo cycle on the bath.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausPair {
    pub m_s: CMatrix,
    pub m_t: CMatrix,
}

impl KrausPair {
    /// Largest entry of `M_S†M_S + M_T†M_T − 1`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self.m_s.adjoint() * &self.m_s + self.m_t.adjoint() * &self.m_t;
        max_abs(&(sum - CMatrix::identity(self.m_s.nrows(), self.m_s.ncols())))
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Echo cycle with refocusing angle `theta`: S, τ/2, x-rotation, τ/2,
/// S/T0 measurement.
pub fn iem_kraus_theta(spec: &SmallBathSpec, tau_echo: f64, theta: f64) -> Result<KrausPair> {
    if !(tau_echo > 0.0) {
        return Err(Error::param("tau_echo", "must be positive"));
    }
    let u0 = conditional_propagator(spec, Branch::UpDown, tau_echo / 2.0)?;
    let u1 = conditional_propagator(spec, Branch::DownUp, tau_echo / 2.0)?;
    let (s, c) = (theta / 2.0).sin_cos();
    let u00 = &u0 * &u0;
    let u11 = &u1 * &u1;
    let u01 = &u0 * &u1;
    let u10 = &u1 * &u0;
    let half = Complex64::from(0.5);
    let m_s = ((&u00 + &u11) * Complex64::from(c) - (&u01 + &u10) * (I * s)) * half;
    let m_t = ((&u00 - &u11) * Complex64::from(c) - (&u01 - &u10) * (I * s)) * half;
    Ok(KrausPair { m_s, m_t })
}

pub fn iem_kraus(spec: &SmallBathSpec, tau_echo: f64) -> Result<KrausPair> {
    iem_kraus_theta(spec, tau_echo, PI)
}

/// Bath channel of the intermediate block as weighted unitaries:
/// `E(ρ) = Σ w_i V_i ρ V_i†`.
#[derive(Debug, Clone)]
pub struct BathChannel {
    pub terms: Vec<(f64, CMatrix)>,
}

impl BathChannel {
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for (w, v) in &self.terms {
            out += (v * rho * v.adjoint()) * Complex64::from(*w);
        }
        out
    }
}

/// Intermediate block of length `gap`. Locked singlet gives pure Zeeman
/// evolution; the separated modes start in ↑↓ and apply an x-rotation by
/// `pulse_angle` halfway, after which the electron is discarded.
pub fn intermediate_channel(spec: &SmallBathSpec, locked: bool, gap: f64, pulse_angle: f64) -> Result<BathChannel> {
    if locked {
        return Ok(BathChannel {
            terms: vec![(1.0, conditional_propagator(spec, Branch::Locked, gap)?)],
        });
    }
    let u0 = conditional_propagator(spec, Branch::UpDown, gap / 2.0)?;
    let u1 = conditional_propagator(spec, Branch::DownUp, gap / 2.0)?;
    let (s, c) = (pulse_angle / 2.0).sin_cos();
    let mut terms = vec![(c * c, &u0 * &u0)];
    if s != 0.0 {
        terms.push((s * s, &u1 * &u0));
    }
    Ok(BathChannel { terms })
}

fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

fn sandwich(m: &CMatrix, rho: &CMatrix) -> CMatrix {
    m * rho * m.adjoint()
}

/// Exact outcome statistics of the two-cycle experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactStatistics {
    pub p_s1: f64,
    pub p_s2: f64,
    pub p_ss: f64,
}

impl ExactStatistics {
    pub fn covariance(&self) -> f64 {
        self.p_ss - self.p_s1 * self.p_s2
    }

    /// Statistics of the reported bits after imperfect readout.
    pub fn with_readout(&self, fidelity_s: f64, fidelity_t: f64) -> Self {
        let rep = |p: f64| fidelity_s * p + (1.0 - fidelity_t) * (1.0 - p);
        let (a, b) = (fidelity_s, 1.0 - fidelity_t);
        // P(report S, report S) summed over the true outcome pairs
        let p_st = self.p_s1 - self.p_ss;
        let p_ts = self.p_s2 - self.p_ss;
        let p_tt = 1.0 - self.p_s1 - self.p_s2 + self.p_ss;
        ExactStatistics {
            p_s1: rep(self.p_s1),
            p_s2: rep(self.p_s2),
            p_ss: a * a * self.p_ss + a * b * (p_st + p_ts) + b * b * p_tt,
        }
    }
}

pub fn maximally_mixed(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim) * Complex64::from(1.0 / dim as f64)
}

/// Exact statistics for two echoes of length `tau_echo` separated by an
/// intermediate block of length `gap`, starting from the fully mixed bath.
pub fn exact_statistics(
    spec: &SmallBathSpec,
    tau_echo: f64,
    gap: f64,
    mode: &Intermediate,
) -> Result<ExactStatistics> {
    let k = iem_kraus(spec, tau_echo)?;
    let e = intermediate_channel(spec, mode.locked, gap, mode.angle)?;
    let rho = maximally_mixed(spec.dim());
    let after_s = sandwich(&k.m_s, &rho);
    let after_t = sandwich(&k.m_t, &rho);
    let p_s1 = trace_re(&after_s);
    let p_ss = trace_re(&sandwich(&k.m_s, &e.apply(&after_s)));
    let p_s2 = trace_re(&sandwich(&k.m_s, &e.apply(&(after_s + after_t))));
    Ok(ExactStatistics { p_s1, p_s2, p_ss })
}

/// Resolved intermediate block for the exact backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intermediate {
    pub locked: bool,
    pub angle: f64,
}

impl Intermediate {
    pub const LOCK: Intermediate = Intermediate {
        locked: true,
        angle: 0.0,
    };

    pub fn separated(angle: f64) -> Self {
        Intermediate { locked: false, angle }
    }

    pub fn from_mode(mode: IntermediateMode, jmap: &JMap, pulse_duration: f64) -> Self {
        match mode {
            IntermediateMode::LockSinglet => Self::LOCK,
            IntermediateMode::UpDown => Self::separated(0.0),
            IntermediateMode::UpDownPi => Self::separated(PI),
            IntermediateMode::UpDownTheta { amplitude } => Self::separated(jmap.angle(amplitude, pulse_duration)),
        }
    }
}

pub fn exact_covariance(spec: &SmallBathSpec, tau_echo: f64, gap: f64, mode: &Intermediate) -> Result<f64> {
    Ok(exact_statistics(spec, tau_echo, gap, mode)?.covariance())
}

/// Trace distance `½‖A − B‖₁` of two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a - b;
    let herm = (&d + d.adjoint()) * Complex64::from(0.5);
    0.5 * herm.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
}

/// Trace distance between the bath states reached from `rho` in the two
/// electron branches of the intermediate block. Zero means the qubit and the
/// bath stay separable under pure dephasing.
pub fn entanglement_witness(spec: &SmallBathSpec, mode: &Intermediate, gap: f64, rho: &CMatrix) -> Result<f64> {
    if mode.locked {
        let u = conditional_propagator(spec, Branch::Locked, gap)?;
        return Ok(trace_distance(&sandwich(&u, rho), &sandwich(&u, rho)));
    }
    let u0 = conditional_propagator(spec, Branch::UpDown, gap / 2.0)?;
    let u1 = conditional_propagator(spec, Branch::DownUp, gap / 2.0)?;
    let (a, b) = if mode.angle == 0.0 {
        (&u0 * &u0, &u1 * &u1)
    } else {
        (&u1 * &u0, &u0 * &u1)
    };
    Ok(trace_distance(&sandwich(&a, rho), &sandwich(&b, rho)))
}

/// Bath state after a first echo returned singlet, from the fully mixed bath.
pub fn post_singlet_state(spec: &SmallBathSpec, tau_echo: f64) -> Result<CMatrix> {
    let k = iem_kraus(spec, tau_echo)?;
    let rho = sandwich(&k.m_s, &maximally_mixed(spec.dim()));
    let p = trace_re(&rho);
    Ok(rho * Complex64::from(1.0 / p))
}

/// Exact evaluation of the sweep experiments.
#[derive(Debug, Clone)]
pub struct ExactBackend {
    pub spec: SmallBathSpec,
    pub jmap: JMap,
    pub pulse_duration: f64,
    pub fidelity_s: f64,
    pub fidelity_t: f64,
}

impl ExactBackend {
    pub fn new(spec: SmallBathSpec, options: &SequenceOptions) -> Result<Self> {
        spec.validate()?;
        Ok(ExactBackend {
            spec,
            jmap: options.jmap,
            pulse_duration: options.pulse_duration,
            fidelity_s: options.fidelity_s,
            fidelity_t: options.fidelity_t,
        })
    }
}

impl Backend for ExactBackend {
    fn evaluate(&self, exp: &Experiment) -> Result<SweepResult> {
        let exact = |p1: f64, p2: Option<f64>, cov: Option<f64>| SweepResult {
            axis: 0.0,
            shots: 0,
            p1_mean: p1,
            p1_stderr: 0.0,
            p2_mean: p2,
            p2_stderr: p2.map(|_| 0.0),
            covariance: cov,
            cov_stderr: cov.map(|_| 0.0),
        };
        match *exp {
            Experiment::Echo { tau_echo, pulse } => {
                let k = iem_kraus_theta(&self.spec, tau_echo, exchange_angle(&self.jmap, pulse))?;
                let p = trace_re(&sandwich(&k.m_s, &maximally_mixed(self.spec.dim())));
                let p = self.fidelity_s * p + (1.0 - self.fidelity_t) * (1.0 - p);
                Ok(exact(p, None, None))
            }
            Experiment::Correlation {
                tau_echo,
                tau_delay,
                mode,
            } => {
                if tau_delay < tau_echo {
                    return Err(Error::Sequence("tau_delay is shorter than tau_echo".into()));
                }
                let m = Intermediate::from_mode(mode, &self.jmap, self.pulse_duration);
                let st = exact_statistics(&self.spec, tau_echo, tau_delay - tau_echo, &m)?
                    .with_readout(self.fidelity_s, self.fidelity_t);
                Ok(exact(st.p_s1, Some(st.p_s2), Some(st.covariance())))
            }
        }
    }

    fn name(&self) -> &'static str {
        "exact"
    }
}

/// Semiclassical model matching `spec`: every nucleus becomes its own
/// single-macro-spin species in one dot, with the transverse and
/// longitudinal spreads of a fully mixed spin-1/2 and a Knight shift of
/// `knight_factor · a_k / 2` at full polarisation.
pub fn mirror_model(spec: &SmallBathSpec, knight_factor: f64, seed: u64) -> Result<Model> {
    spec.validate()?;
    let n = spec.spins();
    if n == 0 {
        return Err(Error::param("spins", "the mirror needs at least one nucleus"));
    }
    let electron = ElectronParams {
        b_ext: 1.0,
        g_perp_ratio: spec.transverse_ratio.abs(),
        ..ElectronParams::default()
    };
    let k_e = electron.gyro().abs();
    let mean_a = spec.couplings.iter().map(|a| a.abs()).sum::<f64>() / n as f64;
    let species = (0..n)
        .map(|k| {
            let a = spec.couplings[k].abs();
            let mut s = NuclearSpecies::new(format!("n{k}"), spec.zeeman[k] / (2.0 * PI * 1e6), 1.0 / n as f64);
            s.gamma = spec.zeeman[k];
            s.rms_transverse_field = a / (k_e * 2f64.sqrt());
            s.rms_longitudinal_field = a / (2.0 * k_e);
            s.knight_scale = if mean_a > 0.0 { a / mean_a } else { 0.0 };
            s.presence = if k < spec.n_left { DotPresence::Left } else { DotPresence::Right };
            s
        })
        .collect();
    let model = Model {
        electron,
        bath: BathConfig {
            species,
            macro_spins_per_species: 1,
            knight_rms: knight_factor * mean_a / 2.0,
            knight_weights: KnightWeights::Uniform,
            rng_seed: seed,
        },
        jmap: JMap::default(),
    };
    model.validate()?;
    Ok(model)
}
