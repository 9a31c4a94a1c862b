// SPDX-License-Identifier: Apache-2.0

//! Semiclassical macro-spin model of the two per-dot nuclear baths.
//!
//! Each species in each dot is resolved into `K` macro-spins. A macro-spin is
//! a transverse field phasor `c` rotating at its own Larmor frequency, so the
//! transverse Overhauser field is `B⊥(t) = Re Σ c_k e^{iω_k t}` and every
//! evolution is a pure phase update. The electron acts back on the bath
//! through the Knight shift: while a dot holds ⟨S_z⟩ ≠ 0 its macro-spins
//! precess at `ω_k + 2⟨S_z⟩ · knight_rms · w_k`.

use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::physics::{self, FieldIntegrals, NuclearSpecies};

/// How the Knight coupling weights fall off across the macro-spins of a
/// species. Weights are normalised to unit mean within each species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KnightWeights {
    Uniform,
    /// `w_k ∝ exp(−2k/K)`: an electron envelope that samples nuclei at
    /// varying density.
    #[default]
    ExponentialEnvelope,
}

impl KnightWeights {
    pub fn name(self) -> &'static str {
        match self {
            KnightWeights::Uniform => "uniform",
            KnightWeights::ExponentialEnvelope => "exponential",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform" => Some(KnightWeights::Uniform),
            "exponential" | "exponential-envelope" => Some(KnightWeights::ExponentialEnvelope),
            _ => None,
        }
    }

    /// Normalised weights for `k` macro-spins.
    pub fn weights(self, k: usize) -> Vec<f64> {
        let raw: Vec<f64> = match self {
            KnightWeights::Uniform => vec![1.0; k],
            KnightWeights::ExponentialEnvelope => (0..k).map(|i| (-2.0 * i as f64 / k as f64).exp()).collect(),
        };
        let mean = raw.iter().sum::<f64>() / k as f64;
        raw.into_iter().map(|w| w / mean).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathConfig {
    pub species: Vec<NuclearSpecies>,
    pub macro_spins_per_species: usize,
    /// Mean Knight shift of a fully polarised electron (⟨S_z⟩ = 1/2), rad/s.
    pub knight_rms: f64,
    pub knight_weights: KnightWeights,
    pub rng_seed: u64,
}

impl Default for BathConfig {
    fn default() -> Self {
        BathConfig {
            species: physics::gaas_species(4e-3, 2e-3, 0.002),
            macro_spins_per_species: 32,
            knight_rms: std::f64::consts::TAU * 8e3,
            knight_weights: KnightWeights::ExponentialEnvelope,
            rng_seed: 1,
        }
    }
}

impl BathConfig {
    pub fn validate(&self) -> Result<()> {
        physics::validate_species(&self.species)?;
        if self.macro_spins_per_species == 0 {
            return Err(Error::param("macro_spins_per_species", "must be at least 1"));
        }
        if !(self.knight_rms >= 0.0 && self.knight_rms.is_finite()) {
            return Err(Error::param("knight_rms", format!("{} must be finite and >= 0", self.knight_rms)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroSpin {
    /// Transverse field phasor, tesla.
    pub amplitude: Complex64,
    /// Larmor frequency, rad/s.
    pub omega: f64,
    /// Relative Knight coupling (unit mean within a species, times the
    /// species' `knight_scale`).
    pub knight_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DotBathState {
    pub macro_spins: Vec<MacroSpin>,
    /// Index range of each species' macro-spins, in config order.
    pub species: Vec<Range<usize>>,
    /// Static longitudinal Overhauser field, tesla.
    pub b_par: f64,
}

/// Draws independent left and right baths from the fully mixed ensemble.
pub fn sample_bath<R: Rng + ?Sized>(config: &BathConfig, b_ext: f64, rng: &mut R) -> (DotBathState, DotBathState) {
    let left = sample_dot(config, b_ext, rng, true);
    let right = sample_dot(config, b_ext, rng, false);
    (left, right)
}

fn sample_dot<R: Rng + ?Sized>(config: &BathConfig, b_ext: f64, rng: &mut R, left: bool) -> DotBathState {
    let k = config.macro_spins_per_species;
    let weights = config.knight_weights.weights(k);
    let norm: f64 = weights.iter().map(|w| w * w).sum();
    let mut macro_spins = Vec::with_capacity(k * config.species.len());
    let mut ranges = Vec::with_capacity(config.species.len());
    let mut b_par = 0.0;
    for s in &config.species {
        let present = if left { s.presence.in_left() } else { s.presence.in_right() };
        let rms = if present { s.rms_transverse_field } else { 0.0 };
        let omega0 = physics::larmor_omega(s, b_ext);
        let start = macro_spins.len();
        for &w in &weights {
            // Circular Gaussian with E|c|² = rms² · w²/Σw²; the species sum
            // is then circular Gaussian with E|Σc|² = rms².
            let sd = rms * w / norm.sqrt() * std::f64::consts::FRAC_1_SQRT_2;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let spread: f64 = rng.sample(StandardNormal);
            macro_spins.push(MacroSpin {
                amplitude: Complex64::new(sd * re, sd * im),
                omega: omega0 * (1.0 + s.frequency_spread * spread),
                knight_weight: w * s.knight_scale,
            });
        }
        ranges.push(start..macro_spins.len());
        let z: f64 = rng.sample(StandardNormal);
        if present {
            b_par += s.rms_longitudinal_field * z;
        }
    }
    DotBathState {
        macro_spins,
        species: ranges,
        b_par,
    }
}

/// `∫₀ᴰ e^{iωt} dt`, given `e = e^{iωD}`.
#[inline]
fn phasor_integral(omega: f64, d: f64, e: Complex64) -> Complex64 {
    let x = omega * d;
    if x.abs() < 1e-4 {
        // (e^{ix} − 1)/(ix) to fourth order
        let x2 = x * x;
        Complex64::new(d * (1.0 - x2 / 6.0 + x2 * x2 / 120.0), d * (x / 2.0 - x * x2 / 24.0))
    } else {
        (e - 1.0) / Complex64::new(0.0, omega)
    }
}

impl DotBathState {
    pub fn total_phasor(&self) -> Complex64 {
        self.macro_spins.iter().map(|m| m.amplitude).sum()
    }

    pub fn species_phasor(&self, species: usize) -> Complex64 {
        self.macro_spins[self.species[species].clone()].iter().map(|m| m.amplitude).sum()
    }

    /// Advances every phasor by `dt` with the Knight drive of an electron at
    /// `sz`, returning the field integrals over the interval. `with_square`
    /// also accumulates ∫B⊥² dt, which costs O(K²).
    pub fn evolve_integrate(&mut self, dt: f64, sz: f64, knight_rms: f64, with_square: bool) -> FieldIntegrals {
        let drive = 2.0 * sz * knight_rms;
        let mut integral = Complex64::new(0.0, 0.0);
        let mut square = 0.0;
        if with_square {
            let n = self.macro_spins.len();
            let mut omegas = Vec::with_capacity(n);
            let mut exps = Vec::with_capacity(n);
            for m in &self.macro_spins {
                let w = m.omega + drive * m.knight_weight;
                let (s, c) = (w * dt).sin_cos();
                omegas.push(w);
                exps.push(Complex64::new(c, s));
            }
            // (Re a)(Re b) = ½ Re(ab) + ½ Re(a b̄)
            for j in 0..n {
                let cj = self.macro_spins[j].amplitude;
                for k in 0..n {
                    let ck = self.macro_spins[k].amplitude;
                    let sum = phasor_integral(omegas[j] + omegas[k], dt, exps[j] * exps[k]);
                    let diff = phasor_integral(omegas[j] - omegas[k], dt, exps[j] * exps[k].conj());
                    square += 0.5 * (cj * ck * sum).re + 0.5 * (cj * ck.conj() * diff).re;
                }
            }
            for (m, (w, e)) in self.macro_spins.iter_mut().zip(omegas.into_iter().zip(exps)) {
                integral += m.amplitude * phasor_integral(w, dt, e);
                m.amplitude *= e;
            }
        } else {
            for m in &mut self.macro_spins {
                let w = m.omega + drive * m.knight_weight;
                let (s, c) = (w * dt).sin_cos();
                let e = Complex64::new(c, s);
                integral += m.amplitude * phasor_integral(w, dt, e);
                m.amplitude *= e;
            }
        }
        FieldIntegrals {
            b_par: self.b_par * dt,
            b_perp: integral.re,
            b_perp_sq: square,
        }
    }

    pub fn advance(&mut self, dt: f64, sz: f64, knight_rms: f64) {
        let drive = 2.0 * sz * knight_rms;
        for m in &mut self.macro_spins {
            let w = m.omega + drive * m.knight_weight;
            let (s, c) = (w * dt).sin_cos();
            m.amplitude *= Complex64::new(c, s);
        }
    }
}

pub fn b_perp_at(state: &DotBathState, t: f64) -> f64 {
    state
        .macro_spins
        .iter()
        .map(|m| {
            let (s, c) = (m.omega * t).sin_cos();
            (m.amplitude * Complex64::new(c, s)).re
        })
        .sum()
}

pub fn evolve_free(state: &DotBathState, dt: f64) -> DotBathState {
    let mut next = state.clone();
    next.advance(dt, 0.0, 0.0);
    next
}

pub fn evolve_knight(state: &DotBathState, dt: f64, sz: f64, config: &BathConfig) -> DotBathState {
    let mut next = state.clone();
    next.advance(dt, sz, config.knight_rms);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, StreamPurpose};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn config(k: usize, weights: KnightWeights, spread: f64) -> BathConfig {
        BathConfig {
            species: physics::gaas_species(4e-3, 2e-3, spread),
            macro_spins_per_species: k,
            knight_weights: weights,
            ..Default::default()
        }
    }

    fn single(amplitude: Complex64, omega: f64) -> DotBathState {
        DotBathState {
            macro_spins: vec![MacroSpin {
                amplitude,
                omega,
                knight_weight: 1.0,
            }],
            species: vec![0..1],
            b_par: 0.0,
        }
    }

    fn sample(cfg: &BathConfig, shot: u64) -> (DotBathState, DotBathState) {
        sample_bath(cfg, 0.2, &mut substream(9, StreamPurpose::Bath, shot))
    }

    #[test]
    fn zero_rms_gives_zero_fields() {
        let cfg = BathConfig {
            species: physics::gaas_species(0.0, 0.0, 0.002),
            ..Default::default()
        };
        let (l, r) = sample(&cfg, 3);
        for s in [&l, &r] {
            assert_eq!(s.b_par, 0.0);
            assert!(s.macro_spins.iter().all(|m| m.amplitude == Complex64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = BathConfig::default();
        assert_eq!(sample(&cfg, 11), sample(&cfg, 11));
        assert_ne!(sample(&cfg, 11).0, sample(&cfg, 12).0);
    }

    #[test]
    fn layout_groups_species() {
        let cfg = config(4, KnightWeights::ExponentialEnvelope, 0.0);
        let (l, _) = sample(&cfg, 0);
        assert_eq!(l.species, vec![0..4, 4..8, 8..12]);
        let mean: f64 = l.macro_spins[0..4].iter().map(|m| m.knight_weight).sum::<f64>() / 4.0;
        assert_relative_eq!(mean, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn total_transverse_rms_matches_config() {
        // Monte Carlo estimate of E|ΣB⊥|² over 10⁵ single-macro-spin baths.
        let cfg = config(1, KnightWeights::Uniform, 0.0);
        let n = 100_000u64;
        let mut acc = 0.0;
        for shot in 0..n {
            acc += sample(&cfg, shot).0.total_phasor().norm_sqr();
        }
        let rms = (acc / n as f64).sqrt();
        assert_relative_eq!(rms, 4e-3, max_relative = 0.02);
    }

    #[test]
    fn ensemble_is_zero_mean_and_dots_independent() {
        let cfg = config(8, KnightWeights::ExponentialEnvelope, 0.002);
        let n = 10_000u64;
        let (mut mean, mut cross, mut norm_l, mut norm_r) = (0.0, Complex64::new(0.0, 0.0), 0.0, 0.0);
        for shot in 0..n {
            let (l, r) = sample(&cfg, shot);
            mean += b_perp_at(&l, 1.3e-6);
            let (pl, pr) = (l.total_phasor(), r.total_phasor());
            cross += pl * pr.conj();
            norm_l += pl.norm_sqr();
            norm_r += pr.norm_sqr();
        }
        let mean = mean / n as f64;
        // Re B⊥ has RMS 4 mT/√2.
        assert!(mean.abs() < 3.0 * 4e-3 / 2f64.sqrt() / (n as f64).sqrt());
        let corr = cross.norm() / (norm_l * norm_r).sqrt();
        assert!(corr < 3.0 / (n as f64).sqrt(), "cross-correlation {corr}");
    }

    #[test]
    fn b_perp_at_origin_is_real_part_sum() {
        let (l, _) = sample(&BathConfig::default(), 5);
        let direct: f64 = l.macro_spins.iter().map(|m| m.amplitude.re).sum();
        assert_relative_eq!(b_perp_at(&l, 0.0), direct, max_relative = 1e-12);
    }

    #[test]
    fn single_macro_spin_is_periodic() {
        let w = TAU * 1.463e6;
        let s = single(Complex64::new(1e-3, -2e-3), w);
        assert_relative_eq!(b_perp_at(&s, TAU / w), b_perp_at(&s, 0.0), max_relative = 1e-12);
    }

    #[test]
    fn two_macro_spins_match_cosine_sum() {
        let (a1, t1, w1) = (1.2e-3, 0.4, 9.2e6);
        let (a2, t2, w2) = (0.7e-3, -2.1, 1.6e7);
        let s = DotBathState {
            macro_spins: vec![
                MacroSpin { amplitude: Complex64::from_polar(a1, t1), omega: w1, knight_weight: 1.0 },
                MacroSpin { amplitude: Complex64::from_polar(a2, t2), omega: w2, knight_weight: 1.0 },
            ],
            species: vec![0..2],
            b_par: 0.0,
        };
        for t in [0.0, 1e-7, 3.3e-6, 2.2e-5] {
            let expect = a1 * (w1 * t + t1).cos() + a2 * (w2 * t + t2).cos();
            assert!((b_perp_at(&s, t) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn free_evolution_identity_and_period() {
        let w = TAU * 2.6e6;
        let s = single(Complex64::new(3e-4, 1e-4), w);
        assert_eq!(evolve_free(&s, 0.0), s);
        let full = evolve_free(&s, TAU / w);
        assert!((full.macro_spins[0].amplitude - s.macro_spins[0].amplitude).norm() < 1e-12 * s.macro_spins[0].amplitude.norm());
        assert_eq!(full.b_par, s.b_par);
    }

    #[test]
    fn zero_polarisation_is_free_evolution() {
        let cfg = BathConfig::default();
        let (l, _) = sample(&cfg, 1);
        assert_eq!(evolve_knight(&l, 3.7e-6, 0.0, &cfg), evolve_free(&l, 3.7e-6));
    }

    fn max_phasor_error(a: &DotBathState, b: &DotBathState) -> f64 {
        a.macro_spins
            .iter()
            .zip(&b.macro_spins)
            .map(|(x, y)| (x.amplitude - y.amplitude).norm() / x.amplitude.norm().max(1e-30))
            .fold(0.0, f64::max)
    }

    #[test]
    fn opposite_polarisations_refocus() {
        for weights in [KnightWeights::Uniform, KnightWeights::ExponentialEnvelope] {
            let cfg = config(16, weights, 0.002);
            let (l, _) = sample(&cfg, 2);
            let dt = 15.4e-6;
            let echoed = evolve_knight(&evolve_knight(&l, dt / 2.0, 0.5, &cfg), dt / 2.0, -0.5, &cfg);
            let free = evolve_free(&l, dt);
            assert!(max_phasor_error(&echoed, &free) < 1e-10);
            for t in [0.0, 1e-6] {
                assert_relative_eq!(b_perp_at(&echoed, t), b_perp_at(&free, t), max_relative = 1e-10, epsilon = 1e-16);
            }
        }
    }

    #[test]
    fn knight_group_inverse() {
        let cfg = BathConfig::default();
        let (l, _) = sample(&cfg, 4);
        let dt = 2e-6;
        let fwd = evolve_knight(&l, dt, 0.5, &cfg);
        // Undo the Knight part by evolving with −sz and then backwards in time freely.
        let back = evolve_free(&evolve_knight(&fwd, dt, -0.5, &cfg), -2.0 * dt);
        assert!(max_phasor_error(&back, &l) < 1e-9);
    }

    #[test]
    fn amplitudes_conserved_over_many_steps() {
        let cfg = BathConfig::default();
        let (mut l, _) = sample(&cfg, 6);
        let before: Vec<f64> = l.macro_spins.iter().map(|m| m.amplitude.norm()).collect();
        for i in 0..1000 {
            let sz = if i % 2 == 0 { 0.5 } else { -0.3 };
            l.advance(1.7e-8, sz, cfg.knight_rms);
        }
        for (m, b) in l.macro_spins.iter().zip(before) {
            assert!((m.amplitude.norm() - b).abs() / b < 1e-12);
        }
    }

    #[test]
    fn integrals_match_quadrature() {
        let cfg = BathConfig {
            macro_spins_per_species: 3,
            ..Default::default()
        };
        let (l, _) = sample(&cfg, 8);
        let dt = 1.1e-6;
        let n = 20_000;
        let h = dt / n as f64;
        // Simpson's rule on the explicit field.
        let f = |t: f64| b_perp_at(&l, t);
        let mut lin = f(0.0) + f(dt);
        let mut sq = f(0.0).powi(2) + f(dt).powi(2);
        for i in 1..n {
            let c = if i % 2 == 1 { 4.0 } else { 2.0 };
            let v = f(i as f64 * h);
            lin += c * v;
            sq += c * v * v;
        }
        lin *= h / 3.0;
        sq *= h / 3.0;
        let mut s = l.clone();
        let got = s.evolve_integrate(dt, 0.0, 0.0, true);
        assert_relative_eq!(got.b_perp, lin, max_relative = 1e-8, epsilon = 1e-18);
        assert_relative_eq!(got.b_perp_sq, sq, max_relative = 1e-8);
        assert_relative_eq!(got.b_par, l.b_par * dt, max_relative = 1e-15);
        assert_eq!(s, evolve_free(&l, dt));
    }

    proptest! {
        #[test]
        fn free_evolution_composes(split in 0.0..1.0f64, shot in 0u64..50) {
            let cfg = BathConfig::default();
            let (l, _) = sample(&cfg, shot);
            let dt = 7.3e-6;
            let two = evolve_free(&evolve_free(&l, split * dt), (1.0 - split) * dt);
            let one = evolve_free(&l, dt);
            prop_assert!(max_phasor_error(&two, &one) < 1e-10);
        }
    }
}
