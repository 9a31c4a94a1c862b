// SPDX-License-Identifier: Apache-2.0

//! Physical constants, nuclear species, and the per-dot electron precession
//! frequency in the presence of the Overhauser field.
//!
//! The electron in each dot precesses at
//!
//! ```text
//! ω_e = (μ_B g∥ / ħ) · (B_ext + B∥ − (g⊥/g∥) B⊥(t) [+ B⊥(t)² / 2B_ext])
//! ```
//!
//! and the S–T0 qubit is driven by the difference of the left and right
//! frequencies. All quantities are SI: tesla, seconds, rad/s.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Which dot(s) a species populates. GaAs species live in both dots; the
/// per-nucleus mirrors of a small exact bath live in exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DotPresence {
    #[default]
    Both,
    Left,
    Right,
}

impl DotPresence {
    pub fn in_left(self) -> bool {
        matches!(self, DotPresence::Both | DotPresence::Left)
    }

    pub fn in_right(self) -> bool {
        matches!(self, DotPresence::Both | DotPresence::Right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NuclearSpecies {
    pub name: String,
    /// Gyromagnetic ratio, rad·s⁻¹·T⁻¹.
    pub gamma: f64,
    pub abundance: f64,
    /// Per-dot RMS of this species' transverse Overhauser phasor, tesla.
    pub rms_transverse_field: f64,
    /// Per-dot RMS of this species' static longitudinal field, tesla.
    pub rms_longitudinal_field: f64,
    /// Fractional RMS spread of the Larmor frequency across macro-spins.
    pub frequency_spread: f64,
    /// Multiplier on the bath-wide Knight shift for this species.
    pub knight_scale: f64,
    pub presence: DotPresence,
}

impl NuclearSpecies {
    /// A species with gyromagnetic ratio given as γ/2π in MHz/T.
    pub fn new(name: impl Into<String>, gamma_mhz_per_tesla: f64, abundance: f64) -> Self {
        NuclearSpecies {
            name: name.into(),
            gamma: TAU * gamma_mhz_per_tesla * 1e6,
            abundance,
            rms_transverse_field: 0.0,
            rms_longitudinal_field: 0.0,
            frequency_spread: 0.0,
            knight_scale: 1.0,
            presence: DotPresence::Both,
        }
    }

    pub fn larmor_period(&self, b_ext: f64) -> f64 {
        TAU / larmor_omega(self, b_ext)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) {
            return Err(Error::param("gamma", format!("{} must be positive", self.name)));
        }
        if !(self.abundance > 0.0 && self.abundance <= 1.0) {
            return Err(Error::param(
                "abundance",
                format!("{}: {} not in (0, 1]", self.name, self.abundance),
            ));
        }
        for (name, v) in [
            ("rms_transverse_field", self.rms_transverse_field),
            ("rms_longitudinal_field", self.rms_longitudinal_field),
            ("frequency_spread", self.frequency_spread),
            ("knight_scale", self.knight_scale),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{}: {v} must be finite and >= 0", self.name)));
            }
        }
        Ok(())
    }
}

/// Checks a species list: each entry valid and abundances summing to one.
pub fn validate_species(species: &[NuclearSpecies]) -> Result<()> {
    if species.is_empty() {
        return Err(Error::param("species", "at least one species is required"));
    }
    for s in species {
        s.validate()?;
    }
    let total: f64 = species.iter().map(|s| s.abundance).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param("abundance", format!("abundances sum to {total}, expected 1")));
    }
    Ok(())
}

/// The three GaAs isotopes. Per-species RMS fields split the given per-dot
/// totals in proportion to abundance, so the species add up in quadrature
/// to the totals.
pub fn gaas_species(rms_transverse: f64, rms_longitudinal: f64, frequency_spread: f64) -> Vec<NuclearSpecies> {
    [("75As", 7.315, 0.5), ("69Ga", 10.248, 0.301), ("71Ga", 13.021, 0.199)]
        .into_iter()
        .map(|(name, gamma, weight)| {
            let mut s = NuclearSpecies::new(name, gamma, weight);
            s.rms_transverse_field = rms_transverse * f64::sqrt(weight);
            s.rms_longitudinal_field = rms_longitudinal * f64::sqrt(weight);
            s.frequency_spread = frequency_spread;
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronParams {
    pub g_par: f64,
    /// Linear transverse coupling g⊥/g∥ from the g-tensor anisotropy.
    pub g_perp_ratio: f64,
    /// External field, tesla.
    pub b_ext: f64,
    pub include_quadratic: bool,
}

impl Default for ElectronParams {
    fn default() -> Self {
        ElectronParams {
            g_par: -0.44,
            g_perp_ratio: 0.05,
            b_ext: 0.2,
            include_quadratic: false,
        }
    }
}

impl ElectronParams {
    /// μ_B g∥ / ħ in rad·s⁻¹·T⁻¹.
    pub fn gyro(&self) -> f64 {
        BOHR_MAGNETON * self.g_par / HBAR
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_ext > 0.0 && self.b_ext.is_finite()) {
            return Err(Error::param("b_ext", format!("{} must be positive", self.b_ext)));
        }
        if self.g_par == 0.0 || !self.g_par.is_finite() {
            return Err(Error::param("g_par", "must be finite and non-zero"));
        }
        if !(0.0..=1.0).contains(&self.g_perp_ratio) {
            return Err(Error::param("g_perp_ratio", format!("{} not in [0, 1]", self.g_perp_ratio)));
        }
        Ok(())
    }
}

/// Instantaneous Overhauser field seen by one electron.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub b_par: f64,
    pub b_perp: f64,
}

/// Time integrals of the Overhauser field over one evolution segment:
/// ∫B∥ dt, ∫B⊥ dt and ∫B⊥² dt (tesla·s and tesla²·s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldIntegrals {
    pub b_par: f64,
    pub b_perp: f64,
    pub b_perp_sq: f64,
}

pub fn larmor_omega(species: &NuclearSpecies, b_ext: f64) -> f64 {
    species.gamma * b_ext
}

pub fn electron_omega(params: &ElectronParams, f: FieldSample) -> Result<f64> {
    let mut field = params.b_ext + f.b_par - params.g_perp_ratio * f.b_perp;
    if params.include_quadratic {
        if params.b_ext == 0.0 {
            return Err(Error::param("b_ext", "quadratic term needs a non-zero external field"));
        }
        field += f.b_perp * f.b_perp / (2.0 * params.b_ext);
    }
    Ok(params.gyro() * field)
}

/// S–T0 precession rate: left minus right electron frequency.
pub fn qubit_phase_rate(params: &ElectronParams, left: FieldSample, right: FieldSample) -> Result<f64> {
    Ok(electron_omega(params, left)? - electron_omega(params, right)?)
}

/// Qubit phase accumulated over a segment, from the per-dot field
/// integrals. The B_ext contribution is common to both dots and is
/// dropped before it can leave a rounding residue.
pub fn accumulated_qubit_phase(params: &ElectronParams, left: &FieldIntegrals, right: &FieldIntegrals) -> f64 {
    let mut field = (left.b_par - right.b_par) - params.g_perp_ratio * (left.b_perp - right.b_perp);
    if params.include_quadratic {
        field += (left.b_perp_sq - right.b_perp_sq) / (2.0 * params.b_ext);
    }
    params.gyro() * field
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn as75() -> NuclearSpecies {
        NuclearSpecies::new("75As", 7.315, 1.0)
    }

    #[test]
    fn larmor_at_zero_field_is_zero() {
        assert_eq!(larmor_omega(&as75(), 0.0), 0.0);
    }

    #[test]
    fn larmor_periods_at_200_mt() {
        // γ/2π · B by hand: 7.315 MHz/T · 0.2 T = 1.463 MHz; 13.021 · 0.2 = 2.6042 MHz.
        let w = larmor_omega(&as75(), 0.2);
        assert_relative_eq!(w, TAU * 1.463e6, max_relative = 1e-12);
        assert_relative_eq!(as75().larmor_period(0.2), 683.5e-9, max_relative = 1e-4);
        let ga71 = NuclearSpecies::new("71Ga", 13.021, 1.0);
        assert_relative_eq!(larmor_omega(&ga71, 0.2), TAU * 2.6042e6, max_relative = 1e-12);
        assert_relative_eq!(ga71.larmor_period(0.2), 384.0e-9, max_relative = 1e-4);
    }

    #[test]
    fn bare_zeeman_term() {
        let p = ElectronParams::default();
        let w = electron_omega(&p, FieldSample::default()).unwrap();
        assert_eq!(w, p.gyro() * p.b_ext);
    }

    #[test]
    fn quadratic_term_identity() {
        let p = ElectronParams {
            g_perp_ratio: 0.0,
            include_quadratic: true,
            ..Default::default()
        };
        let w = electron_omega(&p, FieldSample { b_par: 0.0, b_perp: p.b_ext }).unwrap();
        assert_relative_eq!(w, 1.5 * p.gyro() * p.b_ext, max_relative = 1e-15);
    }

    #[test]
    fn quadratic_term_rejects_zero_field() {
        let p = ElectronParams {
            b_ext: 0.0,
            include_quadratic: true,
            ..Default::default()
        };
        assert!(electron_omega(&p, FieldSample::default()).is_err());
    }

    #[test]
    fn symmetric_dots_have_no_gradient() {
        let p = ElectronParams::default();
        let f = FieldSample { b_par: 1e-3, b_perp: -2e-3 };
        assert_eq!(qubit_phase_rate(&p, f, f).unwrap(), 0.0);
    }

    #[test]
    fn gradient_from_parallel_difference() {
        let p = ElectronParams::default();
        let d = 1.5e-3;
        let r = qubit_phase_rate(&p, FieldSample { b_par: d, b_perp: 0.0 }, FieldSample::default()).unwrap();
        assert_relative_eq!(r, p.gyro() * d, max_relative = 1e-9);
    }

    #[test]
    fn species_validation() {
        let mut s = gaas_species(4e-3, 2e-3, 0.002);
        validate_species(&s).unwrap();
        s[0].abundance = 0.6;
        assert!(validate_species(&s).is_err());
        s[0].abundance = 0.5;
        s[1].gamma = 0.0;
        assert!(validate_species(&s).is_err());
    }

    #[test]
    fn gaas_split_adds_in_quadrature() {
        let s = gaas_species(4e-3, 2e-3, 0.0);
        let t: f64 = s.iter().map(|s| s.rms_transverse_field.powi(2)).sum();
        assert_relative_eq!(t.sqrt(), 4e-3, max_relative = 1e-12);
    }

    // The precession frequency written out a second time, term by term.
    fn reference_omega(g_par: f64, ratio: f64, b_ext: f64, quad: bool, b_par: f64, b_perp: f64) -> f64 {
        let mu_b = 9.274_010_078_3e-24;
        let hbar = 1.054_571_817e-34;
        let zeeman = b_ext;
        let parallel = b_par;
        let transverse = -ratio * b_perp;
        let quadratic = if quad { b_perp.powi(2) / (2.0 * b_ext) } else { 0.0 };
        mu_b * g_par / hbar * (zeeman + parallel + transverse + quadratic)
    }

    proptest! {
        #[test]
        fn matches_reference_formula(
            b_par in -5e-3..5e-3f64,
            b_perp in -5e-3..5e-3f64,
            ratio in 0.0..1.0f64,
            quad in any::<bool>(),
        ) {
            let p = ElectronParams { g_perp_ratio: ratio, include_quadratic: quad, ..Default::default() };
            let w = electron_omega(&p, FieldSample { b_par, b_perp }).unwrap();
            let r = reference_omega(p.g_par, ratio, p.b_ext, quad, b_par, b_perp);
            prop_assert!(((w - r) / r).abs() < 1e-12);
        }

        #[test]
        fn affine_in_parallel_field(b_par in -5e-3..5e-3f64, b_perp in -5e-3..5e-3f64, d in 1e-5..1e-3f64) {
            let p = ElectronParams { include_quadratic: true, ..Default::default() };
            let w0 = electron_omega(&p, FieldSample { b_par, b_perp }).unwrap();
            let w1 = electron_omega(&p, FieldSample { b_par: b_par + d, b_perp }).unwrap();
            prop_assert!(((w1 - w0) / d - p.gyro()).abs() / p.gyro().abs() < 1e-6);
        }

        #[test]
        fn affine_in_transverse_field_without_quadratic(b_perp in -5e-3..5e-3f64, d in 1e-5..1e-3f64) {
            let p = ElectronParams::default();
            let w0 = electron_omega(&p, FieldSample { b_par: 0.0, b_perp }).unwrap();
            let w1 = electron_omega(&p, FieldSample { b_par: 0.0, b_perp: b_perp + d }).unwrap();
            let slope = -p.g_perp_ratio * p.gyro();
            prop_assert!(((w1 - w0) / d - slope).abs() / slope.abs() < 1e-5);
        }

        #[test]
        fn phase_rate_antisymmetric(a in -5e-3..5e-3f64, b in -5e-3..5e-3f64, c in -5e-3..5e-3f64, d in -5e-3..5e-3f64) {
            let p = ElectronParams::default();
            let l = FieldSample { b_par: a, b_perp: b };
            let r = FieldSample { b_par: c, b_perp: d };
            prop_assert_eq!(qubit_phase_rate(&p, l, r).unwrap(), -qubit_phase_rate(&p, r, l).unwrap());
        }

        #[test]
        fn larmor_linear_in_field(b in 0.0..2.0f64, k in 0.0..10.0f64) {
            let s = NuclearSpecies::new("x", 10.0, 1.0);
            let lhs = larmor_omega(&s, k * b);
            let rhs = k * larmor_omega(&s, b);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }
    }
}
