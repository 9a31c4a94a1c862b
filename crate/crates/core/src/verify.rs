// SPDX-License-Identifier: Apache-2.0

//! Cross-checks of the semiclassical engine against the exact backend.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::engine::{Backend, Experiment, SemiclassicalBackend};
use crate::error::{Error, Result};
use crate::oracle::{
    conditional_propagator, entanglement_witness, iem_kraus_theta, intermediate_channel, maximally_mixed,
    mirror_model, post_singlet_state, Branch, ExactBackend, Intermediate, SmallBathSpec,
};
use crate::sequence::{IntermediateMode, SequenceOptions};

pub const OPERATOR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub spec: SmallBathSpec,
    pub tau_echo: f64,
    /// (mode, τ_delay) comparison points.
    pub grid: Vec<(IntermediateMode, f64)>,
    pub shots: u64,
    pub seed: u64,
    pub workers: usize,
    /// Multiplier on the mirrored Knight shifts; 1 is the faithful mirror.
    pub knight_factor: f64,
    pub sigma_tolerance: f64,
}

impl Default for VerifyConfig {
    /// Six nuclei at ω = 10⁶ rad/s with couplings near ω/2 and λ = 0.1; the
    /// echo lasts one Larmor period.
    fn default() -> Self {
        let mut spec = SmallBathSpec::default();
        for a in &mut spec.couplings {
            *a *= 1.25;
        }
        let period = TAU / spec.zeeman[0];
        use IntermediateMode::*;
        let grid = [
            (LockSinglet, 2.0),
            (LockSinglet, 3.0),
            (UpDown, 2.0),
            (UpDown, 2.5),
            (UpDown, 3.0),
            (UpDown, 3.5),
            (UpDown, 4.0),
            (UpDownPi, 2.0),
            (UpDownPi, 3.0),
            (UpDownPi, 4.0),
        ]
        .into_iter()
        .map(|(m, n)| (m, n * period))
        .collect();
        VerifyConfig {
            spec,
            tau_echo: period,
            grid,
            shots: 100_000,
            seed: 1,
            workers: 0,
            knight_factor: 1.0,
            sigma_tolerance: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn operator_checks(cfg: &VerifyConfig, report: &mut VerifyReport) -> Result<()> {
    let spec = &cfg.spec;
    let dim = spec.dim();
    let mut worst_unitary: f64 = 0.0;
    for branch in [Branch::UpDown, Branch::DownUp, Branch::Locked] {
        for t in [cfg.tau_echo / 2.0, cfg.tau_echo, 1.7 * cfg.tau_echo] {
            let u = conditional_propagator(spec, branch, t)?;
            let e = &u.adjoint() * &u - crate::oracle::CMatrix::identity(dim, dim);
            worst_unitary = worst_unitary.max(e.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    report.push(
        "unitarity",
        worst_unitary < OPERATOR_TOLERANCE,
        format!("max |U†U − 1| = {worst_unitary:.2e}"),
    );

    let mut worst_complete: f64 = 0.0;
    for theta in [0.0, PI / 3.0, PI / 2.0, PI, 1.5 * PI] {
        worst_complete = worst_complete.max(iem_kraus_theta(spec, cfg.tau_echo, theta)?.completeness_error());
    }
    report.push(
        "povm completeness",
        worst_complete < OPERATOR_TOLERANCE,
        format!("max |M_S†M_S + M_T†M_T − 1| = {worst_complete:.2e}"),
    );

    let rho = post_singlet_state(spec, cfg.tau_echo)?;
    let mut worst_trace: f64 = 0.0;
    for (locked, angle) in [(true, 0.0), (false, 0.0), (false, PI / 2.0), (false, PI)] {
        let out = intermediate_channel(spec, locked, 2.0 * cfg.tau_echo, angle)?.apply(&rho);
        worst_trace = worst_trace.max((out.trace() - 1.0).norm());
    }
    report.push(
        "trace preservation",
        worst_trace < OPERATOR_TOLERANCE,
        format!("max |Tr E(ρ) − 1| = {worst_trace:.2e}"),
    );

    let gap = 2.0 * cfg.tau_echo;
    let mixed = maximally_mixed(dim);
    let mut worst_mixed: f64 = 0.0;
    for m in [Intermediate::LOCK, Intermediate::separated(0.0), Intermediate::separated(PI)] {
        worst_mixed = worst_mixed.max(entanglement_witness(spec, &m, gap, &mixed)?);
    }
    report.push(
        "witness on mixed bath",
        worst_mixed < OPERATOR_TOLERANCE,
        format!("max trace distance = {worst_mixed:.2e}"),
    );
    let after = entanglement_witness(spec, &Intermediate::separated(0.0), gap, &rho)?;
    let nonzero = spec.transverse_ratio == 0.0 || after > 1e-6;
    report.push(
        "witness after projection",
        nonzero,
        format!("trace distance = {after:.3e} (λ = {})", spec.transverse_ratio),
    );

    let mut big = spec.clone();
    big.n_left = 7;
    big.n_right = 6;
    big.couplings = vec![1.0; 13];
    big.zeeman = vec![1.0; 13];
    let capped = matches!(big.validate(), Err(Error::DimensionOverflow { .. }));
    report.push("dimension cap", capped, "13 spins rejected");
    Ok(())
}

/// Compares the two backends on every grid point and runs the operator
/// checks.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    operator_checks(cfg, &mut report)?;

    let options = SequenceOptions::ideal();
    let exact = ExactBackend::new(cfg.spec.clone(), &options)?;
    let model = mirror_model(&cfg.spec, cfg.knight_factor, cfg.seed)?;
    let mc = SemiclassicalBackend::new(model, options, cfg.shots, cfg.workers)?;
    for &(mode, tau_delay) in &cfg.grid {
        let exp = Experiment::Correlation {
            tau_echo: cfg.tau_echo,
            tau_delay,
            mode,
        };
        let c_exact = exact.evaluate(&exp)?.covariance.unwrap_or(0.0);
        let r = mc.evaluate(&exp)?;
        let (c, se) = (r.covariance.unwrap_or(0.0), r.cov_stderr.unwrap_or(0.0));
        let z = if se > 0.0 { (c - c_exact) / se } else if c == c_exact { 0.0 } else { f64::INFINITY };
        report.push(
            format!("covariance {} delay={:.3}us", mode.name(), tau_delay * 1e6),
            z.abs() <= cfg.sigma_tolerance,
            format!("exact {c_exact:+.4e}, sampled {c:+.4e} ± {se:.1e}, z = {z:+.2}"),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_ten_points_within_oracle_limits() {
        let cfg = VerifyConfig::default();
        assert_eq!(cfg.grid.len(), 10);
        assert!(cfg.spec.spins() <= 6);
        assert!(cfg.spec.transverse_ratio <= 0.1);
        assert!(cfg.grid.iter().all(|&(_, d)| d >= cfg.tau_echo));
    }

    #[test]
    fn operator_checks_pass_on_default_spec() {
        let mut report = VerifyReport::default();
        operator_checks(&VerifyConfig::default(), &mut report).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn display_marks_failures() {
        let mut r = VerifyReport::default();
        r.push("a", true, "fine");
        r.push("b", false, "broken");
        let s = r.to_string();
        assert!(s.contains("FAIL b: broken"));
        assert!(s.ends_with("2 checks, 1 failed"));
        assert!(!r.passed());
    }
}
