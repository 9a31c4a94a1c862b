// SPDX-License-Identifier: Apache-2.0

//! Covariance of two echoes versus the delay between their π pulses, with the
//! qubit locked in the singlet in between. At a revival τ_echo the trace is
//! flat; at a valley it peaks at multiples of the nuclear Larmor periods.
//!
//! cargo run --release --example delay_covariance [tau_echo_us] [shots]

use echocorr::engine::{sweep_delay, Model, SemiclassicalBackend};
use echocorr::sequence::{IntermediateMode, SequenceOptions};

fn main() -> echocorr::Result<()> {
    let mut args = std::env::args().skip(1);
    let tau_echo = args.next().and_then(|s| s.parse::<f64>().ok()).unwrap_or(1.5) * 1e-6;
    let shots = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let model = Model::default();
    for s in &model.bath.species {
        println!("# {} Larmor period {:.4} us", s.name, s.larmor_period(model.electron.b_ext) * 1e6);
    }
    let backend = SemiclassicalBackend::new(model, SequenceOptions::default(), shots, 1)?;
    let delays: Vec<f64> = (0..=100).map(|i| (7.0 + 0.05 * i as f64) * 1e-6).filter(|&d| d >= tau_echo).collect();
    let rows = sweep_delay(&backend, tau_echo, &delays, IntermediateMode::LockSinglet)?;
    for r in &rows {
        println!("{:8.3}  {:+.3e} ± {:.3e}", r.axis * 1e6, r.covariance.unwrap(), r.cov_stderr.unwrap());
    }
    Ok(())
}
