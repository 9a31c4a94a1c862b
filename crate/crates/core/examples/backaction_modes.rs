// SPDX-License-Identifier: Apache-2.0

//! Covariance versus τ_delay for the three intermediate states: singlet held
//! in one dot, separated ↑↓, and ↑↓ with a π pulse halfway through.
//!
//! cargo run --release --example backaction_modes [tau_echo_us] [shots]

use echocorr::engine::{sweep_delay, Model, SemiclassicalBackend};
use echocorr::sequence::{IntermediateMode, SequenceOptions};

fn main() -> echocorr::Result<()> {
    let mut args = std::env::args().skip(1);
    let tau_echo = args.next().and_then(|s| s.parse::<f64>().ok()).unwrap_or(3.1) * 1e-6;
    let shots = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let backend = SemiclassicalBackend::new(Model::default(), SequenceOptions::default(), shots, 1)?;
    let delays: Vec<f64> = (0..=30).map(|i| (21.0 + 0.1 * i as f64) * 1e-6).collect();

    let modes = [IntermediateMode::LockSinglet, IntermediateMode::UpDownPi, IntermediateMode::UpDown];
    let sweeps = modes
        .iter()
        .map(|&m| sweep_delay(&backend, tau_echo, &delays, m))
        .collect::<echocorr::Result<Vec<_>>>()?;

    println!("tau_delay_us  lock_singlet  updown_pi  updown  (stderr ~{:.4})", sweeps[0][0].cov_stderr.unwrap());
    for i in 0..delays.len() {
        let c = |k: usize| sweeps[k][i].covariance.unwrap();
        println!("{:10.2}  {:12.4}  {:9.4}  {:7.4}", delays[i] * 1e6, c(0), c(1), c(2));
    }
    Ok(())
}
