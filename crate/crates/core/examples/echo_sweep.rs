// SPDX-License-Identifier: Apache-2.0

//! Singlet return probability of a Hahn echo versus τ_echo over the default
//! GaAs bath, with the revival near 7 µs.
//!
//! cargo run --release --example echo_sweep [shots]

use echocorr::engine::{sweep_echo, Model, SemiclassicalBackend};
use echocorr::sequence::SequenceOptions;

fn main() -> echocorr::Result<()> {
    let shots = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let backend = SemiclassicalBackend::new(Model::default(), SequenceOptions::default(), shots, 1)?;
    let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1e-6).collect();
    let rows = sweep_echo(&backend, &grid)?;
    for r in &rows {
        println!("{:6.2} us  P(S) = {:.4} ± {:.4}", r.axis * 1e6, r.p1_mean, r.p1_stderr);
    }
    let peak = rows
        .iter()
        .filter(|r| r.axis > 2e-6)
        .max_by(|a, b| a.p1_mean.total_cmp(&b.p1_mean))
        .unwrap();
    println!("revival at {:.2} us, P(S) = {:.4}", peak.axis * 1e6, peak.p1_mean);
    Ok(())
}
