// SPDX-License-Identifier: Apache-2.0

//! Calibrating the exchange pulse: the amplitude that gives a π rotation for
//! a 20 ns pulse, and the single-echo singlet return as the refocusing pulse
//! amplitude is swept.
//!
//! cargo run --release --example amplitude_calibration [shots]

use echocorr::engine::{sweep_echo_amplitude, Model, SemiclassicalBackend};
use echocorr::sequence::{JMap, SequenceOptions};

fn main() -> echocorr::Result<()> {
    let shots = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let jmap = JMap::default();
    let duration = 20e-9;
    let a_pi = jmap.calibrate_pi(duration)?;
    println!("J(A) = {:.3e} rad/s * exp(A / {}); A_pi = {a_pi:.4} for {} ns", jmap.j0, jmap.amp_scale, duration * 1e9);

    let backend = SemiclassicalBackend::new(Model::default(), SequenceOptions::default(), shots, 1)?;
    let amps: Vec<f64> = (0..=49).map(|i| -1.0 + 0.1 * i as f64).collect();
    let rows = sweep_echo_amplitude(&backend, 3.1e-6, &amps, duration)?;
    println!("amplitude  theta/pi  P(S)");
    for r in &rows {
        println!("{:9.2}  {:8.3}  {:.4}", r.axis, jmap.angle(r.axis, duration) / std::f64::consts::PI, r.p1_mean);
    }
    let best = rows.iter().max_by(|a, b| a.p1_mean.total_cmp(&b.p1_mean)).unwrap();
    println!("largest P(S) at amplitude {:.2}", best.axis);
    Ok(())
}
