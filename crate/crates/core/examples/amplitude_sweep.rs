// SPDX-License-Identifier: Apache-2.0

//! Covariance at a fixed τ_delay as the amplitude of the intermediate
//! exchange pulse is swept, next to the single-echo curve for the same
//! amplitudes. The two follow each other.
//!
//! cargo run --release --example amplitude_sweep [tau_delay_us] [shots]

use echocorr::engine::{pearson, sweep_amplitude, Model, SemiclassicalBackend};
use echocorr::sequence::SequenceOptions;

fn main() -> echocorr::Result<()> {
    let mut args = std::env::args().skip(1);
    let tau_delay = args.next().and_then(|s| s.parse::<f64>().ok()).unwrap_or(22.3) * 1e-6;
    let shots = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let opts = SequenceOptions::default();
    let backend = SemiclassicalBackend::new(Model::default(), opts, shots, 1)?;
    let amps: Vec<f64> = (0..=49).map(|i| -1.0 + 0.1 * i as f64).collect();
    let sweep = sweep_amplitude(&backend, 3.1e-6, tau_delay, &amps, opts.pulse_duration)?;

    println!("amplitude  theta  covariance  P(S)");
    for (c, e) in sweep.covariance.iter().zip(&sweep.single_echo) {
        let theta = opts.jmap.angle(c.axis, opts.pulse_duration);
        println!("{:9.2}  {theta:5.2}  {:+10.4}  {:.4}", c.axis, c.covariance.unwrap(), e.p1_mean);
    }
    let cov: Vec<f64> = sweep.covariance.iter().map(|r| r.covariance.unwrap()).collect();
    let p: Vec<f64> = sweep.single_echo.iter().map(|r| r.p1_mean).collect();
    println!("Pearson r = {:.3}", pearson(&cov, &p));
    Ok(())
}
