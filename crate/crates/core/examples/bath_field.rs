// SPDX-License-Identifier: Apache-2.0

//! One draw of the macro-spin Overhauser bath: per-species transverse
//! phasors, their precession, and the Knight shift that a separated
//! electron imprints on the nuclear phases.

use echocorr::bath::{sample_bath, BathConfig};
use echocorr::rng::{substream, StreamPurpose};

fn main() {
    let config = BathConfig::default();
    let b_ext = 0.2;
    let mut rng = substream(config.rng_seed, StreamPurpose::Bath, 0);
    let (left, right) = sample_bath(&config, b_ext, &mut rng);
    println!("B_par: left {:+.3} mT, right {:+.3} mT", left.b_par * 1e3, right.b_par * 1e3);
    for (i, s) in config.species.iter().enumerate() {
        let c = left.species_phasor(i);
        println!(
            "{:5}  T_L = {:.1} ns  |B_perp| = {:.3} mT  phase {:+.2} rad",
            s.name,
            s.larmor_period(b_ext) * 1e9,
            c.norm() * 1e3,
            c.arg()
        );
    }

    // Nuclear phases after 10 µs with and without a polarised electron.
    let t = 10e-6;
    let mut free = left.clone();
    let mut shifted = left.clone();
    free.advance(t, 0.0, config.knight_rms);
    shifted.advance(t, 0.5, config.knight_rms);
    let lag: Vec<f64> = free
        .macro_spins
        .iter()
        .zip(&shifted.macro_spins)
        .map(|(a, b)| (b.amplitude / a.amplitude).arg())
        .collect();
    let mean = lag.iter().sum::<f64>() / lag.len() as f64;
    println!("Knight phase after {} us: mean {mean:.3} rad, max {:.3} rad", t * 1e6, lag.iter().cloned().fold(0.0, f64::max));
}
