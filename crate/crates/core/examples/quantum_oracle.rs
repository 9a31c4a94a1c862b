// SPDX-License-Identifier: Apache-2.0

//! The exact small-bath backend: an echo cycle as a pair of Kraus operators
//! on six nuclear spins, exact covariances for the three intermediate modes,
//! the trace-distance entanglement witness, and the comparison against the
//! Monte Carlo engine run on a mirrored bath.
//!
//! cargo run --release --example quantum_oracle

use std::f64::consts::TAU;

use echocorr::oracle::{
    entanglement_witness, exact_covariance, iem_kraus, maximally_mixed, post_singlet_state, Intermediate,
};
use echocorr::verify::{run_verify, VerifyConfig};

fn main() -> echocorr::Result<()> {
    let cfg = VerifyConfig::default();
    let spec = &cfg.spec;
    let period = TAU / spec.zeeman[0];
    println!("{} spins, dimension {}, lambda = {}", spec.spins(), spec.dim(), spec.transverse_ratio);

    let k = iem_kraus(spec, cfg.tau_echo)?;
    println!("completeness error {:.1e}", k.completeness_error());

    println!("gap/T  lock_singlet  updown  updown_pi");
    for n in [1.0, 1.5, 2.0, 3.0] {
        let gap = n * period;
        let c = |m: Intermediate| exact_covariance(spec, cfg.tau_echo, gap, &m);
        println!(
            "{n:5.1}  {:+.4e}  {:+.4e}  {:+.4e}",
            c(Intermediate::LOCK)?,
            c(Intermediate::separated(0.0))?,
            c(Intermediate::separated(std::f64::consts::PI))?
        );
    }

    let mixed = maximally_mixed(spec.dim());
    let post = post_singlet_state(spec, cfg.tau_echo)?;
    let ud = Intermediate::separated(0.0);
    println!(
        "witness: mixed bath {:.1e}, after a singlet outcome {:.3e}",
        entanglement_witness(spec, &ud, 2.0 * period, &mixed)?,
        entanglement_witness(spec, &ud, 2.0 * period, &post)?
    );

    println!("{}", run_verify(&cfg)?);
    Ok(())
}
