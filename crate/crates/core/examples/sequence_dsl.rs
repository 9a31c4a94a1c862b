// SPDX-License-Identifier: Apache-2.0

//! Writing a pulse sequence in the text format, checking it, and running it.
//! A malformed line is reported with its line and column.
//!
//! cargo run --release --example sequence_dsl [shots]

use echocorr::engine::{Model, SemiclassicalBackend, SweepResult};
use echocorr::sequence::dsl::{parse_sequence, render_sequence};
use echocorr::sequence::SequenceOptions;

const TWO_ECHOES: &str = "\
# two Hahn echoes with the singlet locked in between
init S
evolve 1.55us sep
xpulse pi
evolve 1.55us sep
measure
lock S 19.2us
init S
evolve 1.55us sep
xpulse amp=3.2189 dur=20ns err=0.05
evolve 1.55us sep
measure fs=0.95 ft=0.9
";

fn main() -> echocorr::Result<()> {
    let shots = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let seq = parse_sequence(TWO_ECHOES)?;
    println!("{}", render_sequence(&seq));
    println!("total {:.2} us, {} measurements", seq.total_duration() * 1e6, seq.measurement_count());

    let backend = SemiclassicalBackend::new(Model::default(), SequenceOptions::default(), shots, 1)?;
    let r = SweepResult::from_pairs(0.0, &backend.run_counts(&seq)?);
    println!(
        "P1 = {:.4}, P2 = {:.4}, covariance = {:+.4} ± {:.4}",
        r.p1_mean,
        r.p2_mean.unwrap(),
        r.covariance.unwrap(),
        r.cov_stderr.unwrap()
    );

    for bad in ["init S\nevolve 3 sep\n", "evolve 1us sep\nmeasure\n", "init S\nxpulse pi amp=1 dur=20ns\n"] {
        println!("{:?} -> {}", bad, parse_sequence(bad).unwrap_err());
    }
    Ok(())
}
