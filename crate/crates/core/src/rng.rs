// SPDX-License-Identifier: Apache-2.0

//! Counter-based random streams.
//!
//! Every shot draws from ChaCha8 substreams addressed by
//! `(root seed, purpose, shot index)`: the key is derived from the root seed
//! and the purpose, the 64-bit stream id is the shot index. A shot's numbers
//! therefore never depend on which worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Bath = 1,
    Measurement = 2,
    PulseNoise = 3,
    Preparation = 4,
}

const DOMAIN: &[u8; 8] = b"echocorr";

pub fn substream(root_seed: u64, purpose: StreamPurpose, shot: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&root_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[16..24].copy_from_slice(DOMAIN);
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(shot);
    rng
}
