// SPDX-License-Identifier: Apache-2.0

pub mod analysis;
pub mod bath;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod physics;
pub mod rng;
pub mod sequence;
pub mod verify;

pub use error::{Error, Result};
