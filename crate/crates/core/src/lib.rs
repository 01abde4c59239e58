//! Simulation and cryptanalysis workbench for the Y-00 (alpha-eta) coherent-state
//! direct-encryption protocol.
//!
//! The crate is organised bottom-up:
//!
//! * [`keystream`]: seed keys and LFSR expansion into an M-ary running key.
//! * [`modulation`]: the (key block, data bit) to phase-point map and constellation geometry.
//! * [`measurement`]: heterodyne sampling, the heterodyne phase marginal, Helstrom bounds
//!   for Bob (two pure states) and Eve (two M-fold mixtures in a truncated Fock basis).
//! * [`attack`]: the heterodyne wedge attack, its decryption table and XOR split, candidate
//!   key sets and brute-force known-plaintext search.
//! * [`infotheory`]: exact small-instance conditional-entropy oracle, the additive stream
//!   cipher baseline and the analytic decryption-failure probability.
//!
//! All randomness is passed in explicitly; [`rng`] documents the counter-based stream split
//! used by the parallel Monte Carlo drivers.

pub mod attack;
pub mod error;
pub mod infotheory;
pub mod keystream;
pub mod measurement;
pub mod modulation;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
