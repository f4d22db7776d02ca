//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! 256-bit key is `seed (LE) || domain (LE) || 0…` and whose 64-bit stream
//! id is the realization or shot index. Streams with different indices are
//! independent, and a given `(seed, domain, index)` always yields the same
//! sequence no matter which thread asks for it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the draws of different subsystems sharing one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    CombPhases = 1,
    PhotonCounts = 2,
    FitJitter = 3,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
