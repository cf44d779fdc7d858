//! Seeded random streams. Every consumer derives an independent ChaCha stream
//! from `(seed, stream)` so results do not depend on evaluation order.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::TorusVector;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a list of words into one seed (splitmix64 finalizer chain).
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}

/// i.i.d. uniform phases.
pub fn random_torus<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TorusVector {
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    TorusVector::from_phases(&phases).expect("n >= 1")
}

/// Start vector number `index` of the search seeded by `seed`.
pub fn start_vector(n: usize, seed: u64, index: u64) -> TorusVector {
    random_torus(n, &mut stream(seed, index))
}
