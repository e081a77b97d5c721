//! Seeded random streams.
//!
//! Every parallel consumer draws from its own ChaCha8 stream, addressed by
//! `(seed, stream id)`, so results never depend on scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Single master stream for `seed`.
pub fn master(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-stream `id` derived from `seed`.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Stream id for particle `index` of tower level `level`.
pub fn particle_stream_id(level: usize, index: usize) -> u64 {
    ((level as u64) << 40) | index as u64
}

/// Uniform draw on (0, 1], 53 random bits.
pub fn unit_open_closed<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on [0, 1).
pub fn unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard exponential variate by inversion.
pub fn unit_exponential<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    -crate::math::ln(unit_open_closed(rng))
}
