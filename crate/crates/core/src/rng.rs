//! Counter-based random streams.
//!
//! Every replicate of a simulation draws from its own ChaCha8 stream keyed by
//! `(seed, replicate index)`. Because the stream for a replicate never depends
//! on which worker runs it, serial and parallel runs see identical numbers.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator type handed to every replicate.
pub type StreamRng = ChaCha8Rng;

/// Independent stream for replicate `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw on the open interval (0, 1); never returns 0 or 1.
#[inline]
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((rng.next_u64() >> 11) as f64 + 0.5) * SCALE
}

/// Uniform integer in `0..bound` (bound > 0), by rejection so it is unbiased.
#[inline]
pub fn below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % bound;
        }
    }
}
