//! Deterministic random streams.
//!
//! Every sampling routine takes a seed and a stream number, so two
//! independent checks never share draws and a witness can be reproduced from
//! `(seed, stream, draw index)` alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform integer vector in `[-r, r]^d`.
pub fn int_vector(rng: &mut Stream, d: usize, r: i64) -> Vec<i64> {
    (0..d).map(|_| rng.gen_range(-r..=r)).collect()
}
