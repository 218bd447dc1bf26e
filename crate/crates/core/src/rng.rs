//! Seed and stream derivation.
//!
//! Every random stream is a ChaCha8 keystream keyed by the 64-bit run seed.
//! The 64-bit ChaCha stream selector is split as `point << 32 | replica`,
//! where `point` enumerates parameter points of a sweep (e.g. the index of `L`
//! in the size list) and `replica` enumerates independent chains. Distinct
//! `(point, replica)` pairs therefore read disjoint keystreams, and a replica's
//! stream does not depend on how many other replicas exist.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn stream_id(point: u32, replica: u32) -> u64 {
    (u64::from(point) << 32) | u64::from(replica)
}

pub fn stream_rng(seed: u64, point: u32, replica: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(point, replica));
    rng
}
