//! Counter-based random streams.
//!
//! Every shot draws from its own ChaCha8 stream keyed by `(seed, shot index)`,
//! so a run is reproducible no matter how shots are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domains keep independent consumers of one master seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Shots = 0x5348_4f54,
    HashMatrix = 0x4841_5348,
    Reference = 0x5245_4631,
    Scenario = 0x5343_454e,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a sub-seed for `domain` from the master seed.
pub fn derive_seed(master: u64, domain: Domain) -> u64 {
    splitmix64(master ^ splitmix64(domain as u64))
}

/// Stream `index` of `domain` under `master`.
pub fn stream(master: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, domain));
    rng.set_stream(index);
    rng
}

/// A 64-bit seed for item `index` of `domain`, e.g. one row of a sweep.
pub fn sub_seed(master: u64, domain: Domain, index: u64) -> u64 {
    use rand::RngCore;
    stream(master, domain, index).next_u64()
}

/// The random stream owned by shot `index`.
pub fn shot_rng(master: u64, index: u64) -> ChaCha8Rng {
    stream(master, Domain::Shots, index)
}
