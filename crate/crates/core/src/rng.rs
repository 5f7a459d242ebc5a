//! Seeded substreams.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng` whose seed is a
//! stable mix of the run seed, a purpose label, and a list of indices. Two
//! workers that ask for the same `(seed, label, indices)` get the same stream
//! no matter which thread or in which order they run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes; fixed across platforms and releases.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

pub fn derive_seed(seed: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = splitmix(seed ^ label_hash(label));
    for &i in indices {
        h = splitmix(h ^ splitmix(i));
    }
    h
}

pub fn substream(seed: u64, label: &str, indices: &[u64]) -> Stream {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label, indices))
}
