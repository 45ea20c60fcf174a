//! Seed derivation.
//!
//! Every stochastic step receives its own sub-seed computed from the master
//! seed, a purpose label and an index, so parallel work can be dispatched in
//! any order without changing results. The mix is SplitMix64 applied over an
//! FNV-1a hash of the label.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Sub-seed for `(master, purpose, index)`.
pub fn derive(master: u64, purpose: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(purpose)).wrapping_add(index))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
