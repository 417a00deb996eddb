//! Seed handling.
//!
//! Every randomized operation draws from a private ChaCha stream derived from
//! `(seed, tag)`, so two operations never share or interleave a stream and a
//! result depends only on its own inputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub const fn new(value: u64) -> Self {
        Seed(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// A child seed for a named sub-operation.
    pub fn derive(self, tag: &str) -> Seed {
        Seed(mix(self.0 ^ fnv1a(tag.as_bytes())))
    }

    /// A child seed keyed by an integer (row, column, tree index, ...).
    pub fn derive_index(self, index: u64) -> Seed {
        Seed(mix(self.0.wrapping_add(mix(
            index.wrapping_add(0x9E37_79B9_7F4A_7C15)
        ))))
    }

    pub fn rng(self, tag: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive(tag).0)
    }

    /// Stream for a single `(row, column)` cell; independent of evaluation order.
    pub fn cell_rng(self, tag: &str, row: u64, column: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive(tag).derive_index(row).derive_index(column).0)
    }
}

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
