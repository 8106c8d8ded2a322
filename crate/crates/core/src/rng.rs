//! Named random substreams.
//!
//! Every random draw in the crate comes from a [`Stream`] derived from a
//! master seed by hashing a purpose label and an index. Two streams with the
//! same derivation path produce identical draws, so work can be split across
//! any number of threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// A deterministic, derivable source of random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    key: [u8; 32],
}

impl Stream {
    pub fn root(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"stationarity/root");
        hasher.update(seed.to_le_bytes());
        Stream {
            key: hasher.finalize().into(),
        }
    }

    /// Child stream identified by `label` and `index`.
    pub fn derive(&self, label: &str, index: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(self.key);
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        hasher.update(index.to_le_bytes());
        Stream {
            key: hasher.finalize().into(),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }
}
