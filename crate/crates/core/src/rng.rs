//! Counter-based random streams.
//!
//! Every stream is keyed by `(master seed, purpose, agent, iteration)`. The
//! key is hashed with SHA-256 into a ChaCha20 seed, so any stream can be
//! recreated from its path alone and no two consumers ever share state.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

const DOMAIN: &[u8] = b"dpsm-stream-v1";

/// Where a stream sits in the derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamPath<'a> {
    pub master: u64,
    pub purpose: &'a str,
    pub agent: u64,
    pub iteration: u64,
}

/// A seeded random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn from_path(path: StreamPath<'_>) -> Self {
        let mut h = Sha256::new();
        h.update(DOMAIN);
        h.update(path.master.to_le_bytes());
        h.update((path.purpose.len() as u64).to_le_bytes());
        h.update(path.purpose.as_bytes());
        h.update(path.agent.to_le_bytes());
        h.update(path.iteration.to_le_bytes());
        let seed: [u8; 32] = h.finalize().into();
        RngStream {
            inner: ChaCha20Rng::from_seed(seed),
        }
    }
}

/// Derive the stream for `(master, purpose, agent, iteration)`.
pub fn derive_stream(master: u64, purpose: &str, agent: u64, iteration: u64) -> RngStream {
    RngStream::from_path(StreamPath {
        master,
        purpose,
        agent,
        iteration,
    })
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
