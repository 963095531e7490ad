//! String commitments `com(message; randomness)`.

use sha3::{Digest, Sha3_256};

use crate::params::Params;
use crate::prg::Seed;

const COMMIT_DOMAIN: &[u8] = b"lweid/commit/v1";

/// Commitment digest; `com_len / 8` bytes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Commitment(Vec<u8>);

impl std::fmt::Debug for Commitment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Commitment({})", hex::encode(&self.0))
    }
}

impl Commitment {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Commitment(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A committed message together with the randomness that opens it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub message: Vec<u8>,
    pub randomness: Seed,
}

/// Pluggable commitment scheme used by both identification protocols.
pub trait CommitmentScheme: Send + Sync {
    /// Digest length in bytes.
    fn digest_len(&self) -> usize;

    fn commit(&self, message: &[u8], randomness: &Seed) -> Commitment;

    fn verify_opening(&self, c: &Commitment, message: &[u8], randomness: &Seed) -> bool {
        self.commit(message, randomness) == *c
    }
}

/// `SHA3-256(domain ∥ len(message) as u64 LE ∥ message ∥ randomness)`,
/// truncated to the configured digest length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashCommitment {
    digest_len: usize,
}

impl HashCommitment {
    pub fn new(params: &Params) -> Self {
        Self::with_digest_len(params.com_bytes())
    }

    pub fn with_digest_len(digest_len: usize) -> Self {
        assert!((1..=32).contains(&digest_len));
        HashCommitment { digest_len }
    }
}

impl CommitmentScheme for HashCommitment {
    fn digest_len(&self) -> usize {
        self.digest_len
    }

    fn commit(&self, message: &[u8], randomness: &Seed) -> Commitment {
        let mut h = Sha3_256::new();
        h.update(COMMIT_DOMAIN);
        h.update((message.len() as u64).to_le_bytes());
        h.update(message);
        h.update(randomness.as_bytes());
        let d = h.finalize();
        Commitment(d[..self.digest_len].to_vec())
    }
}

pub fn commit(message: &[u8], randomness: &Seed, params: &Params) -> Commitment {
    HashCommitment::new(params).commit(message, randomness)
}

pub fn verify_opening(c: &Commitment, message: &[u8], randomness: &Seed, params: &Params) -> bool {
    HashCommitment::new(params).verify_opening(c, message, randomness)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommitmentSlot {
    C1,
    C2,
    C3,
}

/// Two distinct openings of the same commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitmentCollision {
    pub slot: CommitmentSlot,
    pub first: Opening,
    pub second: Opening,
}
