//! Verifier oracles and simulator bookkeeping.

use crate::cve::{CveChallenger, CveCommitments};
use crate::field::FqVector;
use crate::prg::{XofStream, TAG_STREAM};
use crate::stern::{SternChallenger, SternCommitments};

/// Knobs for the simulator. `fixed_permutation` reuses one permutation seed
/// for every round; it exists only as a detectably broken negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub rewind_budget: u32,
    pub fixed_permutation: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            rewind_budget: 1000,
            fixed_permutation: false,
        }
    }
}

/// Simulated rounds plus the number of oracle queries each one needed.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    pub transcripts: Vec<T>,
    pub oracle_calls: Vec<u32>,
}


/// Honest verifier as a random oracle: α and the challenge are read from the
/// SHAKE-128 stream of `nonce ∥ transcript-so-far`, so they are uniform and a
/// pure function of what the prover has sent.
#[derive(Debug, Clone)]
pub struct HashChallenger {
    nonce: Vec<u8>,
    q: u16,
}

impl HashChallenger {
    pub fn new(nonce: &[u8], q: u16) -> Self {
        HashChallenger {
            nonce: nonce.to_vec(),
            q,
        }
    }

    fn stream(&self, label: &[u8], parts: &[&[u8]]) -> XofStream {
        let mut buf = self.nonce.clone();
        buf.extend_from_slice(label);
        for p in parts {
            buf.extend_from_slice(&(p.len() as u32).to_be_bytes());
            buf.extend_from_slice(p);
        }
        XofStream::new(&buf, TAG_STREAM)
    }
}

impl SternChallenger for HashChallenger {
    fn challenge(&self, c: &SternCommitments) -> u8 {
        self.stream(b"stern/ch", &[c.c1.as_bytes(), c.c2.as_bytes(), c.c3.as_bytes()])
            .next_below(3) as u8
            + 1
    }
}

impl CveChallenger for HashChallenger {
    fn alpha(&self, c: &CveCommitments) -> u16 {
        self.stream(b"cve/alpha", &[c.c1.as_bytes(), c.c2.as_bytes()])
            .next_below(self.q as u32) as u16
    }

    fn challenge(&self, c: &CveCommitments, alpha: u16, beta: &FqVector) -> u8 {
        self.stream(
            b"cve/ch",
            &[
                c.c1.as_bytes(),
                c.c2.as_bytes(),
                &alpha.to_le_bytes(),
                &beta.to_bytes(),
            ],
        )
        .next_below(2) as u8
            + 1
    }
}
