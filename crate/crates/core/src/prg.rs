//! Seeded pseudo-random expansion.
//!
//! Every random object in the protocols is a pure function of a [`Seed`]:
//! the SHAKE-128 stream of `seed ∥ tag` (one domain byte) is consumed as
//! little-endian 32-bit words, and uniform values below a bound are obtained
//! by masking to the bound's bit length and rejecting out-of-range words.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::{Shake128, Shake128Reader};

use crate::error::{Error, Result};
use crate::field::FqVector;

pub const TAG_VECTOR: u8 = 0x01;
pub const TAG_NONZERO_VECTOR: u8 = 0x02;
pub const TAG_PERMUTATION: u8 = 0x03;
pub const TAG_SCALAR: u8 = 0x04;
pub const TAG_DERIVE: u8 = 0x05;
pub const TAG_GAUSSIAN: u8 = 0x06;
pub const TAG_STREAM: u8 = 0x07;

/// Opaque PRG seed. Its length is fixed per parameter set (`seed_len / 8`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Seed(Vec<u8>);

impl std::fmt::Debug for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Seed({})", hex::encode(&self.0))
    }
}

impl Seed {
    pub fn new(bytes: Vec<u8>) -> Self {
        Seed(bytes)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        hex::decode(s)
            .map(Seed)
            .map_err(|e| Error::Malformed(format!("seed hex: {e}")))
    }

    /// Seed drawn from the operating system's entropy source.
    pub fn random(len: usize) -> Self {
        let mut b = vec![0u8; len];
        getrandom::getrandom(&mut b).expect("OS entropy source unavailable");
        Seed(b)
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

    /// Child seed of `len` bytes for the given label.
    pub fn derive(&self, label: &[u8], len: usize) -> Seed {
        let mut xof = XofStream::with_suffix(&self.0, TAG_DERIVE, label);
        let mut out = vec![0u8; len];
        xof.fill(&mut out);
        Seed(out)
    }

    /// Child seed for an indexed label, e.g. the `i`-th resampling attempt.
    pub fn derive_indexed(&self, label: &[u8], index: u64, len: usize) -> Seed {
        let mut l = label.to_vec();
        l.extend_from_slice(&index.to_be_bytes());
        self.derive(&l, len)
    }
}

/// SHAKE-128 output stream with rejection sampling helpers.
pub struct XofStream {
    reader: Shake128Reader,
}

impl XofStream {
    pub fn new(seed: &[u8], tag: u8) -> Self {
        Self::with_suffix(seed, tag, &[])
    }

    fn with_suffix(seed: &[u8], tag: u8, suffix: &[u8]) -> Self {
        let mut h = Shake128::default();
        h.update(seed);
        h.update(&[tag]);
        h.update(suffix);
        XofStream {
            reader: h.finalize_xof(),
        }
    }

    pub fn fill(&mut self, out: &mut [u8]) {
        self.reader.read(out);
    }

    pub fn next_u32(&mut self) -> u32 {
        let mut b = [0u8; 4];
        self.reader.read(&mut b);
        u32::from_le_bytes(b)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut b = [0u8; 8];
        self.reader.read(&mut b);
        u64::from_le_bytes(b)
    }

    /// Uniform integer in `[0, bound)`.
    pub fn next_below(&mut self, bound: u32) -> u32 {
        assert!(bound > 0);
        if bound == 1 {
            return 0;
        }
        let mask = u32::MAX >> (bound - 1).leading_zeros();
        loop {
            let x = self.next_u32() & mask;
            if x < bound {
                return x;
            }
        }
    }

    pub fn bytes(&mut self, len: usize) -> Vec<u8> {
        let mut out = vec![0u8; len];
        self.fill(&mut out);
        out
    }
}

/// Target domain of [`expand_uniform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Vector(usize),
    NonzeroVector(usize),
    Permutation(usize),
    Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expanded {
    Vector(FqVector),
    Permutation(Vec<usize>),
    Scalar(u16),
}

pub fn expand_uniform(seed: &Seed, q: u16, domain: Domain) -> Expanded {
    match domain {
        Domain::Vector(len) => Expanded::Vector(expand_vector(seed, q, len)),
        Domain::NonzeroVector(len) => Expanded::Vector(expand_nonzero_vector(seed, q, len)),
        Domain::Permutation(len) => Expanded::Permutation(expand_permutation(seed, len)),
        Domain::Scalar => Expanded::Scalar(expand_scalar(seed, q)),
    }
}

/// Uniform vector in Z_q^len.
pub fn expand_vector(seed: &Seed, q: u16, len: usize) -> FqVector {
    let mut xof = XofStream::new(seed.as_bytes(), TAG_VECTOR);
    let elems = (0..len).map(|_| xof.next_below(q as u32) as u16).collect();
    FqVector::new(q, elems).expect("sampled below q")
}

/// Uniform vector with entries in `[1, q)`.
pub fn expand_nonzero_vector(seed: &Seed, q: u16, len: usize) -> FqVector {
    let mut xof = XofStream::new(seed.as_bytes(), TAG_NONZERO_VECTOR);
    let elems = (0..len)
        .map(|_| 1 + xof.next_below(q as u32 - 1) as u16)
        .collect();
    FqVector::new(q, elems).expect("sampled below q")
}

/// Uniform permutation of `0..len` by Fisher–Yates; entry `i` is the image of `i`.
pub fn expand_permutation(seed: &Seed, len: usize) -> Vec<usize> {
    let mut xof = XofStream::new(seed.as_bytes(), TAG_PERMUTATION);
    let mut perm: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = xof.next_below(i as u32 + 1) as usize;
        perm.swap(i, j);
    }
    perm
}

pub fn expand_scalar(seed: &Seed, q: u16) -> u16 {
    XofStream::new(seed.as_bytes(), TAG_SCALAR).next_below(q as u32) as u16
}

/// Uniform vector of exact Hamming weight `weight`: support chosen by a
/// partial Fisher–Yates shuffle, nonzero values uniform in `[1, q)`.
pub fn expand_weight_vector(seed: &Seed, q: u16, len: usize, weight: usize) -> FqVector {
    assert!(weight <= len);
    let mut xof = XofStream::new(seed.as_bytes(), TAG_NONZERO_VECTOR ^ 0x80);
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..weight {
        let j = i + xof.next_below((len - i) as u32) as usize;
        idx.swap(i, j);
    }
    let mut elems = vec![0u16; len];
    for &pos in &idx[..weight] {
        elems[pos] = 1 + xof.next_below(q as u32 - 1) as u16;
    }
    FqVector::new(q, elems).expect("sampled below q")
}
