use crate::error::{Error, Result};

/// Largest modulus accepted: residues are stored in 16 bits and products of
/// two residues must fit comfortably in a `u32`.
pub const MAX_MODULUS: u16 = 1 << 15;

/// Scheme dimensions and protocol lengths.
///
/// `seed_len` and `com_len` are in bits. `n` is the row dimension of `A`
/// (length of `b` and `e`), `m` the secret dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub n: usize,
    pub m: usize,
    pub q: u16,
    pub sigma: f64,
    pub rounds: u32,
    pub seed_len: u16,
    pub com_len: u16,
}

impl Params {
    /// Parameters with the default error width (σ = 3), 128-bit seeds, 256-bit
    /// commitments and 28 rounds.
    pub fn new(n: usize, m: usize, q: u16) -> Self {
        Params {
            n,
            m,
            q,
            sigma: 3.0,
            rounds: 28,
            seed_len: 128,
            com_len: 256,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_seed_len(mut self, bits: u16) -> Self {
        self.seed_len = bits;
        self
    }

    pub fn with_com_len(mut self, bits: u16) -> Self {
        self.com_len = bits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.q < 2 || self.q >= MAX_MODULUS {
            return bad(format!("q = {} outside [2, {})", self.q, MAX_MODULUS));
        }
        if !is_prime(self.q as u32) {
            return bad(format!("q = {} is not prime", self.q));
        }
        if self.m == 0 {
            return bad("m must be positive".into());
        }
        if self.m >= self.n {
            return bad(format!("need m < n, got m = {}, n = {}", self.m, self.n));
        }
        if self.n > u16::MAX as usize {
            return bad(format!("n = {} exceeds 65535", self.n));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma = {} must be positive", self.sigma));
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.seed_len == 0 || self.seed_len % 8 != 0 {
            return bad(format!("seed_len = {} not a positive multiple of 8", self.seed_len));
        }
        if self.com_len == 0 || self.com_len % 8 != 0 || self.com_len > 256 {
            return bad(format!(
                "com_len = {} not a multiple of 8 in [8, 256]",
                self.com_len
            ));
        }
        Ok(())
    }

    pub fn seed_bytes(&self) -> usize {
        self.seed_len as usize / 8
    }

    pub fn com_bytes(&self) -> usize {
        self.com_len as usize / 8
    }

    /// ⌈log₂ q⌉, the information size of one field element.
    pub fn elem_bits(&self) -> u32 {
        ceil_log2(self.q as u64)
    }
}

/// ⌈log₂ x⌉ for x ≥ 1.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1);
    64 - (x - 1).leading_zeros()
}

pub fn is_prime(x: u32) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
