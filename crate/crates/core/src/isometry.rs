//! Hamming isometries: a coordinate permutation composed with nonzero
//! per-coordinate scaling.
//!
//! Convention: `perm[i]` is the *source* index feeding output slot `i`, so
//! `apply(v)[i] = gamma[perm[i]] · v[perm[i]]`. Indices are 0-based in memory
//! and 1-based in the serialized form.

use crate::error::{Error, Result};
use crate::field::{inv_mod, mul_mod, FqVector};
use crate::prg::{expand_nonzero_vector, expand_permutation, Seed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isometry {
    gamma: FqVector,
    perm: Vec<usize>,
}

impl Isometry {
    /// Validates that every scale is nonzero and `perm` is a bijection.
    pub fn new(gamma: FqVector, perm: Vec<usize>) -> Result<Self> {
        let n = gamma.len();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        if gamma.weight() != n {
            return Err(Error::Malformed("isometry scale has a zero entry".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Malformed("isometry permutation is not a bijection".into()));
            }
        }
        Ok(Isometry { gamma, perm })
    }

    pub fn from_seeds(seed_gamma: &Seed, seed_perm: &Seed, n: usize, q: u16) -> Self {
        Isometry {
            gamma: expand_nonzero_vector(seed_gamma, q, n),
            perm: expand_permutation(seed_perm, n),
        }
    }

    pub fn identity(q: u16, n: usize) -> Self {
        Isometry {
            gamma: FqVector::new(q, vec![1; n]).expect("q > 1"),
            perm: (0..n).collect(),
        }
    }

    pub fn gamma(&self) -> &FqVector {
        &self.gamma
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    fn check(&self, v: &FqVector) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: v.len(),
            });
        }
        if v.modulus() != self.gamma.modulus() {
            return Err(Error::ModulusMismatch(self.gamma.modulus(), v.modulus()));
        }
        Ok(())
    }

    pub fn apply(&self, v: &FqVector) -> Result<FqVector> {
        self.check(v)?;
        let q = v.modulus();
        let g = self.gamma.as_slice();
        let x = v.as_slice();
        let out = self.perm.iter().map(|&src| mul_mod(g[src], x[src], q)).collect();
        FqVector::new(q, out)
    }

    pub fn apply_inverse(&self, w: &FqVector) -> Result<FqVector> {
        self.check(w)?;
        let q = w.modulus();
        let g = self.gamma.as_slice();
        let mut out = vec![0u16; w.len()];
        for (i, &src) in self.perm.iter().enumerate() {
            out[src] = mul_mod(inv_mod(g[src], q), w[i], q);
        }
        FqVector::new(q, out)
    }

    /// Canonical bytes: γ as 2-byte LE residues, then the permutation as
    /// 2-byte LE 1-based indices.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 * self.len());
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        self.gamma.write_bytes(out);
        for &p in &self.perm {
            out.extend_from_slice(&((p + 1) as u16).to_le_bytes());
        }
    }
}

pub fn iso_from_seeds(seed_gamma: &Seed, seed_perm: &Seed, n: usize, q: u16) -> Isometry {
    Isometry::from_seeds(seed_gamma, seed_perm, n, q)
}

pub fn iso_apply(pi: &Isometry, v: &FqVector) -> Result<FqVector> {
    pi.apply(v)
}

pub fn iso_apply_inverse(pi: &Isometry, w: &FqVector) -> Result<FqVector> {
    pi.apply_inverse(w)
}
