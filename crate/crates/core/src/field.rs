//! Vectors and matrices over the prime field Z_q, plus the Gaussian
//! elimination routines the syndrome-based scheme needs.
//!
//! Every residue is kept in canonical form `[0, q)` and stored as a `u16`.

use crate::error::{Error, Result};

#[inline]
pub fn add_mod(a: u16, b: u16, q: u16) -> u16 {
    let s = a as u32 + b as u32;
    (if s >= q as u32 { s - q as u32 } else { s }) as u16
}

#[inline]
pub fn sub_mod(a: u16, b: u16, q: u16) -> u16 {
    if a >= b {
        a - b
    } else {
        (a as u32 + q as u32 - b as u32) as u16
    }
}

#[inline]
pub fn mul_mod(a: u16, b: u16, q: u16) -> u16 {
    ((a as u32 * b as u32) % q as u32) as u16
}

#[inline]
pub fn neg_mod(a: u16, q: u16) -> u16 {
    if a == 0 {
        0
    } else {
        q - a
    }
}

/// Multiplicative inverse of a nonzero residue modulo a prime.
pub fn inv_mod(a: u16, q: u16) -> u16 {
    assert!(a % q != 0, "zero has no inverse");
    // a^(q-2) mod q
    let (mut base, mut exp, mut acc) = (a as u32 % q as u32, q as u32 - 2, 1u32);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q as u32;
        }
        base = base * base % q as u32;
        exp >>= 1;
    }
    acc as u16
}

/// Reduce a signed integer into `[0, q)`.
#[inline]
pub fn reduce_i64(x: i64, q: u16) -> u16 {
    x.rem_euclid(q as i64) as u16
}

/// Centered representative of a residue, in `(-q/2, q/2]`.
#[inline]
pub fn centered(x: u16, q: u16) -> i32 {
    if x as u32 * 2 > q as u32 {
        x as i32 - q as i32
    } else {
        x as i32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqVector {
    q: u16,
    elems: Vec<u16>,
}

impl FqVector {
    pub fn new(q: u16, elems: Vec<u16>) -> Result<Self> {
        if let Some(&bad) = elems.iter().find(|&&x| x >= q) {
            return Err(Error::Malformed(format!("residue {bad} not below q = {q}")));
        }
        Ok(FqVector { q, elems })
    }

    pub fn from_i64(q: u16, vals: &[i64]) -> Self {
        FqVector {
            q,
            elems: vals.iter().map(|&x| reduce_i64(x, q)).collect(),
        }
    }

    pub fn zeros(q: u16, len: usize) -> Self {
        FqVector {
            q,
            elems: vec![0; len],
        }
    }

    pub fn modulus(&self) -> u16 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.elems
    }

    pub fn into_inner(self) -> Vec<u16> {
        self.elems
    }

    /// Hamming weight: number of nonzero entries.
    pub fn weight(&self) -> usize {
        self.elems.iter().filter(|&&x| x != 0).count()
    }

    fn check_compatible(&self, other: &FqVector) -> Result<()> {
        if self.q != other.q {
            return Err(Error::ModulusMismatch(self.q, other.q));
        }
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FqVector) -> Result<FqVector> {
        self.check_compatible(other)?;
        let q = self.q;
        Ok(FqVector {
            q,
            elems: self
                .elems
                .iter()
                .zip(&other.elems)
                .map(|(&a, &b)| add_mod(a, b, q))
                .collect(),
        })
    }

    pub fn sub(&self, other: &FqVector) -> Result<FqVector> {
        self.check_compatible(other)?;
        let q = self.q;
        Ok(FqVector {
            q,
            elems: self
                .elems
                .iter()
                .zip(&other.elems)
                .map(|(&a, &b)| sub_mod(a, b, q))
                .collect(),
        })
    }

    pub fn scale(&self, alpha: u16) -> FqVector {
        let q = self.q;
        let alpha = alpha % q;
        FqVector {
            q,
            elems: self.elems.iter().map(|&a| mul_mod(a, alpha, q)).collect(),
        }
    }

    /// Canonical encoding: each residue as 2 little-endian bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 * self.len());
        self.write_bytes(&mut out);
        out
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        for &x in &self.elems {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }

    /// Decode `len` residues from the canonical encoding; rejects
    /// out-of-range values and wrong lengths.
    pub fn from_bytes(q: u16, len: usize, bytes: &[u8]) -> Result<FqVector> {
        if bytes.len() != 2 * len {
            return Err(Error::Malformed(format!(
                "vector of {len} residues needs {} bytes, got {}",
                2 * len,
                bytes.len()
            )));
        }
        let elems = bytes
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        FqVector::new(q, elems)
    }
}

impl std::ops::Index<usize> for FqVector {
    type Output = u16;
    fn index(&self, i: usize) -> &u16 {
        &self.elems[i]
    }
}

/// Hamming weight of a vector.
pub fn vec_weight(v: &FqVector) -> usize {
    v.weight()
}

/// Row-major matrix over Z_q.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqMatrix {
    q: u16,
    rows: usize,
    cols: usize,
    entries: Vec<u16>,
}

impl FqMatrix {
    pub fn new(q: u16, rows: usize, cols: usize, entries: Vec<u16>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&x| x >= q) {
            return Err(Error::Malformed(format!("residue {bad} not below q = {q}")));
        }
        Ok(FqMatrix {
            q,
            rows,
            cols,
            entries,
        })
    }

    /// Build from signed rows, reducing every entry. Panics on ragged input.
    pub fn from_rows(q: u16, rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            entries.extend(r.iter().map(|&x| reduce_i64(x, q)));
        }
        FqMatrix {
            q,
            rows: rows.len(),
            cols,
            entries,
        }
    }

    pub fn zeros(q: u16, rows: usize, cols: usize) -> Self {
        FqMatrix {
            q,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(q: u16, n: usize) -> Self {
        let mut m = FqMatrix::zeros(q, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn modulus(&self) -> u16 {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> FqMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j));
            }
        }
        FqMatrix {
            q: self.q,
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// Matrix-vector product `A·v mod q`.
    pub fn mul_vec(&self, v: &FqVector) -> Result<FqVector> {
        if self.q != v.modulus() {
            return Err(Error::ModulusMismatch(self.q, v.modulus()));
        }
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        let q = self.q as u64;
        let elems = (0..self.rows)
            .map(|i| {
                let acc: u64 = self
                    .row(i)
                    .iter()
                    .zip(v.as_slice())
                    .map(|(&a, &x)| a as u64 * x as u64)
                    .sum();
                (acc % q) as u16
            })
            .collect();
        Ok(FqVector { q: self.q, elems })
    }

    /// Matrix product `self · rhs mod q`.
    pub fn mul(&self, rhs: &FqMatrix) -> Result<FqMatrix> {
        if self.q != rhs.q {
            return Err(Error::ModulusMismatch(self.q, rhs.q));
        }
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: rhs.rows,
            });
        }
        let q = self.q as u64;
        let mut entries = vec![0u16; self.rows * rhs.cols];
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let acc: u64 = (0..self.cols)
                    .map(|k| self.get(i, k) as u64 * rhs.get(k, j) as u64)
                    .sum();
                entries[i * rhs.cols + j] = (acc % q) as u16;
            }
        }
        Ok(FqMatrix {
            q: self.q,
            rows: self.rows,
            cols: rhs.cols,
            entries,
        })
    }

    /// Reduced row-echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (FqMatrix, Vec<usize>) {
        let q = self.q;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = inv_mod(m.get(r, c), q);
            m.scale_row(r, inv);
            for i in 0..m.rows {
                let f = m.get(i, c);
                if i != r && f != 0 {
                    m.sub_row_multiple(i, r, f);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn scale_row(&mut self, i: usize, f: u16) {
        let q = self.q;
        for x in &mut self.entries[i * self.cols..(i + 1) * self.cols] {
            *x = mul_mod(*x, f, q);
        }
    }

    // row[dst] -= f * row[src]
    fn sub_row_multiple(&mut self, dst: usize, src: usize, f: u16) {
        let q = self.q;
        for j in 0..self.cols {
            let t = mul_mod(self.get(src, j), f, q);
            let d = &mut self.entries[dst * self.cols + j];
            *d = sub_mod(*d, t, q);
        }
    }
}

pub fn mat_vec_mul(a: &FqMatrix, v: &FqVector) -> Result<FqVector> {
    a.mul_vec(v)
}

/// Left annihilator of a full-column-rank `n×m` matrix `A`: an `(n−m)×n`
/// matrix `B` of full row rank with `B·A = 0`, returned in reduced
/// row-echelon form so that it is a deterministic function of `A`.
///
/// Fails with [`Error::RankDeficient`] when `rank(A) < m`; callers resample.
pub fn left_nullspace(a: &FqMatrix) -> Result<FqMatrix> {
    let (n, m, q) = (a.rows(), a.cols(), a.modulus());
    // Rows of B span the null space of Aᵀ (m×n).
    let (r, pivots) = a.transpose().rref();
    if pivots.len() < m {
        return Err(Error::RankDeficient {
            rank: pivots.len(),
            needed: m,
        });
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut entries = vec![0u16; free.len() * n];
    for (k, &f) in free.iter().enumerate() {
        let row = &mut entries[k * n..(k + 1) * n];
        row[f] = 1;
        for (i, &pc) in pivots.iter().enumerate() {
            row[pc] = neg_mod(r.get(i, f), q);
        }
    }
    let basis = FqMatrix {
        q,
        rows: free.len(),
        cols: n,
        entries,
    };
    Ok(basis.rref().0)
}

/// A solution of `M·x = t`. Free variables of the reduced echelon form are set
/// to zero, so the result is a deterministic function of `(M, t)`.
pub fn solve_particular(m: &FqMatrix, t: &FqVector) -> Result<FqVector> {
    let q = m.modulus();
    if t.modulus() != q {
        return Err(Error::ModulusMismatch(q, t.modulus()));
    }
    if t.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            actual: t.len(),
        });
    }
    let cols = m.cols();
    let mut aug = Vec::with_capacity(m.rows() * (cols + 1));
    for i in 0..m.rows() {
        aug.extend_from_slice(m.row(i));
        aug.push(t[i]);
    }
    let aug = FqMatrix {
        q,
        rows: m.rows(),
        cols: cols + 1,
        entries: aug,
    };
    let (r, pivots) = aug.rref();
    if pivots.last() == Some(&cols) {
        return Err(Error::NoSolution);
    }
    let mut x = vec![0u16; cols];
    for (i, &pc) in pivots.iter().enumerate() {
        x[pc] = r.get(i, cols);
    }
    Ok(FqVector { q, elems: x })
}
