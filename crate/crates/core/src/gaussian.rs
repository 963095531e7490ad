//! Truncated discrete Gaussian error sampler (cumulative distribution table).

use crate::field::FqVector;
use crate::params::Params;
use crate::prg::{Seed, XofStream, TAG_GAUSSIAN};

/// Tail cut in multiples of σ.
pub const TAIL_CUT: f64 = 12.0;

const SCALE: f64 = (1u64 << 63) as f64;

/// Inverse-CDF table for the discrete Gaussian on `[-T, T]`, `T = ⌊12σ⌋`,
/// with probabilities proportional to `exp(−x²/2σ²)`. Cumulative
/// probabilities are stored as 63-bit fixed point.
#[derive(Debug, Clone)]
pub struct CdtTable {
    tail: i64,
    thresholds: Vec<u64>,
}

impl CdtTable {
    pub fn new(sigma: f64) -> Self {
        assert!(sigma > 0.0 && sigma.is_finite());
        let tail = (TAIL_CUT * sigma).floor() as i64;
        let weights: Vec<f64> = (-tail..=tail)
            .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut thresholds: Vec<u64> = weights
            .iter()
            .map(|w| {
                acc += w;
                ((acc / total) * SCALE).round().min(SCALE) as u64
            })
            .collect();
        *thresholds.last_mut().expect("table never empty") = 1u64 << 63;
        CdtTable { tail, thresholds }
    }

    pub fn tail(&self) -> i64 {
        self.tail
    }

    /// One signed sample.
    pub fn sample(&self, xof: &mut XofStream) -> i64 {
        let u = xof.next_u64() >> 1;
        let idx = self.thresholds.partition_point(|&t| t <= u);
        idx as i64 - self.tail
    }
}

/// `len` independent error samples reduced mod q; deterministic in `seed`.
pub fn sample_error(seed: &Seed, len: usize, params: &Params) -> FqVector {
    let table = CdtTable::new(params.sigma);
    let mut xof = XofStream::new(seed.as_bytes(), TAG_GAUSSIAN);
    let vals: Vec<i64> = (0..len).map(|_| table.sample(&mut xof)).collect();
    FqVector::from_i64(params.q, &vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::centered;

    /// Mean and variance of the truncated distribution by direct summation.
    fn exact_moments(sigma: f64) -> (f64, f64) {
        let t = (TAIL_CUT * sigma).floor() as i64;
        let w: Vec<(f64, f64)> = (-t..=t)
            .map(|x| (x as f64, (-((x * x) as f64) / (2.0 * sigma * sigma)).exp()))
            .collect();
        let z: f64 = w.iter().map(|p| p.1).sum();
        let mean = w.iter().map(|(x, p)| x * p).sum::<f64>() / z;
        let var = w.iter().map(|(x, p)| (x - mean).powi(2) * p).sum::<f64>() / z;
        (mean, var)
    }

    #[test]
    fn tiny_sigma_collapses_to_zero() {
        let params = Params::new(64, 32, 257).with_sigma(1e-3);
        let e = sample_error(&Seed::new(vec![1; 16]), 64, &params);
        assert_eq!(e.weight(), 0);
        let params = params.with_sigma(0.05);
        let e = sample_error(&Seed::new(vec![2; 16]), 1000, &params);
        assert_eq!(e.weight(), 0);
    }

    #[test]
    fn deterministic_in_seed() {
        let params = Params::new(64, 32, 257);
        let s = Seed::new(vec![7; 16]);
        assert_eq!(sample_error(&s, 64, &params), sample_error(&s, 64, &params));
    }

    #[test]
    fn moments_match_truncated_pmf() {
        let sigma = 3.0;
        let (mean, var) = exact_moments(sigma);
        assert!(mean.abs() < 1e-12);
        assert!((var - sigma * sigma).abs() / (sigma * sigma) < 0.01);

        let params = Params::new(64, 32, 257).with_sigma(sigma);
        let e = sample_error(&Seed::new(b"moments".to_vec()), 100_000, &params);
        let xs: Vec<f64> = e.as_slice().iter().map(|&x| centered(x, 257) as f64).collect();
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(m.abs() < 0.1, "mean {m}");
        assert!((v - sigma * sigma).abs() < 0.1 * sigma * sigma, "variance {v}");
        assert!(xs.iter().all(|x| x.abs() <= 36.0));
    }

    #[test]
    fn table_is_monotone_and_complete() {
        let t = CdtTable::new(2.5);
        assert_eq!(t.tail(), 30);
        assert!(t.thresholds.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*t.thresholds.last().unwrap(), 1u64 << 63);
    }
}
