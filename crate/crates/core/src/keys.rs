//! LWE instance generation shared by both schemes.

use crate::error::{Error, Result};
use crate::field::{left_nullspace, FqMatrix, FqVector};
use crate::gaussian::sample_error;
use crate::params::Params;
use crate::prg::{expand_vector, Seed};

pub const MAX_RESAMPLES: u64 = 1000;

/// `(A, s, e, b = A·s + e)` with `0 < wt(e) < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LweInstance {
    pub a: FqMatrix,
    pub s: FqVector,
    pub e: FqVector,
    pub b: FqVector,
}

/// Draws error vectors from `draw(attempt)` until one has nontrivial weight.
pub fn resample_nondegenerate(
    n: usize,
    mut draw: impl FnMut(u64) -> FqVector,
) -> Result<(FqVector, u64)> {
    for attempt in 0..MAX_RESAMPLES {
        let e = draw(attempt);
        let w = e.weight();
        if w != 0 && w != n {
            return Ok((e, attempt));
        }
    }
    Err(Error::ResampleExhausted(format!(
        "no error vector with weight in (0, {n}) after {MAX_RESAMPLES} draws; increase sigma"
    )))
}

fn sample_matrix(params: &Params, master: &Seed, attempt: u64) -> FqMatrix {
    let seed = master.derive_indexed(b"A", attempt, params.seed_bytes());
    let entries = expand_vector(&seed, params.q, params.n * params.m).into_inner();
    FqMatrix::new(params.q, params.n, params.m, entries).expect("shape from params")
}

/// Deterministic instance from `master`. With `full_rank`, `A` is resampled
/// until it has rank `m`; the returned matrix is its left annihilator.
pub fn generate_instance(
    params: &Params,
    master: &Seed,
    full_rank: bool,
) -> Result<(LweInstance, Option<FqMatrix>)> {
    params.validate()?;
    let sb = params.seed_bytes();
    let (a, aperp) = if full_rank {
        let mut found = None;
        for attempt in 0..MAX_RESAMPLES {
            let a = sample_matrix(params, master, attempt);
            match left_nullspace(&a) {
                Ok(b) => {
                    found = Some((a, Some(b)));
                    break;
                }
                Err(Error::RankDeficient { .. }) => {
                    log::debug!("A rank deficient on attempt {attempt}, resampling");
                }
                Err(e) => return Err(e),
            }
        }
        found.ok_or_else(|| Error::ResampleExhausted("no full-rank A".into()))?
    } else {
        (sample_matrix(params, master, 0), None)
    };
    let s = expand_vector(&master.derive(b"s", sb), params.q, params.m);
    let (e, _) = resample_nondegenerate(params.n, |i| {
        sample_error(&master.derive_indexed(b"e", i, sb), params.n, params)
    })?;
    let b = a.mul_vec(&s)?.add(&e)?;
    Ok((LweInstance { a, s, e, b }, aperp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_error_triggers_resample() {
        let mut calls = 0;
        let (e, attempt) = resample_nondegenerate(4, |i| {
            calls += 1;
            match i {
                0 => FqVector::zeros(7, 4),
                1 => FqVector::from_i64(7, &[1, 2, 3, 4]),
                _ => FqVector::from_i64(7, &[0, 1, 0, 0]),
            }
        })
        .unwrap();
        assert_eq!(attempt, 2);
        assert_eq!(calls, 3);
        assert_eq!(e.weight(), 1);
    }

    #[test]
    fn always_degenerate_gives_up() {
        let params = Params::new(16, 8, 257).with_sigma(1e-3);
        let err = generate_instance(&params, &Seed::new(vec![0; 16]), false).unwrap_err();
        assert!(matches!(err, Error::ResampleExhausted(_)));
    }

    #[test]
    fn instance_is_consistent_and_deterministic() {
        let params = Params::new(32, 16, 257);
        let seed = Seed::new(vec![3; 16]);
        let (inst, aperp) = generate_instance(&params, &seed, true).unwrap();
        assert_eq!(inst.a.mul_vec(&inst.s).unwrap().add(&inst.e).unwrap(), inst.b);
        let aperp = aperp.unwrap();
        assert!(aperp.mul(&inst.a).unwrap().is_zero());
        assert_eq!(aperp.rows(), 16);
        let (again, _) = generate_instance(&params, &seed, true).unwrap();
        assert_eq!(inst, again);
    }
}
