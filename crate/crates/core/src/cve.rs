//! Five-pass identification with a verifier-chosen blind α ∈ Z_q and
//! challenges {1, 2}; per-round soundness error (q+1)/2q.
//!
//! Public key `(A, A⊥, y, b, p)` where `A⊥·A = 0` and `y = A⊥·e`. A round:
//!
//! ```text
//! P → V   c1 = com(γ ∥ Σ ∥ A⊥·u ; r1),  c2 = com(Π(u) ∥ Π(e) ; r2)
//! V → P   α
//! P → V   β = Π(u + α·e)
//! V → P   ch ∈ {1, 2}
//! P → V   ch = 1: r1 and the isometry seeds;  ch = 2: r2 and Π(e)
//! ```
//!
//! The `γ ∥ Σ` prefix of c1 is the canonical isometry encoding, used on both
//! the commit and the verify side.

use crate::commit::{
    Commitment, CommitmentCollision, CommitmentScheme, CommitmentSlot, HashCommitment, Opening,
};
use crate::error::{Error, Result};
use crate::field::{left_nullspace, solve_particular, FqMatrix, FqVector};
use crate::isometry::Isometry;
use crate::keys::generate_instance;
use crate::oracle::{SimOptions, Simulation};
use crate::params::Params;
use crate::prg::{expand_scalar, expand_vector, expand_weight_vector, Seed, XofStream, TAG_STREAM};
use crate::verdict::{RejectReason, Verdict};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvePublicKey {
    pub a: FqMatrix,
    pub aperp: FqMatrix,
    pub y: FqVector,
    pub b: FqVector,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CveSecretKey {
    pub s: FqVector,
    pub e: FqVector,
}

pub fn keypair_from_parts(
    a: FqMatrix,
    s: FqVector,
    e: FqVector,
) -> Result<(CvePublicKey, CveSecretKey)> {
    let aperp = left_nullspace(&a)?;
    let b = a.mul_vec(&s)?.add(&e)?;
    let y = aperp.mul_vec(&e)?;
    let p = e.weight();
    if p == 0 || p == e.len() {
        return Err(Error::Precondition(format!("error weight {p} is degenerate")));
    }
    Ok((CvePublicKey { a, aperp, y, b, p }, CveSecretKey { s, e }))
}

/// Checks every public-key invariant plus consistency with the secret.
pub fn keys_match(pk: &CvePublicKey, sk: &CveSecretKey) -> bool {
    let check = || -> Result<bool> {
        Ok(pk.a.mul_vec(&sk.s)?.add(&sk.e)? == pk.b
            && pk.aperp.mul_vec(&sk.e)? == pk.y
            && sk.e.weight() == pk.p
            && public_key_consistent(pk)?)
    };
    check().unwrap_or(false)
}

/// `A⊥·A = 0`, `A⊥` has full row rank and `A⊥·b = y`.
pub fn public_key_consistent(pk: &CvePublicKey) -> Result<bool> {
    let n = pk.a.rows();
    Ok(pk.aperp.mul(&pk.a)?.is_zero()
        && pk.aperp.rank() == n - pk.a.cols()
        && pk.aperp.mul_vec(&pk.b)? == pk.y)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CveCommitments {
    pub c1: Commitment,
    pub c2: Commitment,
}

#[derive(Debug, Clone)]
pub struct CveProverState {
    pub seed_gamma: Seed,
    pub seed_perm: Seed,
    pub r1: Seed,
    pub r2: Seed,
    pub u: FqVector,
    pub pi: Isometry,
    pub commitments: CveCommitments,
    pub alpha: Option<u16>,
    e: FqVector,
    z: FqVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CveResponse {
    One {
        r1: Seed,
        seed_gamma: Seed,
        seed_perm: Seed,
    },
    Two {
        r2: Seed,
        z: FqVector,
    },
}

impl CveResponse {
    pub fn challenge(&self) -> u8 {
        match self {
            CveResponse::One { .. } => 1,
            CveResponse::Two { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CveTranscript {
    pub commitments: CveCommitments,
    pub alpha: u16,
    pub beta: FqVector,
    pub challenge: u8,
    pub response: CveResponse,
}

/// Verifier strategy for the simulator: the blind after the commitments and
/// the challenge after β. Deterministic in its inputs.
pub trait CveChallenger {
    fn alpha(&self, c: &CveCommitments) -> u16;
    fn challenge(&self, c: &CveCommitments, alpha: u16, beta: &FqVector) -> u8;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CveExtraction {
    Secret(FqVector),
    Collision(Vec<CommitmentCollision>),
    /// Both answers verify yet `Π⁻¹(z)` misses the syndrome. A single blind
    /// cannot rule this out; answers under a second blind are needed.
    Unresolved { candidate: FqVector },
}

#[derive(Debug, Clone)]
pub struct Cve<C = HashCommitment> {
    params: Params,
    com: C,
}

impl Cve<HashCommitment> {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Cve {
            com: HashCommitment::new(&params),
            params,
        })
    }
}

impl<C: CommitmentScheme> Cve<C> {
    pub fn with_commitment(params: Params, com: C) -> Result<Self> {
        params.validate()?;
        Ok(Cve { params, com })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn commitment_scheme(&self) -> &C {
        &self.com
    }

    pub fn keygen(&self, master_seed: &Seed) -> Result<(CvePublicKey, CveSecretKey)> {
        let (inst, aperp) = generate_instance(&self.params, master_seed, true)?;
        let aperp = aperp.expect("full-rank generation returns the annihilator");
        let y = aperp.mul_vec(&inst.e)?;
        let p = inst.e.weight();
        Ok((
            CvePublicKey {
                a: inst.a,
                aperp,
                y,
                b: inst.b,
                p,
            },
            CveSecretKey {
                s: inst.s,
                e: inst.e,
            },
        ))
    }

    fn isometry(&self, seed_gamma: &Seed, seed_perm: &Seed) -> Isometry {
        Isometry::from_seeds(seed_gamma, seed_perm, self.params.n, self.params.q)
    }

    fn c1_message(pi: &Isometry, syndrome: &FqVector) -> Vec<u8> {
        let mut msg = pi.to_bytes();
        syndrome.write_bytes(&mut msg);
        msg
    }

    fn c2_message(left: &FqVector, right: &FqVector) -> Vec<u8> {
        let mut msg = left.to_bytes();
        right.write_bytes(&mut msg);
        msg
    }

    fn random_digest(&self, seed: &Seed) -> Commitment {
        Commitment::from_bytes(
            XofStream::new(seed.as_bytes(), TAG_STREAM).bytes(self.com.digest_len()),
        )
    }

    pub fn prover_commit(
        &self,
        pk: &CvePublicKey,
        sk: &CveSecretKey,
        round_seed: &Seed,
    ) -> Result<CveProverState> {
        let sb = self.params.seed_bytes();
        let seed_gamma = round_seed.derive(b"gamma", sb);
        let seed_perm = round_seed.derive(b"perm", sb);
        let r1 = round_seed.derive(b"r1", sb);
        let r2 = round_seed.derive(b"r2", sb);
        let u = expand_vector(&round_seed.derive(b"u", sb), self.params.q, self.params.n);
        let pi = self.isometry(&seed_gamma, &seed_perm);
        let z = pi.apply(&sk.e)?;
        let commitments = CveCommitments {
            c1: self
                .com
                .commit(&Self::c1_message(&pi, &pk.aperp.mul_vec(&u)?), &r1),
            c2: self.com.commit(&Self::c2_message(&pi.apply(&u)?, &z), &r2),
        };
        Ok(CveProverState {
            seed_gamma,
            seed_perm,
            r1,
            r2,
            u,
            pi,
            commitments,
            alpha: None,
            e: sk.e.clone(),
            z,
        })
    }

    /// `β = Π(u + α·e)`; records α in the state.
    pub fn prover_beta(&self, state: &mut CveProverState, alpha: u16) -> Result<FqVector> {
        if alpha >= self.params.q {
            return Err(Error::Precondition(format!("blind {alpha} not below q")));
        }
        state.alpha = Some(alpha);
        state.pi.apply(&state.u.add(&state.e.scale(alpha))?)
    }

    pub fn prover_respond(&self, state: &CveProverState, ch: u8) -> Result<CveResponse> {
        if state.alpha.is_none() {
            return Err(Error::Precondition("respond called before beta".into()));
        }
        Ok(match ch {
            1 => CveResponse::One {
                r1: state.r1.clone(),
                seed_gamma: state.seed_gamma.clone(),
                seed_perm: state.seed_perm.clone(),
            },
            2 => CveResponse::Two {
                r2: state.r2.clone(),
                z: state.z.clone(),
            },
            other => return Err(Error::InvalidChallenge(other)),
        })
    }

    pub fn verifier_check(
        &self,
        pk: &CvePublicKey,
        c: &CveCommitments,
        alpha: u16,
        beta: &FqVector,
        ch: u8,
        resp: &CveResponse,
    ) -> Verdict {
        match self.check_inner(pk, c, alpha, beta, ch, resp) {
            Ok(v) => v,
            Err(_) => Verdict::Reject(RejectReason::Malformed),
        }
    }

    fn check_inner(
        &self,
        pk: &CvePublicKey,
        c: &CveCommitments,
        alpha: u16,
        beta: &FqVector,
        ch: u8,
        resp: &CveResponse,
    ) -> Result<Verdict> {
        let (n, q, sb) = (self.params.n, self.params.q, self.params.seed_bytes());
        let malformed = Ok(Verdict::Reject(RejectReason::Malformed));
        if resp.challenge() != ch || alpha >= q || beta.len() != n || beta.modulus() != q {
            return malformed;
        }
        match resp {
            CveResponse::One {
                r1,
                seed_gamma,
                seed_perm,
            } => {
                if [r1, seed_gamma, seed_perm].iter().any(|s| s.len() != sb) {
                    return malformed;
                }
                let pi = self.isometry(seed_gamma, seed_perm);
                let syndrome = pk
                    .aperp
                    .mul_vec(&pi.apply_inverse(beta)?)?
                    .sub(&pk.y.scale(alpha))?;
                if !self
                    .com
                    .verify_opening(&c.c1, &Self::c1_message(&pi, &syndrome), r1)
                {
                    return Ok(Verdict::Reject(RejectReason::Commitment));
                }
            }
            CveResponse::Two { r2, z } => {
                if r2.len() != sb || z.len() != n || z.modulus() != q {
                    return malformed;
                }
                let left = beta.sub(&z.scale(alpha))?;
                if !self.com.verify_opening(&c.c2, &Self::c2_message(&left, z), r2) {
                    return Ok(Verdict::Reject(RejectReason::Commitment));
                }
                if z.weight() != pk.p {
                    return Ok(Verdict::Reject(RejectReason::Weight));
                }
            }
        }
        Ok(Verdict::Accept)
    }

    fn require_accepted(&self, pk: &CvePublicKey, t: &CveTranscript, ch: u8) -> Result<()> {
        if t.challenge != ch {
            return Err(Error::Precondition(format!(
                "expected a challenge-{ch} transcript, got challenge {}",
                t.challenge
            )));
        }
        let v = self.verifier_check(pk, &t.commitments, t.alpha, &t.beta, ch, &t.response);
        if !v.is_accept() {
            return Err(Error::Precondition(format!("transcript not accepted: {v}")));
        }
        Ok(())
    }

    /// `e = Π_a⁻¹(z_b)` from an accepting challenge-1 answer (which opens
    /// the isometry) and an accepting challenge-2 answer on the same
    /// commitments.
    pub fn extract(
        &self,
        pk: &CvePublicKey,
        t1: &CveTranscript,
        t2: &CveTranscript,
    ) -> Result<CveExtraction> {
        self.require_accepted(pk, t1, 1)?;
        self.require_accepted(pk, t2, 2)?;
        if t1.commitments != t2.commitments {
            return Err(Error::Precondition("transcripts do not share commitments".into()));
        }
        let (CveResponse::One {
            seed_gamma,
            seed_perm,
            ..
        }, CveResponse::Two { z, .. }) = (&t1.response, &t2.response)
        else {
            unreachable!("variants checked by require_accepted");
        };
        let e = self.isometry(seed_gamma, seed_perm).apply_inverse(z)?;
        if pk.aperp.mul_vec(&e)? == pk.y && e.weight() == pk.p {
            Ok(CveExtraction::Secret(e))
        } else {
            Ok(CveExtraction::Unresolved { candidate: e })
        }
    }

    /// Extraction from answers to both challenges under two distinct blinds on
    /// the same commitments: `[(α₁,ch 1), (α₁,ch 2), (α₂,ch 1), (α₂,ch 2)]`.
    /// Either recovers `e` with `A⊥·e = y`, `wt(e) = p`, or returns the
    /// commitment(s) opened two different ways.
    pub fn extract_two_blinds(
        &self,
        pk: &CvePublicKey,
        t: [&CveTranscript; 4],
    ) -> Result<CveExtraction> {
        for (i, ti) in t.iter().enumerate() {
            self.require_accepted(pk, ti, (i % 2) as u8 + 1)?;
            if ti.commitments != t[0].commitments {
                return Err(Error::Precondition("transcripts do not share commitments".into()));
            }
        }
        if (t[0].alpha, &t[0].beta) != (t[1].alpha, &t[1].beta)
            || (t[2].alpha, &t[2].beta) != (t[3].alpha, &t[3].beta)
            || t[0].alpha == t[2].alpha
        {
            return Err(Error::Precondition(
                "need one (α, β) per pair and two distinct blinds".into(),
            ));
        }
        let opening1 = |tr: &CveTranscript| -> Result<Opening> {
            let CveResponse::One {
                r1,
                seed_gamma,
                seed_perm,
            } = &tr.response
            else {
                unreachable!()
            };
            let pi = self.isometry(seed_gamma, seed_perm);
            let syndrome = pk
                .aperp
                .mul_vec(&pi.apply_inverse(&tr.beta)?)?
                .sub(&pk.y.scale(tr.alpha))?;
            Ok(Opening {
                message: Self::c1_message(&pi, &syndrome),
                randomness: r1.clone(),
            })
        };
        let opening2 = |tr: &CveTranscript| -> Result<Opening> {
            let CveResponse::Two { r2, z } = &tr.response else {
                unreachable!()
            };
            Ok(Opening {
                message: Self::c2_message(&tr.beta.sub(&z.scale(tr.alpha))?, z),
                randomness: r2.clone(),
            })
        };
        let mut collisions = Vec::new();
        for (slot, a, b) in [
            (CommitmentSlot::C1, opening1(t[0])?, opening1(t[2])?),
            (CommitmentSlot::C2, opening2(t[1])?, opening2(t[3])?),
        ] {
            if a != b {
                collisions.push(CommitmentCollision {
                    slot,
                    first: a,
                    second: b,
                });
            }
        }
        if !collisions.is_empty() {
            return Ok(CveExtraction::Collision(collisions));
        }
        match self.extract(pk, t[0], t[1])? {
            CveExtraction::Secret(e) => Ok(CveExtraction::Secret(e)),
            // consistent openings under two blinds force A⊥·Π⁻¹(z) = y
            _ => Err(Error::Precondition("openings consistent but witness invalid".into())),
        }
    }

    /// Rewinding simulator; see [`crate::stern::Stern::simulate`].
    pub fn simulate(
        &self,
        pk: &CvePublicKey,
        oracle: &impl CveChallenger,
        rounds: usize,
        rng_seed: &Seed,
        options: SimOptions,
    ) -> Result<Simulation<CveTranscript>> {
        let sb = self.params.seed_bytes();
        let (n, q) = (self.params.n, self.params.q);
        let syndrome_preimage = solve_particular(&pk.aperp, &pk.y)?;
        let fixed_perm = rng_seed.derive(b"fixed-perm", sb);
        let mut transcripts = Vec::with_capacity(rounds);
        let mut oracle_calls = Vec::with_capacity(rounds);
        for round in 0..rounds {
            let mut found = None;
            for attempt in 0..options.rewind_budget {
                let at = rng_seed.derive_indexed(b"sim", ((round as u64) << 32) | attempt as u64, sb);
                let guess = XofStream::new(at.as_bytes(), TAG_STREAM).next_below(2) as u8 + 1;
                let seed_gamma = at.derive(b"gamma", sb);
                let seed_perm = if options.fixed_permutation {
                    fixed_perm.clone()
                } else {
                    at.derive(b"perm", sb)
                };
                let (r1, r2) = (at.derive(b"r1", sb), at.derive(b"r2", sb));
                let filler = self.random_digest(&at.derive(b"filler", sb));
                let pi = self.isometry(&seed_gamma, &seed_perm);
                let u = expand_vector(&at.derive(b"u", sb), q, n);
                let (e_fake, commitments, response) = if guess == 1 {
                    let c1 = self
                        .com
                        .commit(&Self::c1_message(&pi, &pk.aperp.mul_vec(&u)?), &r1);
                    (
                        syndrome_preimage.clone(),
                        CveCommitments { c1, c2: filler },
                        CveResponse::One {
                            r1,
                            seed_gamma,
                            seed_perm,
                        },
                    )
                } else {
                    let e_fake = expand_weight_vector(&at.derive(b"e", sb), q, n, pk.p);
                    let z = pi.apply(&e_fake)?;
                    let c2 = self.com.commit(&Self::c2_message(&pi.apply(&u)?, &z), &r2);
                    (
                        e_fake,
                        CveCommitments { c1: filler, c2 },
                        CveResponse::Two { r2, z },
                    )
                };
                let alpha = oracle.alpha(&commitments);
                let beta = pi.apply(&u.add(&e_fake.scale(alpha))?)?;
                let ch = oracle.challenge(&commitments, alpha, &beta);
                if ch == guess {
                    found = Some((
                        CveTranscript {
                            commitments,
                            alpha,
                            beta,
                            challenge: ch,
                            response,
                        },
                        attempt + 1,
                    ));
                    break;
                }
            }
            let (t, calls) = found.ok_or(Error::RewindBudget {
                round,
                budget: options.rewind_budget,
            })?;
            transcripts.push(t);
            oracle_calls.push(calls);
        }
        Ok(Simulation {
            transcripts,
            oracle_calls,
        })
    }

    /// Cheating prover that bets on the blind: challenge 1 always passes,
    /// challenge 2 passes only when the verifier's α equals the guess.
    pub fn cheat_round(&self, pk: &CvePublicKey, rng_seed: &Seed) -> Result<CveCheater> {
        let sb = self.params.seed_bytes();
        let (n, q) = (self.params.n, self.params.q);
        let seed_gamma = rng_seed.derive(b"gamma", sb);
        let seed_perm = rng_seed.derive(b"perm", sb);
        let (r1, r2) = (rng_seed.derive(b"r1", sb), rng_seed.derive(b"r2", sb));
        let pi = self.isometry(&seed_gamma, &seed_perm);
        let alpha_guess = expand_scalar(&rng_seed.derive(b"alpha", sb), q);
        let u = expand_vector(&rng_seed.derive(b"u", sb), q, n);
        let e_syndrome = solve_particular(&pk.aperp, &pk.y)?;
        let decoy = expand_weight_vector(&rng_seed.derive(b"e", sb), q, n, pk.p);
        let z = pi.apply(&decoy)?;
        let predicted = pi
            .apply(&u.add(&e_syndrome.scale(alpha_guess))?)?
            .sub(&z.scale(alpha_guess))?;
        let commitments = CveCommitments {
            c1: self
                .com
                .commit(&Self::c1_message(&pi, &pk.aperp.mul_vec(&u)?), &r1),
            c2: self.com.commit(&Self::c2_message(&predicted, &z), &r2),
        };
        Ok(CveCheater {
            commitments,
            alpha_guess,
            seed_gamma,
            seed_perm,
            r1,
            r2,
            pi,
            u,
            e_syndrome,
            z,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CveCheater {
    commitments: CveCommitments,
    alpha_guess: u16,
    seed_gamma: Seed,
    seed_perm: Seed,
    r1: Seed,
    r2: Seed,
    pi: Isometry,
    u: FqVector,
    e_syndrome: FqVector,
    z: FqVector,
}

impl CveCheater {
    pub fn commitments(&self) -> &CveCommitments {
        &self.commitments
    }

    pub fn alpha_guess(&self) -> u16 {
        self.alpha_guess
    }

    pub fn beta(&self, alpha: u16) -> Result<FqVector> {
        self.pi.apply(&self.u.add(&self.e_syndrome.scale(alpha))?)
    }

    pub fn respond(&self, ch: u8) -> Result<CveResponse> {
        Ok(match ch {
            1 => CveResponse::One {
                r1: self.r1.clone(),
                seed_gamma: self.seed_gamma.clone(),
                seed_perm: self.seed_perm.clone(),
            },
            2 => CveResponse::Two {
                r2: self.r2.clone(),
                z: self.z.clone(),
            },
            other => return Err(Error::InvalidChallenge(other)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Cve, CvePublicKey, CveSecretKey) {
        let a = FqMatrix::from_rows(7, &[&[1, 2], &[3, 4], &[5, 6], &[0, 1]]);
        let (pk, sk) = keypair_from_parts(
            a,
            FqVector::from_i64(7, &[1, 2]),
            FqVector::from_i64(7, &[0, 1, 0, 0]),
        )
        .unwrap();
        (Cve::new(Params::new(4, 2, 7)).unwrap(), pk, sk)
    }

    #[test]
    fn toy_key_syndrome() {
        let (_, pk, sk) = toy();
        // Hand-computed annihilator [[4,1,0,2],[2,0,1,4]] gives y = (1, 0);
        // the stored one is its reduced echelon form.
        let reference = FqMatrix::from_rows(7, &[&[4, 1, 0, 2], &[2, 0, 1, 4]]);
        assert_eq!(reference.mul_vec(&sk.e).unwrap().as_slice(), &[1, 0]);
        assert_eq!(reference.mul_vec(&pk.b).unwrap().as_slice(), &[1, 0]);
        assert_eq!(reference.rref().0, pk.aperp);
        assert_eq!(pk.y, pk.aperp.mul_vec(&sk.e).unwrap());
        assert_eq!(pk.y, pk.aperp.mul_vec(&pk.b).unwrap());
        assert_eq!(pk.y.as_slice(), &[0, 1]);
        assert!(keys_match(&pk, &sk));
    }

    #[test]
    fn keygen_deterministic_and_consistent() {
        let cve = Cve::new(Params::new(32, 16, 257)).unwrap();
        let seed = Seed::new(vec![1; 16]);
        let (pk, sk) = cve.keygen(&seed).unwrap();
        assert!(keys_match(&pk, &sk));
        let (pk2, sk2) = cve.keygen(&seed).unwrap();
        assert_eq!((pk, sk), (pk2, sk2));
    }

    #[test]
    fn exhaustive_alpha_completeness_toy() {
        let (cve, pk, sk) = toy();
        for i in 0..10u8 {
            let base = cve.prover_commit(&pk, &sk, &Seed::new(vec![i; 16])).unwrap();
            for alpha in 0..7 {
                let mut st = base.clone();
                let beta = cve.prover_beta(&mut st, alpha).unwrap();
                for ch in 1..=2 {
                    let r = cve.prover_respond(&st, ch).unwrap();
                    assert_eq!(
                        cve.verifier_check(&pk, &st.commitments, alpha, &beta, ch, &r),
                        Verdict::Accept
                    );
                }
            }
        }
    }

    #[test]
    fn beta_two_path_evaluation() {
        let (cve, pk, sk) = toy();
        let mut st = cve.prover_commit(&pk, &sk, &Seed::new(vec![3; 16])).unwrap();
        let beta0 = cve.prover_beta(&mut st.clone(), 0).unwrap();
        assert_eq!(beta0, st.pi.apply(&st.u).unwrap());
        let beta = cve.prover_beta(&mut st, 3).unwrap();
        let direct = st.pi.apply(&st.u.add(&sk.e.scale(3)).unwrap()).unwrap();
        assert_eq!(beta, direct);
        let z = st.pi.apply(&sk.e).unwrap();
        assert_eq!(beta.sub(&z.scale(3)).unwrap(), st.pi.apply(&st.u).unwrap());
        assert_eq!(st.alpha, Some(3));
    }

    #[test]
    fn response_payloads() {
        let (cve, pk, sk) = toy();
        let mut st = cve.prover_commit(&pk, &sk, &Seed::new(vec![3; 16])).unwrap();
        assert!(cve.prover_respond(&st, 1).is_err());
        cve.prover_beta(&mut st, 2).unwrap();
        assert!(matches!(cve.prover_respond(&st, 1).unwrap(), CveResponse::One { .. }));
        match cve.prover_respond(&st, 2).unwrap() {
            CveResponse::Two { z, .. } => assert_eq!(z.weight(), pk.p),
            _ => panic!(),
        }
        assert_eq!(cve.prover_respond(&st, 3).unwrap_err(), Error::InvalidChallenge(3));
        assert!(cve.prover_beta(&mut st, 7).is_err());
    }

    #[test]
    fn c1_preimage_length() {
        let (n, m) = (4usize, 2usize);
        let pi = Isometry::identity(7, n);
        let msg = Cve::<HashCommitment>::c1_message(&pi, &FqVector::zeros(7, n - m));
        assert_eq!(msg.len(), n * 2 + n * 2 + (n - m) * 2);
    }

    #[test]
    fn negative_checks() {
        let cve = Cve::new(Params::new(32, 16, 257)).unwrap();
        let (pk, sk) = cve.keygen(&Seed::new(vec![5; 16])).unwrap();
        let mut st = cve.prover_commit(&pk, &sk, &Seed::new(vec![6; 16])).unwrap();
        let alpha = 11;
        let beta = cve.prover_beta(&mut st, alpha).unwrap();

        // weight-(p+1) z with c2 re-committed to match it
        let CveResponse::Two { r2, z } = cve.prover_respond(&st, 2).unwrap() else { panic!() };
        let mut zv = z.as_slice().to_vec();
        let pos = zv.iter().position(|&x| x == 0).unwrap();
        zv[pos] = 5;
        let z2 = FqVector::new(257, zv).unwrap();
        let mut c = st.commitments.clone();
        c.c2 = cve.com.commit(
            &Cve::<HashCommitment>::c2_message(&beta.sub(&z2.scale(alpha)).unwrap(), &z2),
            &r2,
        );
        assert_eq!(
            cve.verifier_check(&pk, &c, alpha, &beta, 2, &CveResponse::Two { r2, z: z2 }),
            Verdict::Reject(RejectReason::Weight)
        );

        // β perturbed along a direction outside ker(A⊥ ∘ Π⁻¹)
        let one = cve.prover_respond(&st, 1).unwrap();
        let delta = (0..32)
            .map(|i| {
                let mut d = vec![0u16; 32];
                d[i] = 1;
                FqVector::new(257, d).unwrap()
            })
            .find(|d| !pk.aperp.mul_vec(&st.pi.apply_inverse(d).unwrap()).unwrap().as_slice().iter().all(|&x| x == 0))
            .unwrap();
        let beta2 = beta.add(&delta).unwrap();
        assert_eq!(
            cve.verifier_check(&pk, &st.commitments, alpha, &beta2, 1, &one),
            Verdict::Reject(RejectReason::Commitment)
        );
        assert_eq!(
            cve.verifier_check(&pk, &st.commitments, 300, &beta, 1, &one),
            Verdict::Reject(RejectReason::Malformed)
        );
        assert_eq!(
            cve.verifier_check(&pk, &st.commitments, alpha, &beta, 2, &one),
            Verdict::Reject(RejectReason::Malformed)
        );
    }

    fn round(cve: &Cve, pk: &CvePublicKey, st: &CveProverState, alpha: u16, ch: u8) -> CveTranscript {
        let mut st = st.clone();
        let beta = cve.prover_beta(&mut st, alpha).unwrap();
        let t = CveTranscript {
            commitments: st.commitments.clone(),
            alpha,
            beta,
            challenge: ch,
            response: cve.prover_respond(&st, ch).unwrap(),
        };
        assert!(cve.verifier_check(pk, &t.commitments, t.alpha, &t.beta, ch, &t.response).is_accept());
        t
    }

    #[test]
    fn toy_extraction() {
        let (cve, pk, sk) = toy();
        let st = cve.prover_commit(&pk, &sk, &Seed::new(vec![9; 16])).unwrap();
        let t1 = round(&cve, &pk, &st, 2, 1);
        let t2 = round(&cve, &pk, &st, 5, 2);
        let CveExtraction::Secret(e) = cve.extract(&pk, &t1, &t2).unwrap() else { panic!() };
        assert_eq!(e, sk.e);
        assert_eq!(pk.aperp.mul_vec(&e).unwrap(), pk.y);

        let t3 = round(&cve, &pk, &st, 4, 1);
        let t4 = round(&cve, &pk, &st, 4, 2);
        let t1b = round(&cve, &pk, &st, 2, 2);
        assert_eq!(
            cve.extract_two_blinds(&pk, [&t1, &t1b, &t3, &t4]).unwrap(),
            CveExtraction::Secret(sk.e.clone())
        );
        assert!(cve.extract(&pk, &t2, &t1).is_err());
        assert!(cve.extract_two_blinds(&pk, [&t1, &t1b, &t1, &t1b]).is_err());
    }

    #[test]
    fn cheater_matches_guess_only() {
        let cve = Cve::new(Params::new(32, 16, 31)).unwrap();
        let (pk, _) = cve.keygen(&Seed::new(vec![5; 16])).unwrap();
        let cheat = cve.cheat_round(&pk, &Seed::new(vec![1; 16])).unwrap();
        for alpha in 0..31 {
            let beta = cheat.beta(alpha).unwrap();
            let v1 = cve.verifier_check(&pk, cheat.commitments(), alpha, &beta, 1, &cheat.respond(1).unwrap());
            let v2 = cve.verifier_check(&pk, cheat.commitments(), alpha, &beta, 2, &cheat.respond(2).unwrap());
            assert!(v1.is_accept());
            assert_eq!(v2.is_accept(), alpha == cheat.alpha_guess(), "alpha {alpha}");
        }
    }

    #[test]
    fn cheater_transcripts_leave_extraction_unresolved() {
        let cve = Cve::new(Params::new(32, 16, 31)).unwrap();
        let (pk, _) = cve.keygen(&Seed::new(vec![5; 16])).unwrap();
        let cheat = cve.cheat_round(&pk, &Seed::new(vec![1; 16])).unwrap();
        let alpha = cheat.alpha_guess();
        let beta = cheat.beta(alpha).unwrap();
        let mk = |ch| CveTranscript {
            commitments: cheat.commitments().clone(),
            alpha,
            beta: beta.clone(),
            challenge: ch,
            response: cheat.respond(ch).unwrap(),
        };
        assert!(matches!(
            cve.extract(&pk, &mk(1), &mk(2)).unwrap(),
            CveExtraction::Unresolved { .. }
        ));
    }

    struct ByteOracle;
    impl CveChallenger for ByteOracle {
        fn alpha(&self, c: &CveCommitments) -> u16 {
            (c.c1.as_bytes()[0] ^ c.c2.as_bytes()[1]) as u16 % 7
        }
        fn challenge(&self, c: &CveCommitments, alpha: u16, beta: &FqVector) -> u8 {
            ((c.c1.as_bytes()[2] as u16 + alpha + beta[0]) % 2) as u8 + 1
        }
    }

    #[test]
    fn simulated_rounds_verify() {
        let (cve, pk, _) = toy();
        let sim = cve
            .simulate(&pk, &ByteOracle, 50, &Seed::new(vec![2; 16]), SimOptions::default())
            .unwrap();
        for t in &sim.transcripts {
            assert!(cve
                .verifier_check(&pk, &t.commitments, t.alpha, &t.beta, t.challenge, &t.response)
                .is_accept());
        }
        assert_eq!(sim.oracle_calls.len(), 50);
    }

    #[test]
    fn syndrome_preimage_satisfies_syndrome_only() {
        let cve = Cve::new(Params::new(32, 16, 257)).unwrap();
        let (pk, _) = cve.keygen(&Seed::new(vec![5; 16])).unwrap();
        let e = solve_particular(&pk.aperp, &pk.y).unwrap();
        assert_eq!(pk.aperp.mul_vec(&e).unwrap(), pk.y);
    }
}
