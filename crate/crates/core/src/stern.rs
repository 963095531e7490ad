//! Three-pass identification with challenge space {1, 2, 3} and per-round
//! soundness error 2/3.
//!
//! Public key `(A, b, p)` with `b = A·s + e`, `p = wt(e)`. Per round the
//! prover commits to
//!
//! ```text
//! c1 = com(Π ; r1)
//! c2 = com(Π(A(u+s)) ; r2)
//! c3 = com(Π(A·u + b) ; r3)
//! ```
//!
//! and opens two of them depending on the challenge. Random values that do not
//! depend on the secret (`u`, `Π`) are transmitted as the seeds they were
//! expanded from.

use crate::commit::{
    Commitment, CommitmentCollision, CommitmentScheme, CommitmentSlot, HashCommitment, Opening,
};
use crate::error::{Error, Result};
use crate::field::{FqMatrix, FqVector};
use crate::isometry::Isometry;
use crate::keys::generate_instance;
use crate::oracle::{SimOptions, Simulation};
use crate::params::Params;
use crate::prg::{expand_vector, expand_weight_vector, Seed, XofStream, TAG_STREAM};
use crate::verdict::{RejectReason, Verdict};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SternPublicKey {
    pub a: FqMatrix,
    pub b: FqVector,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SternSecretKey {
    pub s: FqVector,
    pub e: FqVector,
}

/// Build a key pair from explicit `(A, s, e)`.
pub fn keypair_from_parts(
    a: FqMatrix,
    s: FqVector,
    e: FqVector,
) -> Result<(SternPublicKey, SternSecretKey)> {
    let b = a.mul_vec(&s)?.add(&e)?;
    let p = e.weight();
    if p == 0 || p == e.len() {
        return Err(Error::Precondition(format!("error weight {p} is degenerate")));
    }
    Ok((SternPublicKey { a, b, p }, SternSecretKey { s, e }))
}

/// Checks `b == A·s + e` and `p == wt(e)`.
pub fn keys_match(pk: &SternPublicKey, sk: &SternSecretKey) -> bool {
    pk.a
        .mul_vec(&sk.s)
        .and_then(|x| x.add(&sk.e))
        .is_ok_and(|b| b == pk.b && sk.e.weight() == pk.p)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SternCommitments {
    pub c1: Commitment,
    pub c2: Commitment,
    pub c3: Commitment,
}

/// Everything the honest prover remembers between commit and respond.
#[derive(Debug, Clone)]
pub struct SternProverState {
    pub seed_u: Seed,
    pub seed_gamma: Seed,
    pub seed_perm: Seed,
    pub r1: Seed,
    pub r2: Seed,
    pub r3: Seed,
    pub u: FqVector,
    pub pi: Isometry,
    pub commitments: SternCommitments,
    // Π(A(u+s)) and Π(e), kept for the ch = 2 answer.
    w: FqVector,
    z: FqVector,
    v: FqVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SternResponse {
    /// Opens c1 and c2: `v = u + s` and the isometry seeds.
    One {
        r1: Seed,
        r2: Seed,
        v: FqVector,
        seed_gamma: Seed,
        seed_perm: Seed,
    },
    /// Opens c2 and c3: `w = Π(A(u+s))` and `z = Π(e)`.
    Two {
        r2: Seed,
        r3: Seed,
        w: FqVector,
        z: FqVector,
    },
    /// Opens c1 and c3: isometry seeds and the seed of `u`.
    Three {
        r1: Seed,
        r3: Seed,
        seed_gamma: Seed,
        seed_perm: Seed,
        seed_u: Seed,
    },
}

impl SternResponse {
    pub fn challenge(&self) -> u8 {
        match self {
            SternResponse::One { .. } => 1,
            SternResponse::Two { .. } => 2,
            SternResponse::Three { .. } => 3,
        }
    }
}

/// One recorded round: commitments, challenge, answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SternTranscript {
    pub commitments: SternCommitments,
    pub challenge: u8,
    pub response: SternResponse,
}

/// Verifier strategy queried by the simulator. Must be a deterministic
/// function of its input so that rewinding is well defined.
pub trait SternChallenger {
    fn challenge(&self, c: &SternCommitments) -> u8;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SternExtraction {
    Secret { s: FqVector, e: FqVector },
    Collision(Vec<CommitmentCollision>),
}

/// The 3-pass scheme bound to a parameter set and commitment scheme.
#[derive(Debug, Clone)]
pub struct Stern<C = HashCommitment> {
    params: Params,
    com: C,
}

impl Stern<HashCommitment> {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Stern {
            com: HashCommitment::new(&params),
            params,
        })
    }
}

fn isometry_seeds_and_u(round_seed: &Seed, sb: usize) -> (Seed, Seed, Seed) {
    (
        round_seed.derive(b"gamma", sb),
        round_seed.derive(b"perm", sb),
        round_seed.derive(b"u", sb),
    )
}

impl<C: CommitmentScheme> Stern<C> {
    pub fn with_commitment(params: Params, com: C) -> Result<Self> {
        params.validate()?;
        Ok(Stern { params, com })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn commitment_scheme(&self) -> &C {
        &self.com
    }

    pub fn keygen(&self, master_seed: &Seed) -> Result<(SternPublicKey, SternSecretKey)> {
        let (inst, _) = generate_instance(&self.params, master_seed, false)?;
        let p = inst.e.weight();
        Ok((
            SternPublicKey {
                a: inst.a,
                b: inst.b,
                p,
            },
            SternSecretKey {
                s: inst.s,
                e: inst.e,
            },
        ))
    }

    fn isometry(&self, seed_gamma: &Seed, seed_perm: &Seed) -> Isometry {
        Isometry::from_seeds(seed_gamma, seed_perm, self.params.n, self.params.q)
    }

    fn random_digest(&self, seed: &Seed) -> Commitment {
        Commitment::from_bytes(
            XofStream::new(seed.as_bytes(), TAG_STREAM).bytes(self.com.digest_len()),
        )
    }

    /// Prover's first move. All randomness is derived from `round_seed`.
    pub fn prover_commit(
        &self,
        pk: &SternPublicKey,
        sk: &SternSecretKey,
        round_seed: &Seed,
    ) -> Result<SternProverState> {
        let sb = self.params.seed_bytes();
        let (seed_gamma, seed_perm, seed_u) = isometry_seeds_and_u(round_seed, sb);
        let r1 = round_seed.derive(b"r1", sb);
        let r2 = round_seed.derive(b"r2", sb);
        let r3 = round_seed.derive(b"r3", sb);
        let u = expand_vector(&seed_u, self.params.q, self.params.m);
        let pi = self.isometry(&seed_gamma, &seed_perm);

        let v = u.add(&sk.s)?;
        let w = pi.apply(&pk.a.mul_vec(&v)?)?;
        let t = pi.apply(&pk.a.mul_vec(&u)?.add(&pk.b)?)?;
        let z = pi.apply(&sk.e)?;

        let commitments = SternCommitments {
            c1: self.com.commit(&pi.to_bytes(), &r1),
            c2: self.com.commit(&w.to_bytes(), &r2),
            c3: self.com.commit(&t.to_bytes(), &r3),
        };
        Ok(SternProverState {
            seed_u,
            seed_gamma,
            seed_perm,
            r1,
            r2,
            r3,
            u,
            pi,
            commitments,
            w,
            z,
            v,
        })
    }

    pub fn prover_respond(&self, state: &SternProverState, ch: u8) -> Result<SternResponse> {
        Ok(match ch {
            1 => SternResponse::One {
                r1: state.r1.clone(),
                r2: state.r2.clone(),
                v: state.v.clone(),
                seed_gamma: state.seed_gamma.clone(),
                seed_perm: state.seed_perm.clone(),
            },
            2 => SternResponse::Two {
                r2: state.r2.clone(),
                r3: state.r3.clone(),
                w: state.w.clone(),
                z: state.z.clone(),
            },
            3 => SternResponse::Three {
                r1: state.r1.clone(),
                r3: state.r3.clone(),
                seed_gamma: state.seed_gamma.clone(),
                seed_perm: state.seed_perm.clone(),
                seed_u: state.seed_u.clone(),
            },
            other => return Err(Error::InvalidChallenge(other)),
        })
    }

    fn seeds_ok(&self, seeds: &[&Seed]) -> bool {
        seeds.iter().all(|s| s.len() == self.params.seed_bytes())
    }

    fn vec_ok(&self, v: &FqVector, len: usize) -> bool {
        v.len() == len && v.modulus() == self.params.q
    }

    /// Verifier decision for one round. Never fails: anything unparseable or
    /// inconsistent is a rejection.
    pub fn verifier_check(
        &self,
        pk: &SternPublicKey,
        c: &SternCommitments,
        ch: u8,
        resp: &SternResponse,
    ) -> Verdict {
        match self.check_inner(pk, c, ch, resp) {
            Ok(v) => v,
            Err(_) => Verdict::Reject(RejectReason::Malformed),
        }
    }

    fn check_inner(
        &self,
        pk: &SternPublicKey,
        c: &SternCommitments,
        ch: u8,
        resp: &SternResponse,
    ) -> Result<Verdict> {
        let (n, m) = (self.params.n, self.params.m);
        let malformed = Ok(Verdict::Reject(RejectReason::Malformed));
        let bad_commitment = Ok(Verdict::Reject(RejectReason::Commitment));
        if resp.challenge() != ch {
            return malformed;
        }
        match resp {
            SternResponse::One {
                r1,
                r2,
                v,
                seed_gamma,
                seed_perm,
            } => {
                if !self.seeds_ok(&[r1, r2, seed_gamma, seed_perm]) || !self.vec_ok(v, m) {
                    return malformed;
                }
                let pi = self.isometry(seed_gamma, seed_perm);
                let w = pi.apply(&pk.a.mul_vec(v)?)?;
                if !self.com.verify_opening(&c.c1, &pi.to_bytes(), r1)
                    || !self.com.verify_opening(&c.c2, &w.to_bytes(), r2)
                {
                    return bad_commitment;
                }
            }
            SternResponse::Two { r2, r3, w, z } => {
                if !self.seeds_ok(&[r2, r3]) || !self.vec_ok(w, n) || !self.vec_ok(z, n) {
                    return malformed;
                }
                if !self.com.verify_opening(&c.c2, &w.to_bytes(), r2)
                    || !self.com.verify_opening(&c.c3, &w.add(z)?.to_bytes(), r3)
                {
                    return bad_commitment;
                }
                if z.weight() != pk.p {
                    return Ok(Verdict::Reject(RejectReason::Weight));
                }
            }
            SternResponse::Three {
                r1,
                r3,
                seed_gamma,
                seed_perm,
                seed_u,
            } => {
                if !self.seeds_ok(&[r1, r3, seed_gamma, seed_perm, seed_u]) {
                    return malformed;
                }
                let pi = self.isometry(seed_gamma, seed_perm);
                let u = expand_vector(seed_u, self.params.q, m);
                let t = pi.apply(&pk.a.mul_vec(&u)?.add(&pk.b)?)?;
                if !self.com.verify_opening(&c.c1, &pi.to_bytes(), r1)
                    || !self.com.verify_opening(&c.c3, &t.to_bytes(), r3)
                {
                    return bad_commitment;
                }
            }
        }
        Ok(Verdict::Accept)
    }

    /// Recover `(s, e)` from accepting answers to all three challenges on the
    /// same commitments, or exhibit the commitment(s) opened two ways.
    pub fn extract(
        &self,
        pk: &SternPublicKey,
        t1: &SternTranscript,
        t2: &SternTranscript,
        t3: &SternTranscript,
    ) -> Result<SternExtraction> {
        for (t, ch) in [(t1, 1), (t2, 2), (t3, 3)] {
            if t.challenge != ch {
                return Err(Error::Precondition(format!(
                    "transcript for challenge {ch} carries challenge {}",
                    t.challenge
                )));
            }
            if t.commitments != t1.commitments {
                return Err(Error::Precondition("transcripts do not share commitments".into()));
            }
            let verdict = self.verifier_check(pk, &t.commitments, ch, &t.response);
            if !verdict.is_accept() {
                return Err(Error::Precondition(format!(
                    "transcript for challenge {ch} was not accepted: {verdict}"
                )));
            }
        }
        let (
            SternResponse::One {
                r1: r1_a,
                r2: r2_a,
                v: v_a,
                seed_gamma: g_a,
                seed_perm: p_a,
            },
            SternResponse::Two {
                r2: r2_b,
                r3: r3_b,
                w: w_b,
                z: z_b,
            },
            SternResponse::Three {
                r1: r1_c,
                r3: r3_c,
                seed_gamma: g_c,
                seed_perm: p_c,
                seed_u,
            },
        ) = (&t1.response, &t2.response, &t3.response)
        else {
            unreachable!("challenge/variant agreement checked above");
        };
        let pi_a = self.isometry(g_a, p_a);
        let pi_c = self.isometry(g_c, p_c);
        let u_c = expand_vector(seed_u, self.params.q, self.params.m);

        let s = v_a.sub(&u_c)?;
        let e = pi_c.apply_inverse(z_b)?;
        if pk.a.mul_vec(&s)?.add(&e)? == pk.b && e.weight() == pk.p {
            return Ok(SternExtraction::Secret { s, e });
        }

        let opening = |message: Vec<u8>, randomness: &Seed| Opening {
            message,
            randomness: randomness.clone(),
        };
        let pairs = [
            (
                CommitmentSlot::C1,
                opening(pi_a.to_bytes(), r1_a),
                opening(pi_c.to_bytes(), r1_c),
            ),
            (
                CommitmentSlot::C2,
                opening(pi_a.apply(&pk.a.mul_vec(v_a)?)?.to_bytes(), r2_a),
                opening(w_b.to_bytes(), r2_b),
            ),
            (
                CommitmentSlot::C3,
                opening(w_b.add(z_b)?.to_bytes(), r3_b),
                opening(pi_c.apply(&pk.a.mul_vec(&u_c)?.add(&pk.b)?)?.to_bytes(), r3_c),
            ),
        ];
        let collisions: Vec<_> = pairs
            .into_iter()
            .filter(|(_, a, b)| a != b)
            .map(|(slot, first, second)| CommitmentCollision {
                slot,
                first,
                second,
            })
            .collect();
        if collisions.is_empty() {
            // Identical openings of all three commitments force A·s + e = b.
            return Err(Error::Precondition("openings consistent but witness invalid".into()));
        }
        Ok(SternExtraction::Collision(collisions))
    }

    /// Zero-knowledge simulator: produces accepting transcripts without the
    /// secret by guessing the challenge and rewinding the verifier on a miss.
    pub fn simulate(
        &self,
        pk: &SternPublicKey,
        oracle: &impl SternChallenger,
        rounds: usize,
        rng_seed: &Seed,
        options: SimOptions,
    ) -> Result<Simulation<SternTranscript>> {
        let sb = self.params.seed_bytes();
        let (n, m, q) = (self.params.n, self.params.m, self.params.q);
        let fixed_perm = rng_seed.derive(b"fixed-perm", sb);
        let mut transcripts = Vec::with_capacity(rounds);
        let mut oracle_calls = Vec::with_capacity(rounds);
        for round in 0..rounds {
            let mut found = None;
            for attempt in 0..options.rewind_budget {
                let at = rng_seed.derive_indexed(b"sim", ((round as u64) << 32) | attempt as u64, sb);
                let guess = XofStream::new(at.as_bytes(), TAG_STREAM).next_below(3) as u8 + 1;
                let seed_gamma = at.derive(b"gamma", sb);
                let seed_perm = if options.fixed_permutation {
                    fixed_perm.clone()
                } else {
                    at.derive(b"perm", sb)
                };
                let (r1, r2, r3) = (at.derive(b"r1", sb), at.derive(b"r2", sb), at.derive(b"r3", sb));
                let filler = self.random_digest(&at.derive(b"filler", sb));
                let pi = self.isometry(&seed_gamma, &seed_perm);
                let (commitments, response) = match guess {
                    1 => {
                        let v = expand_vector(&at.derive(b"v", sb), q, m);
                        let w = pi.apply(&pk.a.mul_vec(&v)?)?;
                        (
                            SternCommitments {
                                c1: self.com.commit(&pi.to_bytes(), &r1),
                                c2: self.com.commit(&w.to_bytes(), &r2),
                                c3: filler,
                            },
                            SternResponse::One {
                                r1,
                                r2,
                                v,
                                seed_gamma,
                                seed_perm,
                            },
                        )
                    }
                    2 => {
                        let u = expand_vector(&at.derive(b"u", sb), q, m);
                        let s_fake = expand_vector(&at.derive(b"s", sb), q, m);
                        let e_fake = expand_weight_vector(&at.derive(b"e", sb), q, n, pk.p);
                        let w = pi.apply(&pk.a.mul_vec(&u.add(&s_fake)?)?)?;
                        let z = pi.apply(&e_fake)?;
                        (
                            SternCommitments {
                                c1: filler,
                                c2: self.com.commit(&w.to_bytes(), &r2),
                                c3: self.com.commit(&w.add(&z)?.to_bytes(), &r3),
                            },
                            SternResponse::Two { r2, r3, w, z },
                        )
                    }
                    _ => {
                        let seed_u = at.derive(b"u", sb);
                        let u = expand_vector(&seed_u, q, m);
                        let t = pi.apply(&pk.a.mul_vec(&u)?.add(&pk.b)?)?;
                        (
                            SternCommitments {
                                c1: self.com.commit(&pi.to_bytes(), &r1),
                                c2: filler,
                                c3: self.com.commit(&t.to_bytes(), &r3),
                            },
                            SternResponse::Three {
                                r1,
                                r3,
                                seed_gamma,
                                seed_perm,
                                seed_u,
                            },
                        )
                    }
                };
                let ch = oracle.challenge(&commitments);
                if ch == guess {
                    found = Some((
                        SternTranscript {
                            commitments,
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

    /// A prover without the secret that can answer exactly the two challenges
    /// in `strategy`.
    pub fn cheat_round(
        &self,
        pk: &SternPublicKey,
        strategy: [u8; 2],
        rng_seed: &Seed,
    ) -> Result<SternCheater> {
        let mut strategy = strategy;
        strategy.sort_unstable();
        if !matches!(strategy, [1, 2] | [1, 3] | [2, 3]) {
            return Err(Error::Precondition(format!("invalid strategy {strategy:?}")));
        }
        let sb = self.params.seed_bytes();
        let (n, m, q) = (self.params.n, self.params.m, self.params.q);
        let (seed_gamma, seed_perm, seed_u) = isometry_seeds_and_u(rng_seed, sb);
        let (r1, r2, r3) = (
            rng_seed.derive(b"r1", sb),
            rng_seed.derive(b"r2", sb),
            rng_seed.derive(b"r3", sb),
        );
        let pi = self.isometry(&seed_gamma, &seed_perm);
        let u = expand_vector(&seed_u, q, m);
        let s_fake = expand_vector(&rng_seed.derive(b"s", sb), q, m);
        let e_fake = expand_weight_vector(&rng_seed.derive(b"e", sb), q, n, pk.p);
        let v = u.add(&s_fake)?;
        let honest_w = pi.apply(&pk.a.mul_vec(&v)?)?;
        let t = pi.apply(&pk.a.mul_vec(&u)?.add(&pk.b)?)?;
        let (w, z, c3_value) = match strategy {
            // z is forced to Π(b − A·s′), which has the wrong weight
            [1, 3] => (honest_w.clone(), t.sub(&honest_w)?, t.clone()),
            [1, 2] => {
                let z = pi.apply(&e_fake)?;
                let c3_value = honest_w.add(&z)?;
                (honest_w, z, c3_value)
            }
            _ => {
                let z = pi.apply(&e_fake)?;
                (t.sub(&z)?, z, t.clone())
            }
        };
        let commitments = SternCommitments {
            c1: self.com.commit(&pi.to_bytes(), &r1),
            c2: self.com.commit(&w.to_bytes(), &r2),
            c3: self.com.commit(&c3_value.to_bytes(), &r3),
        };
        Ok(SternCheater {
            strategy,
            commitments,
            state: SternProverState {
                seed_u,
                seed_gamma,
                seed_perm,
                r1,
                r2,
                r3,
                u,
                pi,
                commitments: SternCommitments {
                    c1: Commitment::from_bytes(vec![]),
                    c2: Commitment::from_bytes(vec![]),
                    c3: Commitment::from_bytes(vec![]),
                },
                w,
                z,
                v,
            },
        })
    }
}

/// Commitments prepared by a cheating prover and its fixed answering rule.
#[derive(Debug, Clone)]
pub struct SternCheater {
    strategy: [u8; 2],
    commitments: SternCommitments,
    state: SternProverState,
}

impl SternCheater {
    pub fn strategy(&self) -> [u8; 2] {
        self.strategy
    }

    pub fn commitments(&self) -> &SternCommitments {
        &self.commitments
    }

    /// Answers every challenge in the honest format; only the two covered
    /// challenges pass verification.
    pub fn respond(&self, ch: u8) -> Result<SternResponse> {
        let s = &self.state;
        Ok(match ch {
            1 => SternResponse::One {
                r1: s.r1.clone(),
                r2: s.r2.clone(),
                v: s.v.clone(),
                seed_gamma: s.seed_gamma.clone(),
                seed_perm: s.seed_perm.clone(),
            },
            2 => SternResponse::Two {
                r2: s.r2.clone(),
                r3: s.r3.clone(),
                w: s.w.clone(),
                z: s.z.clone(),
            },
            3 => SternResponse::Three {
                r1: s.r1.clone(),
                r3: s.r3.clone(),
                seed_gamma: s.seed_gamma.clone(),
                seed_perm: s.seed_perm.clone(),
                seed_u: s.seed_u.clone(),
            },
            other => return Err(Error::InvalidChallenge(other)),
        })
    }
}
