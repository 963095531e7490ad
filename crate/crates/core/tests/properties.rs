//! Randomized invariant suites, 10⁴ cases each.

use std::collections::BTreeMap;

use proptest::prelude::*;

use lweid::commit::{commit, verify_opening};
use lweid::cost::{cost_model, CostMode};
use lweid::cve::{self, Cve};
use lweid::field::{left_nullspace, mat_vec_mul, solve_particular};
use lweid::harness::two_sample_chi2;
use lweid::isometry::{iso_apply, iso_apply_inverse, iso_from_seeds};
use lweid::prg::{expand_uniform, Domain};
use lweid::stern::{self, Stern, SternResponse};
use lweid::wire::{
    decode_message, encode_message, transcripts_from_bytes, transcripts_to_bytes, MessageType,
    RoundTranscript, SchemeId, WireMessage,
};
use lweid::{FqMatrix, FqVector, Params, RejectReason, Seed, Verdict};

const CASES: u32 = 10_000;
const PRIMES: &[u16] = &[2, 3, 5, 7, 13, 31, 257, 7681, 32749];

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        ..ProptestConfig::default()
    }
}

fn seed() -> impl Strategy<Value = Seed> {
    prop::collection::vec(any::<u8>(), 16).prop_map(Seed::new)
}

fn vector(q: u16, len: usize) -> impl Strategy<Value = FqVector> {
    prop::collection::vec(0..q, len).prop_map(move |v| FqVector::new(q, v).unwrap())
}

fn matrix(q: u16, rows: usize, cols: usize) -> impl Strategy<Value = FqMatrix> {
    prop::collection::vec(0..q, rows * cols)
        .prop_map(move |v| FqMatrix::new(q, rows, cols, v).unwrap())
}

/// (q, n, m) with n > m ≥ 1.
fn dims() -> impl Strategy<Value = (u16, usize, usize)> {
    (prop::sample::select(PRIMES), 2usize..20)
        .prop_flat_map(|(q, n)| (Just(q), Just(n), 1..n))
}

/// Small valid LWE instance `(A, s, e)` with 0 < wt(e) < n.
fn instance() -> impl Strategy<Value = (Params, FqMatrix, FqVector, FqVector)> {
    (prop::sample::select(&[5u16, 7, 13, 31, 257][..]), 4usize..14)
        .prop_flat_map(|(q, n)| (Just(q), Just(n), 1..n))
        .prop_flat_map(|(q, n, m)| {
            (
                Just(Params::new(n, m, q)),
                matrix(q, n, m),
                vector(q, m),
                vector(q, n),
                0..n,
            )
        })
        .prop_map(|(p, a, s, mut e, k)| {
            // force a nondegenerate weight
            let q = p.q;
            let mut raw = e.clone().into_inner();
            raw[k] = 0;
            let len = raw.len();
            if raw.iter().all(|&x| x == 0) {
                raw[(k + 1) % len] = 1;
            }
            e = FqVector::new(q, raw).unwrap();
            (p, a, s, e)
        })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn mat_vec_mul_is_additive(
        (a, u, v) in dims().prop_flat_map(|(q, n, m)| (matrix(q, n, m), vector(q, m), vector(q, m)))
    ) {
        let lhs = mat_vec_mul(&a, &u.add(&v).unwrap()).unwrap();
        let rhs = mat_vec_mul(&a, &u).unwrap().add(&mat_vec_mul(&a, &v).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn left_nullspace_annihilates(a in dims().prop_flat_map(|(q, n, m)| matrix(q, n, m))) {
        let (n, m) = (a.rows(), a.cols());
        match left_nullspace(&a) {
            Ok(b) => {
                prop_assert!(b.mul(&a).unwrap().is_zero());
                prop_assert_eq!(b.rows(), n - m);
                prop_assert_eq!(b.rank(), n - m);
            }
            Err(_) => prop_assert!(a.rank() < m),
        }
    }

    #[test]
    fn solve_particular_solves(
        (m, t) in dims().prop_flat_map(|(q, n, m)| (matrix(q, m, n), vector(q, m)))
    ) {
        if let Ok(x) = solve_particular(&m, &t) {
            prop_assert_eq!(m.mul_vec(&x).unwrap(), t);
        }
    }

    #[test]
    fn expand_uniform_is_pure(s in seed(), q in prop::sample::select(PRIMES), len in 1usize..40, which in 0u8..4) {
        let d = match which {
            0 => Domain::Vector(len),
            1 => Domain::NonzeroVector(len),
            2 => Domain::Permutation(len),
            _ => Domain::Scalar,
        };
        prop_assert_eq!(expand_uniform(&s, q, d), expand_uniform(&s.clone(), q, d));
    }

    #[test]
    fn isometry_laws(
        (q, sg, sp, u, v, alpha) in (prop::sample::select(PRIMES), 1usize..40)
            .prop_flat_map(|(q, n)| (Just(q), seed(), seed(), vector(q, n), vector(q, n), 0..q))
    ) {
        let pi = iso_from_seeds(&sg, &sp, u.len(), q);
        let pu = iso_apply(&pi, &u).unwrap();
        let pv = iso_apply(&pi, &v).unwrap();
        prop_assert_eq!(pu.weight(), u.weight());
        prop_assert_eq!(iso_apply(&pi, &u.scale(alpha)).unwrap(), pu.scale(alpha));
        prop_assert_eq!(iso_apply(&pi, &u.add(&v).unwrap()).unwrap(), pu.add(&pv).unwrap());
        prop_assert_eq!(iso_apply_inverse(&pi, &pu).unwrap(), u);
    }

    #[test]
    fn commitment_open_and_tamper(
        msg in prop::collection::vec(any::<u8>(), 0..200),
        r in seed(),
        bit in any::<prop::sample::Index>(),
        flip_randomness in any::<bool>(),
    ) {
        let p = Params::new(8, 4, 7);
        let c = commit(&msg, &r, &p);
        prop_assert_eq!(c.len(), 32);
        prop_assert!(verify_opening(&c, &msg, &r, &p));
        if flip_randomness || msg.is_empty() {
            let mut rb = r.as_bytes().to_vec();
            let i = bit.index(rb.len() * 8);
            rb[i / 8] ^= 1 << (i % 8);
            prop_assert!(!verify_opening(&c, &msg, &Seed::new(rb), &p));
        } else {
            let mut m2 = msg.clone();
            let i = bit.index(m2.len() * 8);
            m2[i / 8] ^= 1 << (i % 8);
            prop_assert!(!verify_opening(&c, &m2, &r, &p));
        }
    }

    #[test]
    fn wire_round_trip(
        kind in prop::sample::select(&MessageType::ALL[..]),
        payload in prop::collection::vec(any::<u8>(), 0..300),
        cut in any::<prop::sample::Index>(),
    ) {
        let m = WireMessage::new(kind, payload);
        let b = encode_message(&m);
        prop_assert_eq!(b.len(), 5 + m.payload.len());
        prop_assert_eq!(decode_message(&b).unwrap(), m);
        let short = cut.index(b.len());
        prop_assert!(decode_message(&b[..short]).is_err());
        let mut long = b.clone();
        long.push(0);
        prop_assert!(decode_message(&long).is_err());
    }

    #[test]
    fn stern_honest_rounds((p, a, s, e) in instance(), rs in seed()) {
        let (pk, sk) = stern::keypair_from_parts(a, s, e).unwrap();
        let scheme = Stern::new(p).unwrap();
        let st = scheme.prover_commit(&pk, &sk, &rs).unwrap();
        // Π(A·u + b) == Π(A·(u+s)) + Π(e)
        let lhs = st.pi.apply(&pk.a.mul_vec(&st.u).unwrap().add(&pk.b).unwrap()).unwrap();
        let rhs = st.pi.apply(&pk.a.mul_vec(&st.u.add(&sk.s).unwrap()).unwrap()).unwrap()
            .add(&st.pi.apply(&sk.e).unwrap()).unwrap();
        prop_assert_eq!(lhs.to_bytes(), rhs.to_bytes());
        let mut ts = Vec::new();
        for ch in 1..=3 {
            let resp = scheme.prover_respond(&st, ch).unwrap();
            prop_assert_eq!(scheme.verifier_check(&pk, &st.commitments, ch, &resp), Verdict::Accept);
            if let SternResponse::Two { z, .. } = &resp {
                prop_assert_eq!(z.weight(), pk.p);
            }
            ts.push(lweid::stern::SternTranscript { commitments: st.commitments.clone(), challenge: ch, response: resp });
        }
        match scheme.extract(&pk, &ts[0], &ts[1], &ts[2]).unwrap() {
            lweid::stern::SternExtraction::Secret { s, e } => {
                prop_assert_eq!(pk.a.mul_vec(&s).unwrap().add(&e).unwrap(), pk.b.clone());
                prop_assert_eq!(e.weight(), pk.p);
            }
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn cve_honest_rounds((p, a, s, e) in instance(), rs in seed(), alpha_pick in any::<u16>()) {
        let Ok((pk, sk)) = cve::keypair_from_parts(a, s, e) else {
            // rank-deficient A; keygen would resample
            return Ok(());
        };
        let q = p.q;
        let scheme = Cve::new(p).unwrap();
        let alpha = alpha_pick % q;
        let mut st = scheme.prover_commit(&pk, &sk, &rs).unwrap();
        let beta = scheme.prover_beta(&mut st, alpha).unwrap();
        // A⊥·(u + α·e) − α·y == A⊥·u
        let lhs = pk.aperp.mul_vec(&st.u.add(&sk.e.scale(alpha)).unwrap()).unwrap()
            .sub(&pk.y.scale(alpha)).unwrap();
        prop_assert_eq!(lhs, pk.aperp.mul_vec(&st.u).unwrap());
        let mut ts = Vec::new();
        for ch in 1..=2 {
            let resp = scheme.prover_respond(&st, ch).unwrap();
            prop_assert_eq!(
                scheme.verifier_check(&pk, &st.commitments, alpha, &beta, ch, &resp),
                Verdict::Accept
            );
            ts.push(lweid::cve::CveTranscript {
                commitments: st.commitments.clone(), alpha, beta: beta.clone(), challenge: ch, response: resp,
            });
        }
        match scheme.extract(&pk, &ts[0], &ts[1]).unwrap() {
            lweid::cve::CveExtraction::Secret(e) => {
                prop_assert_eq!(pk.aperp.mul_vec(&e).unwrap(), pk.y.clone());
                prop_assert_eq!(e.weight(), pk.p);
            }
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn chi2_is_symmetric(
        a in prop::collection::btree_map(0u32..40, 0u64..200, 1..30),
        b in prop::collection::btree_map(0u32..40, 0u64..200, 1..30),
    ) {
        let x = two_sample_chi2(&a, &b);
        let y = two_sample_chi2(&b, &a);
        prop_assert!((x.0 - y.0).abs() <= 1e-9 * x.0.max(1.0));
        prop_assert_eq!(x.1, y.1);
        prop_assert!((x.2 - y.2).abs() < 1e-9);
    }
}

fn ceil_log2(x: u64) -> u64 {
    lweid::params::ceil_log2(x) as u64
}

/// Information bits of one message under the counted model, and the padding
/// its byte-aligned encoding adds.
fn counted_and_padding(p: &Params, m: &WireMessage) -> (u64, u64) {
    let e = p.elem_bits() as u64;
    let pad_elem = 16 - e;
    let seed = p.seed_len as u64;
    let com = p.com_len as u64;
    let (n, mm) = (p.n as u64, p.m as u64);
    match m.kind {
        MessageType::S1Commit => (3 * com, 0),
        MessageType::S2Commit => (2 * com, 0),
        MessageType::S1Challenge => (ceil_log2(3), 8 - ceil_log2(3)),
        MessageType::S2Challenge => (ceil_log2(2), 8 - ceil_log2(2)),
        MessageType::S2Alpha => (e, pad_elem),
        MessageType::S2Beta => (n * e, n * pad_elem),
        MessageType::S1Response => match m.payload[0] {
            1 => (4 * seed + mm * e, 8 + mm * pad_elem),
            2 => (2 * seed + 2 * n * e, 8 + 2 * n * pad_elem),
            _ => (5 * seed, 8),
        },
        MessageType::S2Response => match m.payload[0] {
            1 => (3 * seed, 8),
            _ => (seed + n * e, 8 + n * pad_elem),
        },
        MessageType::Key | MessageType::Result => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    /// Every honest message's encoded size is its counted bits plus exactly
    /// its byte-alignment padding, and averaging counted bits over the
    /// challenge distribution reproduces the counted cost model.
    #[test]
    fn counted_bits_match_model((p, a, s, e) in instance(), rs in seed(), alpha_pick in any::<u16>()) {
        let (spk, ssk) = stern::keypair_from_parts(a.clone(), s.clone(), e.clone()).unwrap();
        let scheme = Stern::new(p.clone()).unwrap();
        let st = scheme.prover_commit(&spk, &ssk, &rs).unwrap();
        let mut total = num_rational::BigRational::from_integer(0.into());
        for ch in 1..=3u8 {
            let t = lweid::stern::SternTranscript {
                commitments: st.commitments.clone(), challenge: ch,
                response: scheme.prover_respond(&st, ch).unwrap(),
            };
            let round = RoundTranscript::from_stern(&t, Verdict::Accept);
            for m in &round.messages {
                let (bits, pad) = counted_and_padding(&p, m);
                prop_assert_eq!(8 * m.payload.len() as u64, bits + pad);
                total += num_rational::BigRational::new(bits.into(), 3.into());
            }
        }
        prop_assert_eq!(total, cost_model(&p, SchemeId::Stern, CostMode::Counted).total_bits_avg);

        if let Ok((cpk, csk)) = cve::keypair_from_parts(a, s, e) {
            let scheme = Cve::new(p.clone()).unwrap();
            let alpha = alpha_pick % p.q;
            let mut st = scheme.prover_commit(&cpk, &csk, &rs).unwrap();
            let beta = scheme.prover_beta(&mut st, alpha).unwrap();
            let mut total = num_rational::BigRational::from_integer(0.into());
            for ch in 1..=2u8 {
                let t = lweid::cve::CveTranscript {
                    commitments: st.commitments.clone(), alpha, beta: beta.clone(), challenge: ch,
                    response: scheme.prover_respond(&st, ch).unwrap(),
                };
                let round = RoundTranscript::from_cve(&t, Verdict::Accept);
                for m in &round.messages {
                    let (bits, pad) = counted_and_padding(&p, m);
                    prop_assert_eq!(8 * m.payload.len() as u64, bits + pad);
                    total += num_rational::BigRational::new(bits.into(), 2.into());
                }
            }
            prop_assert_eq!(total, cost_model(&p, SchemeId::Cve, CostMode::Counted).total_bits_avg);
        }
    }

    #[test]
    fn transcript_file_round_trip(
        rounds in prop::collection::vec(
            (prop::collection::vec(any::<u8>(), 0..64), any::<u8>(), 0usize..4, 0u8..5), 0..12),
    ) {
        let p = Params::new(16, 8, 13);
        let built: Vec<RoundTranscript> = rounds
            .into_iter()
            .map(|(payload, extra, len, code)| {
                let verdict = Verdict::from_code(code).unwrap();
                let len = if verdict.is_accept() { 3 } else { len.min(3) };
                let msgs = SchemeId::Stern.passes()[..len]
                    .iter()
                    .map(|k| WireMessage::new(*k, [payload.as_slice(), &[extra]].concat()))
                    .collect();
                RoundTranscript::new(SchemeId::Stern, msgs, verdict).unwrap()
            })
            .collect();
        let bytes = transcripts_to_bytes(SchemeId::Stern, &p, &built).unwrap();
        let (scheme, p2, back) = transcripts_from_bytes(&bytes).unwrap();
        prop_assert_eq!(scheme, SchemeId::Stern);
        prop_assert_eq!(p2, p.clone());
        prop_assert_eq!(&back, &built);
        prop_assert_eq!(transcripts_to_bytes(scheme, &p2, &back).unwrap(), bytes);
    }
}

#[test]
fn scalar_expansion_is_uniform() {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let master = Seed::new(b"uniformity".to_vec());
    for &q in &[2u16, 3, 7, 13, 31, 257] {
        let mut counts = BTreeMap::new();
        let draws = 100_000u64;
        for i in 0..draws {
            let s = master.derive_indexed(&q.to_be_bytes(), i, 16);
            *counts.entry(lweid::prg::expand_scalar(&s, q)).or_insert(0u64) += 1;
        }
        let expected = draws as f64 / q as f64;
        let chi2: f64 = (0..q)
            .map(|k| {
                let o = *counts.get(&k).unwrap_or(&0) as f64;
                (o - expected).powi(2) / expected
            })
            .sum();
        let p = ChiSquared::new((q - 1) as f64).unwrap().sf(chi2);
        assert!(p > 0.001, "q={q}: chi2={chi2} p={p}");
    }
}

#[test]
fn digests_have_fixed_length() {
    let p = Params::new(8, 4, 7).with_com_len(128);
    let r = Seed::new(vec![0; 16]);
    for len in [0usize, 1, 31, 32, 33, 1000] {
        assert_eq!(commit(&vec![7; len], &r, &p).len(), 16);
    }
}

#[test]
fn reject_reasons_survive_the_wire() {
    for r in [RejectReason::Malformed, RejectReason::Commitment, RejectReason::Weight, RejectReason::Timeout] {
        let v = Verdict::Reject(r);
        assert_eq!(Verdict::from_code(v.code()), Some(v));
    }
}

#[test]
fn cve_accepts_every_blind_for_small_q() {
    for q in [3u16, 5, 7, 13, 31] {
        let p = Params::new(12, 6, q).with_rounds(1);
        let (ok, total) =
            lweid::harness::cve_alpha_sweep(&p, 20, &Seed::new(vec![q as u8; 16])).unwrap();
        assert_eq!(total, 20 * 2 * q as usize);
        assert_eq!(ok, total, "q={q}");
    }
}

/// The 99% Wilson interval must contain the theoretical rate in at least
/// 95% of independent experiments. Tiny n and q are avoided on purpose: there a
/// uniform vector often has the error's weight by accident and the cheater
/// beats the bound.
#[test]
fn soundness_intervals_cover_theory() {
    use lweid::harness::estimate_soundness;
    let master = Seed::new(b"coverage".to_vec());
    for (scheme, q) in [(SchemeId::Stern, 257u16), (SchemeId::Cve, 31)] {
        let p = Params::new(128, 64, q).with_rounds(1);
        let experiments = 100;
        let covered = (0..experiments)
            .filter(|&i| {
                let s = master.derive_indexed(scheme.name().as_bytes(), i, 16);
                estimate_soundness(scheme, &p, 1, 1000, &s).unwrap().covers_theory()
            })
            .count();
        assert!(covered * 100 >= 95 * experiments as usize, "{scheme:?}: {covered}/{experiments}");
    }
}
