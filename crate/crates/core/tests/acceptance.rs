//! The acceptance criteria, run in order with one PASS/FAIL line each.
//!
//! Lines go straight to stderr so they show up without `--nocapture`.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use num_rational::BigRational;

use lweid::commit::{commit, verify_opening};
use lweid::cost::{cost_model, format_decimal, rounds_for_target, CostMode};
use lweid::cve::{Cve, CveExtraction, CveTranscript};
use lweid::field::left_nullspace;
use lweid::harness::{
    completeness_suite, estimate_soundness, keygen, real_transcripts, simulated_transcripts,
    zk_stat_test,
};
use lweid::isometry::Isometry;
use lweid::oracle::SimOptions;
use lweid::prg::XofStream;
use lweid::stern::{Stern, SternExtraction, SternTranscript};
use lweid::wire::{decode_message, encode_message, MessageType, SchemeId, WireMessage};
use lweid::{FqMatrix, FqVector, Params, Seed};

type Outcome = Result<String, String>;

fn report(id: u32, name: &str, outcome: &Outcome) {
    let (tag, detail) = match outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {id} [{tag}] {name}: {detail}");
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn standard(rounds: u32) -> Params {
    Params::new(128, 64, 257).with_rounds(rounds)
}

fn seed(label: &str) -> Seed {
    Seed::new(label.as_bytes().to_vec())
}

fn completeness() -> Outcome {
    let start = Instant::now();
    let s = completeness_suite(SchemeId::Stern, &standard(28), 1000, &seed("c1-stern")).map_err(|e| e.to_string())?;
    let c = completeness_suite(SchemeId::Cve, &standard(17), 1000, &seed("c1-cve")).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    ensure(
        s.all_accepted() && c.all_accepted() && t < Duration::from_secs(60),
        format!("stern {}/{} cve {}/{} in {:.1?}", s.accepted, s.trials, c.accepted, c.trials, t),
    )
}

fn soundness(scheme: SchemeId, q: u16, expected: f64, label: &str) -> Outcome {
    let start = Instant::now();
    let params = Params::new(128, 64, q).with_rounds(1);
    let est = estimate_soundness(scheme, &params, 1, 10_000, &seed(label)).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    ensure(
        (est.rate - expected).abs() <= 0.02 && t < Duration::from_secs(30),
        format!(
            "rate {:.4} vs {:.4} (99% CI {:.4}..{:.4}) in {:.1?}",
            est.rate, expected, est.ci.0, est.ci.1, t
        ),
    )
}

fn extractors() -> Outcome {
    let params = standard(1);
    let stern = Stern::new(params.clone()).map_err(|e| e.to_string())?;
    let cve = Cve::new(params.clone()).map_err(|e| e.to_string())?;
    let (mut ok, mut collisions, mut other) = (0, 0, 0);
    for i in 0..100u64 {
        let master = seed("c4").derive_indexed(b"key", i, 16);
        let rs = master.derive(b"round", 16);

        let (pk, sk) = stern.keygen(&master).map_err(|e| e.to_string())?;
        let st = stern.prover_commit(&pk, &sk, &rs).map_err(|e| e.to_string())?;
        let t: Vec<SternTranscript> = (1..=3)
            .map(|ch| SternTranscript {
                commitments: st.commitments.clone(),
                challenge: ch,
                response: stern.prover_respond(&st, ch).unwrap(),
            })
            .collect();
        match stern.extract(&pk, &t[0], &t[1], &t[2]).map_err(|e| e.to_string())? {
            SternExtraction::Secret { s, e } if s == sk.s && e == sk.e => ok += 1,
            SternExtraction::Collision(_) => collisions += 1,
            _ => other += 1,
        }

        let (pk, sk) = cve.keygen(&master).map_err(|e| e.to_string())?;
        let alpha = (i % 257) as u16;
        let mut st = cve.prover_commit(&pk, &sk, &rs).map_err(|e| e.to_string())?;
        let beta = cve.prover_beta(&mut st, alpha).map_err(|e| e.to_string())?;
        let t: Vec<CveTranscript> = (1..=2)
            .map(|ch| CveTranscript {
                commitments: st.commitments.clone(),
                alpha,
                beta: beta.clone(),
                challenge: ch,
                response: cve.prover_respond(&st, ch).unwrap(),
            })
            .collect();
        match cve.extract(&pk, &t[0], &t[1]).map_err(|e| e.to_string())? {
            CveExtraction::Secret(e) if e == sk.e => ok += 1,
            CveExtraction::Collision(_) => collisions += 1,
            _ => other += 1,
        }
    }
    ensure(
        ok == 200 && collisions == 0,
        format!("{ok}/200 exact recoveries, {collisions} collisions, {other} other"),
    )
}

fn round_calculus() -> Outcome {
    let target = BigRational::new(1.into(), 65536.into());
    let exact = (
        rounds_for_target(SchemeId::Stern, 257, &target).map_err(|e| e.to_string())?,
        rounds_for_target(SchemeId::Cve, 257, &target).map_err(|e| e.to_string())?,
    );
    let mut cli = Vec::new();
    for scheme in ["stern", "cve"] {
        let o = common::run(&["bench", "--scheme", scheme, "--target-soundness", "2^-16", "--q", "257"]);
        let r = common::stdout(&o)
            .lines()
            .find_map(|l| l.strip_prefix("r=").map(str::to_string))
            .unwrap_or_default();
        cli.push(r);
    }
    ensure(
        exact == (28, 17) && cli == ["28", "17"],
        format!("stern r={} cve r={} (bench prints {} and {})", exact.0, exact.1, cli[0], cli[1]),
    )
}

fn cost() -> Outcome {
    let p = standard(1);
    let sf = cost_model(&p, SchemeId::Stern, CostMode::Formula).total_bits_avg;
    let cf = cost_model(&p, SchemeId::Cve, CostMode::Formula).total_bits_avg;
    let sc = cost_model(&p, SchemeId::Stern, CostMode::Counted).total_bits_avg;
    let cc = cost_model(&p, SchemeId::Cve, CostMode::Counted).total_bits_avg;
    let (sf, cf, sc, cc) = (
        format_decimal(&sf, 2),
        format_decimal(&cf, 2),
        format_decimal(&sc, 2),
        format_decimal(&cc, 2),
    );
    ensure(
        sf == "2348.67" && cf == "2506.00",
        format!("formula stern {sf} cve {cf}; counted stern {sc} cve {cc} (stern answer terms differ)"),
    )
}

fn zk(scheme: SchemeId, label: &str) -> Result<(f64, f64), String> {
    let params = standard(1);
    let kf = keygen(scheme, &params, &seed(label).derive(b"key", 16)).map_err(|e| e.to_string())?;
    let real = real_transcripts(&kf, 10_000, b"acceptance", &seed(label).derive(b"real", 32))
        .map_err(|e| e.to_string())?;
    let sim = |fixed| {
        let opts = SimOptions {
            fixed_permutation: fixed,
            ..SimOptions::default()
        };
        simulated_transcripts(&params, &kf.public, 10_000, b"acceptance", &seed(label).derive(b"sim", 32), opts)
            .map_err(|e| e.to_string())
    };
    let honest = zk_stat_test(&params, &real, &sim(false)?).map_err(|e| e.to_string())?;
    let broken = zk_stat_test(&params, &real, &sim(true)?).map_err(|e| e.to_string())?;
    Ok((honest.min_p(), broken.min_p()))
}

fn zero_knowledge() -> Outcome {
    let (s, sb) = zk(SchemeId::Stern, "c7-stern")?;
    let (c, cb) = zk(SchemeId::Cve, "c7-cve")?;
    ensure(
        s > 0.01 && c > 0.01 && sb < 1e-6 && cb < 1e-6,
        format!("min p stern {s:.3e} cve {c:.3e}; broken control stern {sb:.3e} cve {cb:.3e}"),
    )
}

const INVARIANT_CASES: usize = 10_000;

fn random_vector(x: &mut XofStream, q: u16, len: usize) -> FqVector {
    FqVector::new(q, (0..len).map(|_| x.next_below(q as u32) as u16).collect()).unwrap()
}

fn invariants() -> Outcome {
    const QS: [u16; 6] = [2, 3, 13, 31, 257, 7681];
    let mut x = XofStream::new(b"c8 invariants", 0);
    let mut failures = Vec::new();

    let mut bad = 0;
    for _ in 0..INVARIANT_CASES {
        let q = QS[x.next_below(QS.len() as u32) as usize];
        let n = 1 + x.next_below(48) as usize;
        let pi = Isometry::from_seeds(&Seed::new(x.bytes(16)), &Seed::new(x.bytes(16)), n, q);
        let (u, v) = (random_vector(&mut x, q, n), random_vector(&mut x, q, n));
        let a = x.next_below(q as u32) as u16;
        let pu = pi.apply(&u).unwrap();
        let ok = pu.weight() == u.weight()
            && pi.apply(&u.add(&v).unwrap()).unwrap() == pu.add(&pi.apply(&v).unwrap()).unwrap()
            && pi.apply(&u.scale(a)).unwrap() == pu.scale(a)
            && pi.apply_inverse(&pu).unwrap() == u;
        bad += !ok as usize;
    }
    if bad > 0 {
        failures.push(format!("isometry {bad}"));
    }

    let mut bad = 0;
    for _ in 0..INVARIANT_CASES {
        let q = QS[x.next_below(QS.len() as u32) as usize];
        let n = 2 + x.next_below(30) as usize;
        let m = 1 + x.next_below(n as u32 - 1) as usize;
        let a = FqMatrix::new(q, n, m, (0..n * m).map(|_| x.next_below(q as u32) as u16).collect()).unwrap();
        let ok = match left_nullspace(&a) {
            Ok(b) => b.mul(&a).unwrap().is_zero() && b.rows() == n - m && b.rank() == n - m,
            Err(_) => a.rank() < m,
        };
        bad += !ok as usize;
    }
    if bad > 0 {
        failures.push(format!("nullspace {bad}"));
    }

    let mut bad = 0;
    let p = standard(1);
    for _ in 0..INVARIANT_CASES {
        let len = x.next_below(300) as usize;
        let msg = x.bytes(len);
        let r = Seed::new(x.bytes(16));
        let c = commit(&msg, &r, &p);
        let mut tampered = r.as_bytes().to_vec();
        let bit = x.next_below(128) as usize;
        tampered[bit / 8] ^= 1 << (bit % 8);
        let ok = c.len() == 32 && verify_opening(&c, &msg, &r, &p) && !verify_opening(&c, &msg, &Seed::new(tampered), &p);
        bad += !ok as usize;
    }
    if bad > 0 {
        failures.push(format!("commitment {bad}"));
    }

    let mut bad = 0;
    for _ in 0..INVARIANT_CASES {
        let kind = MessageType::ALL[x.next_below(MessageType::ALL.len() as u32) as usize];
        let len = x.next_below(600) as usize;
        let m = WireMessage::new(kind, x.bytes(len));
        bad += (decode_message(&encode_message(&m)).ok() != Some(m)) as usize;
    }
    if bad > 0 {
        failures.push(format!("wire {bad}"));
    }

    ensure(
        failures.is_empty(),
        if failures.is_empty() {
            format!("4 suites x {INVARIANT_CASES} cases")
        } else {
            format!("failing cases: {}", failures.join(", "))
        },
    )
}

fn tcp_loopback() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let key = common::keygen(dir.path(), "k", "stern", "c9", &["--rounds", "28"]);
    let tr = dir.path().join("session.tr").to_string_lossy().into_owned();
    let again = dir.path().join("replayed.tr").to_string_lossy().into_owned();
    let pk = format!("{key}.pk");
    let addr = common::free_addr();
    let mut server = common::spawn_serve(&["--pk", &pk, "--listen", &addr, "--transcript", &tr]);
    let client = common::prove(&format!("{key}.sk"), &addr, "c9");
    if client.status.code() != Some(0) {
        let _ = server.kill();
    }
    let (code, out, _) = common::finish(server);
    let replay = common::run(&["replay", "--pk", &pk, "--transcript", &tr, "--rounds", "28", "--out", &again]);
    let replayed = common::stdout(&replay);
    let rounds = lweid::wire::load_transcripts(&tr).map(|t| t.2.len()).unwrap_or(0);
    let same = std::fs::read(&tr).ok().is_some_and(|a| std::fs::read(&again).ok() == Some(a));
    ensure(
        code == Some(0)
            && client.status.code() == Some(0)
            && out.trim() == "success"
            && replayed.lines().last() == Some("success")
            && rounds == 28
            && same,
        format!(
            "server {:?} \"{}\", {rounds} rounds, replay \"{}\", byte-identical {same}",
            code,
            out.trim(),
            replayed.lines().last().unwrap_or("")
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("completeness", completeness),
        ("soundness 2/3", || soundness(SchemeId::Stern, 257, 2.0 / 3.0, "c2")),
        ("soundness (q+1)/2q at q=31", || soundness(SchemeId::Cve, 31, 16.0 / 31.0, "c3")),
        ("extractors", extractors),
        ("round calculus", round_calculus),
        ("cost model", cost),
        ("zero-knowledge proxy", zero_knowledge),
        ("invariant suites", invariants),
        ("tcp loopback + replay", tcp_loopback),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let outcome = f();
        report(i as u32 + 1, name, &outcome);
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
