//! Statistical checks: completeness, empirical soundness, and a
//! zero-knowledge proxy comparing marginals of real and simulated
//! transcripts.
//!
//! The zero-knowledge test only looks at observable marginal distributions.
//! Passing it is evidence, not a proof, of statistical closeness.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::cve::{Cve, CvePublicKey};
use crate::error::{Error, Result};
use crate::keyfile::{KeyFile, PublicKey, SecretKey};
use crate::oracle::{HashChallenger, SimOptions};
use crate::params::Params;
use crate::prg::{expand_permutation, Seed, XofStream, TAG_STREAM};
use crate::session::{run_local, Prover, Verifier};
use crate::stern::{Stern, SternPublicKey, SternResponse};
use crate::cve::CveResponse;
use crate::verdict::Verdict;
use crate::wire::{RoundTranscript, SchemeId};

const SEED_LEN: usize = 32;

/// Fresh key pair for `scheme`, packaged as a secret-bearing key file.
pub fn keygen(scheme: SchemeId, params: &Params, master: &Seed) -> Result<KeyFile> {
    Ok(match scheme {
        SchemeId::Stern => {
            let (pk, sk) = Stern::new(params.clone())?.keygen(master)?;
            KeyFile {
                params: params.clone(),
                public: PublicKey::Stern(pk),
                secret: Some(SecretKey::Stern(sk)),
            }
        }
        SchemeId::Cve => {
            let (pk, sk) = Cve::new(params.clone())?.keygen(master)?;
            KeyFile {
                params: params.clone(),
                public: PublicKey::Cve(pk),
                secret: Some(SecretKey::Cve(sk)),
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    pub scheme: SchemeId,
    pub trials: usize,
    pub rounds_per_trial: u32,
    pub accepted: usize,
    /// Verdicts of the failing sessions, if any.
    pub failures: Vec<(usize, Verdict)>,
}

impl CompletenessReport {
    pub fn all_accepted(&self) -> bool {
        self.accepted == self.trials
    }
}

/// Runs `trials` full honest sessions of `params.rounds` rounds, each with its
/// own key pair and randomness, through the message-level state machines.
pub fn completeness_suite(
    scheme: SchemeId,
    params: &Params,
    trials: usize,
    seed: &Seed,
) -> Result<CompletenessReport> {
    params.validate()?;
    let outcomes: Vec<Result<Verdict>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let trial = seed.derive_indexed(b"completeness", i as u64, SEED_LEN);
            let kf = keygen(scheme, params, &trial.derive(b"key", SEED_LEN))?;
            let mut v = Verifier::from_keyfile(
                &kf.public_only(),
                params.rounds,
                &trial.derive(b"verifier", SEED_LEN),
            )?;
            let mut p = Prover::new(&kf, trial.derive(b"prover", SEED_LEN))?;
            run_local(&mut v, &mut p)
        })
        .collect();
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        let v = o?;
        if !v.is_accept() {
            failures.push((i, v));
        }
    }
    Ok(CompletenessReport {
        scheme,
        trials,
        rounds_per_trial: params.rounds,
        accepted: trials - failures.len(),
        failures,
    })
}

/// For each of `rounds` honest 5-pass rounds, answers every blind α ∈ F_q and
/// both challenges from the same commitments. Returns (accepted, checked).
pub fn cve_alpha_sweep(params: &Params, rounds: usize, seed: &Seed) -> Result<(usize, usize)> {
    let cve = Cve::new(params.clone())?;
    let (pk, sk) = cve.keygen(&seed.derive(b"key", SEED_LEN))?;
    let per_round: Vec<Result<(usize, usize)>> = (0..rounds)
        .into_par_iter()
        .map(|r| {
            let state = cve.prover_commit(&pk, &sk, &seed.derive_indexed(b"sweep", r as u64, SEED_LEN))?;
            let mut ok = 0;
            let mut total = 0;
            for alpha in 0..params.q {
                let mut st = state.clone();
                let beta = cve.prover_beta(&mut st, alpha)?;
                for ch in 1..=2 {
                    let resp = cve.prover_respond(&st, ch)?;
                    total += 1;
                    if cve
                        .verifier_check(&pk, &st.commitments, alpha, &beta, ch, &resp)
                        .is_accept()
                    {
                        ok += 1;
                    }
                }
            }
            Ok((ok, total))
        })
        .collect();
    per_round
        .into_iter()
        .try_fold((0, 0), |(a, t), r| r.map(|(x, y)| (a + x, t + y)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoundnessEstimate {
    pub scheme: SchemeId,
    pub trials: usize,
    pub rounds_per_trial: u32,
    pub accepted: usize,
    pub rate: f64,
    /// 99% Wilson score interval.
    pub ci: (f64, f64),
    /// Per-round error raised to `rounds_per_trial`.
    pub theoretical: f64,
}

impl SoundnessEstimate {
    pub fn covers_theory(&self) -> bool {
        self.ci.0 <= self.theoretical && self.theoretical <= self.ci.1
    }
}

/// Wilson score interval for a binomial proportion at two-sided `confidence`.
pub fn wilson_interval(successes: usize, trials: usize, confidence: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn stern_cheat_trial(
    stern: &Stern,
    pk: &SternPublicKey,
    rounds: u32,
    seed: &Seed,
) -> Result<bool> {
    let mut coins = XofStream::new(seed.derive(b"verifier", SEED_LEN).as_bytes(), TAG_STREAM);
    for r in 0..rounds {
        let strategy = [[1, 2], [1, 3], [2, 3]][coins.next_below(3) as usize];
        let cheater = stern.cheat_round(pk, strategy, &seed.derive_indexed(b"cheat", r as u64, SEED_LEN))?;
        let ch = coins.next_below(3) as u8 + 1;
        let resp: SternResponse = cheater.respond(ch)?;
        if !stern.verifier_check(pk, cheater.commitments(), ch, &resp).is_accept() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn cve_cheat_trial(cve: &Cve, pk: &CvePublicKey, rounds: u32, seed: &Seed) -> Result<bool> {
    let q = cve.params().q;
    let mut coins = XofStream::new(seed.derive(b"verifier", SEED_LEN).as_bytes(), TAG_STREAM);
    for r in 0..rounds {
        let cheater = cve.cheat_round(pk, &seed.derive_indexed(b"cheat", r as u64, SEED_LEN))?;
        let alpha = coins.next_below(q as u32) as u16;
        let beta = cheater.beta(alpha)?;
        let ch = coins.next_below(2) as u8 + 1;
        let resp: CveResponse = cheater.respond(ch)?;
        if !cve
            .verifier_check(pk, cheater.commitments(), alpha, &beta, ch, &resp)
            .is_accept()
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs the scheme's cheating prover (no secret) against an honest verifier
/// with uniform coins.
pub fn estimate_soundness(
    scheme: SchemeId,
    params: &Params,
    rounds_per_trial: u32,
    trials: usize,
    seed: &Seed,
) -> Result<SoundnessEstimate> {
    if rounds_per_trial == 0 {
        return Err(Error::InvalidParams("rounds_per_trial must be at least 1".into()));
    }
    let kf = keygen(scheme, params, &seed.derive(b"key", SEED_LEN))?;
    let trial_seed = |i: usize| seed.derive_indexed(b"trial", i as u64, SEED_LEN);
    let outcomes: Vec<Result<bool>> = match &kf.public {
        PublicKey::Stern(pk) => {
            let stern = Stern::new(params.clone())?;
            (0..trials)
                .into_par_iter()
                .map(|i| stern_cheat_trial(&stern, pk, rounds_per_trial, &trial_seed(i)))
                .collect()
        }
        PublicKey::Cve(pk) => {
            let cve = Cve::new(params.clone())?;
            (0..trials)
                .into_par_iter()
                .map(|i| cve_cheat_trial(&cve, pk, rounds_per_trial, &trial_seed(i)))
                .collect()
        }
    };
    let mut accepted = 0;
    for o in outcomes {
        accepted += o? as usize;
    }
    let per_round = crate::cost::per_round_error(scheme, params.q);
    let per_round = num_traits::ToPrimitive::to_f64(&per_round).expect("finite");
    Ok(SoundnessEstimate {
        scheme,
        trials,
        rounds_per_trial,
        accepted,
        rate: if trials == 0 { 0.0 } else { accepted as f64 / trials as f64 },
        ci: wilson_interval(accepted, trials, 0.99),
        theoretical: per_round.powi(rounds_per_trial as i32),
    })
}

/// Honest transcripts with challenges from the hash oracle, one round each.
pub fn real_transcripts(
    kf: &KeyFile,
    rounds: usize,
    nonce: &[u8],
    seed: &Seed,
) -> Result<Vec<RoundTranscript>> {
    let params = &kf.params;
    let oracle = HashChallenger::new(nonce, params.q);
    let round_seed = |i: usize| seed.derive_indexed(b"real", i as u64, SEED_LEN);
    match (&kf.public, &kf.secret) {
        (PublicKey::Stern(pk), Some(SecretKey::Stern(sk))) => {
            use crate::stern::SternChallenger;
            let stern = Stern::new(params.clone())?;
            (0..rounds)
                .into_par_iter()
                .map(|i| {
                    let st = stern.prover_commit(pk, sk, &round_seed(i))?;
                    let ch = oracle.challenge(&st.commitments);
                    let t = crate::stern::SternTranscript {
                        commitments: st.commitments.clone(),
                        challenge: ch,
                        response: stern.prover_respond(&st, ch)?,
                    };
                    let v = stern.verifier_check(pk, &t.commitments, ch, &t.response);
                    Ok(RoundTranscript::from_stern(&t, v))
                })
                .collect()
        }
        (PublicKey::Cve(pk), Some(SecretKey::Cve(sk))) => {
            use crate::cve::CveChallenger;
            let cve = Cve::new(params.clone())?;
            (0..rounds)
                .into_par_iter()
                .map(|i| {
                    let mut st = cve.prover_commit(pk, sk, &round_seed(i))?;
                    let alpha = oracle.alpha(&st.commitments);
                    let beta = cve.prover_beta(&mut st, alpha)?;
                    let ch = oracle.challenge(&st.commitments, alpha, &beta);
                    let t = crate::cve::CveTranscript {
                        commitments: st.commitments.clone(),
                        alpha,
                        beta,
                        challenge: ch,
                        response: cve.prover_respond(&st, ch)?,
                    };
                    let v = cve.verifier_check(pk, &t.commitments, alpha, &t.beta, ch, &t.response);
                    Ok(RoundTranscript::from_cve(&t, v))
                })
                .collect()
        }
        _ => Err(Error::Precondition("real transcripts need the secret key".into())),
    }
}

/// Simulator output for the same oracle, produced in parallel chunks with
/// disjoint seeds.
pub fn simulated_transcripts(
    params: &Params,
    pk: &PublicKey,
    rounds: usize,
    nonce: &[u8],
    seed: &Seed,
    options: SimOptions,
) -> Result<Vec<RoundTranscript>> {
    const CHUNK: usize = 256;
    let oracle = HashChallenger::new(nonce, params.q);
    let chunks: Vec<(usize, usize)> = (0..rounds)
        .step_by(CHUNK)
        .map(|start| (start, CHUNK.min(rounds - start)))
        .collect();
    let chunk_seed = |start: usize| seed.derive_indexed(b"sim-chunk", start as u64, SEED_LEN);
    let parts: Vec<Result<Vec<RoundTranscript>>> = match pk {
        PublicKey::Stern(pk) => {
            let stern = Stern::new(params.clone())?;
            chunks
                .par_iter()
                .map(|&(start, len)| {
                    let sim = stern.simulate(pk, &oracle, len, &chunk_seed(start), options)?;
                    Ok(sim
                        .transcripts
                        .iter()
                        .map(|t| {
                            let v = stern.verifier_check(pk, &t.commitments, t.challenge, &t.response);
                            RoundTranscript::from_stern(t, v)
                        })
                        .collect())
                })
                .collect()
        }
        PublicKey::Cve(pk) => {
            let cve = Cve::new(params.clone())?;
            chunks
                .par_iter()
                .map(|&(start, len)| {
                    let sim = cve.simulate(pk, &oracle, len, &chunk_seed(start), options)?;
                    Ok(sim
                        .transcripts
                        .iter()
                        .map(|t| {
                            let v = cve.verifier_check(
                                pk,
                                &t.commitments,
                                t.alpha,
                                &t.beta,
                                t.challenge,
                                &t.response,
                            );
                            RoundTranscript::from_cve(t, v)
                        })
                        .collect())
                })
                .collect()
        }
    };
    let mut out = Vec::with_capacity(rounds);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Categorical observations extracted from one set of transcripts.
type Histograms = BTreeMap<&'static str, BTreeMap<u32, u64>>;

fn observe(params: &Params, rounds: &[RoundTranscript]) -> Result<Histograms> {
    let mut h: Histograms = BTreeMap::new();
    let mut add = |stat: &'static str, value: u32| {
        *h.entry(stat).or_default().entry(value).or_insert(0) += 1;
    };
    let n = params.n;
    for r in rounds {
        add("response_length", r.messages.last().map_or(0, |m| m.payload.len()) as u32);
        match r.scheme {
            SchemeId::Stern => {
                let t = r.to_stern(params)?;
                add("challenge", t.challenge as u32);
                for c in [&t.commitments.c1, &t.commitments.c2, &t.commitments.c3] {
                    for &b in c.as_bytes() {
                        add("digest_bytes", b as u32);
                    }
                }
                match &t.response {
                    SternResponse::One { seed_perm, .. } | SternResponse::Three { seed_perm, .. } => {
                        add("perm_first", expand_permutation(seed_perm, n)[0] as u32);
                    }
                    SternResponse::Two { z, .. } => add("revealed_weight", z.weight() as u32),
                }
            }
            SchemeId::Cve => {
                let t = r.to_cve(params)?;
                add("challenge", t.challenge as u32);
                for c in [&t.commitments.c1, &t.commitments.c2] {
                    for &b in c.as_bytes() {
                        add("digest_bytes", b as u32);
                    }
                }
                for &x in t.beta.as_slice() {
                    add("beta_entries", x as u32);
                }
                match &t.response {
                    CveResponse::One { seed_perm, .. } => {
                        add("perm_first", expand_permutation(seed_perm, n)[0] as u32);
                    }
                    CveResponse::Two { z, .. } => add("revealed_weight", z.weight() as u32),
                }
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatResult {
    pub statistic: String,
    pub n_real: u64,
    pub n_sim: u64,
    pub chi2: f64,
    pub dof: usize,
    pub p: f64,
}

/// Two-sample chi-square homogeneity test on categorical counts. Adjacent
/// categories are pooled until each pooled bin expects at least five
/// observations from the smaller sample.
pub fn two_sample_chi2(a: &BTreeMap<u32, u64>, b: &BTreeMap<u32, u64>) -> (f64, usize, f64) {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return (0.0, 0, 1.0);
    }
    let keys: std::collections::BTreeSet<u32> = a.keys().chain(b.keys()).copied().collect();
    let total = (na + nb) as f64;
    let small = na.min(nb) as f64;
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0u64, 0u64);
    for k in keys {
        acc.0 += a.get(&k).copied().unwrap_or(0);
        acc.1 += b.get(&k).copied().unwrap_or(0);
        if small * (acc.0 + acc.1) as f64 / total >= 5.0 {
            bins.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    if bins.len() < 2 {
        return (0.0, 0, 1.0);
    }
    let (fa, fb) = (na as f64, nb as f64);
    let chi2: f64 = bins
        .iter()
        .map(|&(x, y)| {
            let (x, y) = (x as f64, y as f64);
            let d = x * (fb / fa).sqrt() - y * (fa / fb).sqrt();
            d * d / (x + y)
        })
        .sum();
    let dof = bins.len() - 1;
    let p = ChiSquared::new(dof as f64)
        .expect("positive dof")
        .sf(chi2);
    (chi2, dof, p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZkReport {
    pub results: Vec<StatResult>,
}

impl ZkReport {
    pub fn min_p(&self) -> f64 {
        self.results.iter().map(|r| r.p).fold(1.0, f64::min)
    }

    pub fn all_above(&self, alpha: f64) -> bool {
        self.results.iter().all(|r| r.p > alpha)
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<16} {:>9} {:>9} {:>12} {:>5} {:>10}\n",
            "statistic", "n_real", "n_sim", "chi2", "dof", "p"
        );
        for r in &self.results {
            let _ = writeln!(
                s,
                "{:<16} {:>9} {:>9} {:>12.3} {:>5} {:>10.3e}",
                r.statistic, r.n_real, r.n_sim, r.chi2, r.dof, r.p
            );
        }
        s.push_str("(marginal distributions only; a proxy for statistical closeness)\n");
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("statistic,n_real,n_sim,chi2,dof,p\n");
        for r in &self.results {
            let _ = writeln!(s, "{},{},{},{},{},{}", r.statistic, r.n_real, r.n_sim, r.chi2, r.dof, r.p);
        }
        s
    }
}

/// Compares observable marginals of two transcript sets. Symmetric in its
/// arguments up to the n_real/n_sim labels.
pub fn zk_stat_test(
    params: &Params,
    real: &[RoundTranscript],
    simulated: &[RoundTranscript],
) -> Result<ZkReport> {
    let scheme = |rs: &[RoundTranscript]| rs.first().map(|r| r.scheme);
    if let (Some(a), Some(b)) = (scheme(real), scheme(simulated)) {
        if a != b || real.iter().chain(simulated).any(|r| r.scheme != a) {
            return Err(Error::Precondition("transcript sets mix schemes".into()));
        }
    }
    let ha = observe(params, real)?;
    let hb = observe(params, simulated)?;
    let names: std::collections::BTreeSet<&str> = ha.keys().chain(hb.keys()).copied().collect();
    let empty = BTreeMap::new();
    let results = names
        .into_iter()
        .map(|name| {
            let a = ha.get(name).unwrap_or(&empty);
            let b = hb.get(name).unwrap_or(&empty);
            let (chi2, dof, p) = two_sample_chi2(a, b);
            StatResult {
                statistic: name.to_string(),
                n_real: a.values().sum(),
                n_sim: b.values().sum(),
                chi2,
                dof,
                p,
            }
        })
        .collect();
    Ok(ZkReport { results })
}
