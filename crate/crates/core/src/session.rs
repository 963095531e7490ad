//! Message-level state machines for both roles, and offline replay.
//!
//! A session opens with a KEY frame from the verifier announcing the scheme,
//! parameters and round count. Each round is the scheme's 3 or 5 passes
//! followed by a RESULT frame carrying the round verdict. The session ends
//! after the first rejection or the last round.

use crate::cve::{Cve, CvePublicKey, CveProverState, CveSecretKey};
use crate::error::{Error, Result};
use crate::keyfile::{KeyFile, PublicKey, SecretKey};
use crate::params::Params;
use crate::prg::{Seed, XofStream, TAG_STREAM};
use crate::stern::{Stern, SternProverState};
use crate::verdict::{RejectReason, Verdict};
use crate::wire::{payload, MessageType, RoundTranscript, SchemeId, WireMessage};

/// Decodes the messages of a (possibly partial) round in order. Returns the
/// number that decoded cleanly.
fn decodable_prefix(params: &Params, scheme: SchemeId, msgs: &[WireMessage]) -> usize {
    let p = params;
    msgs.iter()
        .zip(scheme.passes())
        .take_while(|(m, kind)| {
            m.kind == **kind
                && match m.kind {
                    MessageType::S1Commit => payload::decode_stern_commit(p, &m.payload).is_ok(),
                    MessageType::S1Challenge => payload::decode_challenge(&m.payload, 3).is_ok(),
                    MessageType::S1Response => {
                        payload::decode_stern_response(p, &m.payload).is_ok()
                    }
                    MessageType::S2Commit => payload::decode_cve_commit(p, &m.payload).is_ok(),
                    MessageType::S2Alpha => payload::decode_alpha(p, &m.payload).is_ok(),
                    MessageType::S2Beta => payload::decode_beta(p, &m.payload).is_ok(),
                    MessageType::S2Challenge => payload::decode_challenge(&m.payload, 2).is_ok(),
                    MessageType::S2Response => payload::decode_cve_response(p, &m.payload).is_ok(),
                    MessageType::Key | MessageType::Result => false,
                }
        })
        .count()
}

/// The verifier's decision on the messages of one round. An incomplete round
/// whose messages all parse ended because the prover went quiet.
pub fn judge_round(params: &Params, pk: &PublicKey, msgs: &[WireMessage]) -> Verdict {
    let scheme = pk.scheme();
    let full = scheme.passes().len();
    let ok = decodable_prefix(params, scheme, msgs);
    if ok < msgs.len() || msgs.len() > full {
        return Verdict::Reject(RejectReason::Malformed);
    }
    if msgs.len() < full {
        return Verdict::Reject(RejectReason::Timeout);
    }
    let round = RoundTranscript {
        scheme,
        messages: msgs.to_vec(),
        verdict: Verdict::Accept,
    };
    let judged = match pk {
        PublicKey::Stern(pk) => Stern::new(params.clone()).and_then(|s| {
            let t = round.to_stern(params)?;
            Ok(s.verifier_check(pk, &t.commitments, t.challenge, &t.response))
        }),
        PublicKey::Cve(pk) => Cve::new(params.clone()).and_then(|c| {
            let t = round.to_cve(params)?;
            Ok(c.verifier_check(pk, &t.commitments, t.alpha, &t.beta, t.challenge, &t.response))
        }),
    };
    judged.unwrap_or(Verdict::Reject(RejectReason::Malformed))
}

/// Re-runs the verifier checks over recorded rounds. Returns the per-round
/// verdicts and the session verdict (accept iff every round accepts and
/// `expected_rounds` rounds are present).
pub fn replay(
    params: &Params,
    pk: &PublicKey,
    rounds: &[RoundTranscript],
    expected_rounds: Option<u32>,
) -> (Vec<Verdict>, Verdict) {
    let verdicts: Vec<Verdict> = rounds
        .iter()
        .map(|r| {
            if r.scheme != pk.scheme() {
                Verdict::Reject(RejectReason::Malformed)
            } else {
                judge_round(params, pk, &r.messages)
            }
        })
        .collect();
    let overall = verdicts
        .iter()
        .copied()
        .find(|v| !v.is_accept())
        .unwrap_or_else(|| match expected_rounds {
            Some(r) if rounds.len() < r as usize => Verdict::Reject(RejectReason::Timeout),
            _ => Verdict::Accept,
        });
    (verdicts, overall)
}

/// Honest verifier. Holds only the public key.
pub struct Verifier {
    params: Params,
    pk: PublicKey,
    rounds: u32,
    coins: XofStream,
    pending: Vec<WireMessage>,
    transcripts: Vec<RoundTranscript>,
    verdict: Option<Verdict>,
}

impl Verifier {
    /// `coins` seeds the verifier's challenges and blinds; use fresh
    /// randomness in production.
    pub fn new(params: Params, pk: PublicKey, rounds: u32, coins: &Seed) -> Result<Self> {
        params.validate()?;
        if rounds == 0 {
            return Err(Error::InvalidParams("rounds must be at least 1".into()));
        }
        Ok(Verifier {
            params,
            pk,
            rounds,
            coins: XofStream::new(coins.as_bytes(), TAG_STREAM),
            pending: Vec::new(),
            transcripts: Vec::new(),
            verdict: None,
        })
    }

    pub fn from_keyfile(kf: &KeyFile, rounds: u32, coins: &Seed) -> Result<Self> {
        Verifier::new(kf.params.clone(), kf.public.clone(), rounds, coins)
    }

    pub fn scheme(&self) -> SchemeId {
        self.pk.scheme()
    }

    pub fn hello(&self) -> WireMessage {
        WireMessage::new(
            MessageType::Key,
            payload::session_hello(self.scheme(), &self.params, self.rounds),
        )
    }

    pub fn is_finished(&self) -> bool {
        self.verdict.is_some()
    }

    /// Session verdict once finished.
    pub fn verdict(&self) -> Option<Verdict> {
        self.verdict
    }

    pub fn transcripts(&self) -> &[RoundTranscript] {
        &self.transcripts
    }

    pub fn rounds_completed(&self) -> usize {
        self.transcripts.len()
    }

    /// Feeds one prover message; returns the frames to send back.
    pub fn receive(&mut self, msg: WireMessage) -> Vec<WireMessage> {
        if self.is_finished() {
            return Vec::new();
        }
        let passes = self.scheme().passes();
        if msg.kind != passes[self.pending.len()] {
            log::debug!("unexpected {:?} in round {}", msg.kind, self.transcripts.len());
            return self.close_round(Verdict::Reject(RejectReason::Malformed));
        }
        self.pending.push(msg);
        if self.pending.len() == passes.len() {
            let v = judge_round(&self.params, &self.pk, &self.pending);
            return self.close_round(v);
        }
        if decodable_prefix(&self.params, self.scheme(), &self.pending) < self.pending.len() {
            return self.close_round(Verdict::Reject(RejectReason::Malformed));
        }
        let reply = match passes[self.pending.len()] {
            MessageType::S1Challenge => payload::challenge(self.coins.next_below(3) as u8 + 1),
            MessageType::S2Alpha => payload::alpha(self.coins.next_below(self.params.q as u32) as u16),
            MessageType::S2Challenge => payload::challenge(self.coins.next_below(2) as u8 + 1),
            other => unreachable!("verifier never sends {other:?} mid-round"),
        };
        let reply = WireMessage::new(passes[self.pending.len()], reply);
        self.pending.push(reply.clone());
        vec![reply]
    }

    /// Ends the session because the prover stopped answering or sent an
    /// unreadable frame.
    pub fn abort(&mut self, reason: RejectReason) -> Vec<WireMessage> {
        if self.is_finished() {
            return Vec::new();
        }
        self.close_round(Verdict::Reject(reason))
    }

    fn close_round(&mut self, v: Verdict) -> Vec<WireMessage> {
        let msgs = std::mem::take(&mut self.pending);
        let round = RoundTranscript::new(self.scheme(), msgs, v)
            .expect("verifier only records well-ordered rounds");
        self.transcripts.push(round);
        if !v.is_accept() {
            self.verdict = Some(v);
        } else if self.transcripts.len() == self.rounds as usize {
            self.verdict = Some(Verdict::Accept);
        }
        vec![WireMessage::new(MessageType::Result, payload::verdict(&v))]
    }
}

#[derive(Debug)]
enum Phase {
    AwaitHello,
    SternChallenge(Box<SternProverState>),
    CveAlpha(Box<CveProverState>),
    CveChallenge(Box<CveProverState>),
    AwaitResult,
    Done,
}

#[derive(Debug)]
enum Identity {
    Stern(Stern, crate::stern::SternPublicKey, crate::stern::SternSecretKey),
    Cve(Cve, CvePublicKey, CveSecretKey),
}

/// Honest prover.
#[derive(Debug)]
pub struct Prover {
    params: Params,
    id: Identity,
    master: Seed,
    round: u32,
    rounds: u32,
    phase: Phase,
    verdict: Option<Verdict>,
}

impl Prover {
    /// `master` seeds all per-round prover randomness.
    pub fn new(kf: &KeyFile, master: Seed) -> Result<Self> {
        let id = match (&kf.public, &kf.secret) {
            (PublicKey::Stern(pk), Some(SecretKey::Stern(sk))) => {
                Identity::Stern(Stern::new(kf.params.clone())?, pk.clone(), sk.clone())
            }
            (PublicKey::Cve(pk), Some(SecretKey::Cve(sk))) => {
                Identity::Cve(Cve::new(kf.params.clone())?, pk.clone(), sk.clone())
            }
            _ => {
                return Err(Error::Precondition(
                    "prover needs a secret-bearing key file".into(),
                ))
            }
        };
        Ok(Prover {
            params: kf.params.clone(),
            id,
            master,
            round: 0,
            rounds: 0,
            phase: Phase::AwaitHello,
            verdict: None,
        })
    }

    pub fn scheme(&self) -> SchemeId {
        match self.id {
            Identity::Stern(..) => SchemeId::Stern,
            Identity::Cve(..) => SchemeId::Cve,
        }
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, Phase::Done)
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.verdict
    }

    /// Rounds the verifier has ruled on.
    pub fn rounds_completed(&self) -> u32 {
        self.round
    }

    pub fn rounds_announced(&self) -> u32 {
        self.rounds
    }

    fn commit(&mut self) -> Result<WireMessage> {
        let seed = self
            .master
            .derive_indexed(b"round", self.round as u64, self.params.seed_bytes().max(16));
        Ok(match &self.id {
            Identity::Stern(s, pk, sk) => {
                let st = s.prover_commit(pk, sk, &seed)?;
                let m = WireMessage::new(MessageType::S1Commit, payload::stern_commit(&st.commitments));
                self.phase = Phase::SternChallenge(Box::new(st));
                m
            }
            Identity::Cve(c, pk, sk) => {
                let st = c.prover_commit(pk, sk, &seed)?;
                let m = WireMessage::new(MessageType::S2Commit, payload::cve_commit(&st.commitments));
                self.phase = Phase::CveAlpha(Box::new(st));
                m
            }
        })
    }

    fn protocol(&self, msg: &WireMessage) -> Error {
        Error::Protocol(format!(
            "unexpected {:?} frame in round {} ({})",
            msg.kind,
            self.round,
            match self.phase {
                Phase::AwaitHello => "awaiting session hello",
                Phase::SternChallenge(_) | Phase::CveChallenge(_) => "awaiting challenge",
                Phase::CveAlpha(_) => "awaiting blind",
                Phase::AwaitResult => "awaiting result",
                Phase::Done => "session over",
            }
        ))
    }

    /// Feeds one verifier message; returns the frames to send back.
    pub fn receive(&mut self, msg: WireMessage) -> Result<Vec<WireMessage>> {
        let phase = std::mem::replace(&mut self.phase, Phase::Done);
        let out = match (phase, msg.kind) {
            (Phase::AwaitHello, MessageType::Key) => {
                let (scheme, params, rounds) = payload::decode_session_hello(&msg.payload)?;
                let p = &self.params;
                let same = (params.n, params.m, params.q, params.seed_len, params.com_len)
                    == (p.n, p.m, p.q, p.seed_len, p.com_len);
                if scheme != self.scheme() || !same {
                    return Err(Error::Protocol(format!(
                        "verifier runs {} with n={} m={} q={}; our key is {} with n={} m={} q={}",
                        scheme.name(),
                        params.n,
                        params.m,
                        params.q,
                        self.scheme().name(),
                        p.n,
                        p.m,
                        p.q
                    )));
                }
                if rounds == 0 {
                    return Err(Error::Protocol("verifier announced zero rounds".into()));
                }
                self.rounds = rounds;
                vec![self.commit()?]
            }
            (Phase::SternChallenge(st), MessageType::S1Challenge) => {
                let ch = payload::decode_challenge(&msg.payload, 3)?;
                let Identity::Stern(s, ..) = &self.id else { unreachable!() };
                let resp = s.prover_respond(&st, ch)?;
                self.phase = Phase::AwaitResult;
                vec![WireMessage::new(MessageType::S1Response, payload::stern_response(&resp))]
            }
            (Phase::CveAlpha(mut st), MessageType::S2Alpha) => {
                let alpha = payload::decode_alpha(&self.params, &msg.payload)?;
                let Identity::Cve(c, ..) = &self.id else { unreachable!() };
                let beta = c.prover_beta(&mut st, alpha)?;
                self.phase = Phase::CveChallenge(st);
                vec![WireMessage::new(MessageType::S2Beta, payload::beta(&beta))]
            }
            (Phase::CveChallenge(st), MessageType::S2Challenge) => {
                let ch = payload::decode_challenge(&msg.payload, 2)?;
                let Identity::Cve(c, ..) = &self.id else { unreachable!() };
                let resp = c.prover_respond(&st, ch)?;
                self.phase = Phase::AwaitResult;
                vec![WireMessage::new(MessageType::S2Response, payload::cve_response(&resp))]
            }
            (phase, MessageType::Result) if !matches!(phase, Phase::AwaitHello | Phase::Done) => {
                // The verifier may cut a round short.
                let v = payload::decode_verdict(&msg.payload)?;
                self.round += 1;
                if !v.is_accept() {
                    self.verdict = Some(v);
                    Vec::new()
                } else if !matches!(phase, Phase::AwaitResult) {
                    return Err(Error::Protocol("verifier accepted an unfinished round".into()));
                } else if self.round == self.rounds {
                    self.verdict = Some(Verdict::Accept);
                    Vec::new()
                } else {
                    vec![self.commit()?]
                }
            }
            (phase, _) => {
                self.phase = phase;
                let err = self.protocol(&msg);
                self.phase = Phase::Done;
                return Err(err);
            }
        };
        Ok(out)
    }
}

/// Runs a prover and verifier against each other in memory.
pub fn run_local(verifier: &mut Verifier, prover: &mut Prover) -> Result<Verdict> {
    let mut to_prover = vec![verifier.hello()];
    while !to_prover.is_empty() {
        let mut to_verifier = Vec::new();
        for m in to_prover.drain(..) {
            to_verifier.extend(prover.receive(m)?);
        }
        for m in to_verifier {
            to_prover.extend(verifier.receive(m));
        }
    }
    verifier
        .verdict()
        .ok_or_else(|| Error::Protocol("session stalled before a verdict".into()))
}
