//! Byte-level framing, payload codecs and transcript files.
//!
//! Frame: `tag (1 byte) ∥ length (4 bytes, big-endian) ∥ payload`.
//! Field elements are 2-byte little-endian residues; seeds and digests are
//! raw bytes of their configured lengths.
//!
//! File header shared by key and transcript files:
//! `"LWID" ∥ version (0x01) ∥ params block`, where the params block is
//! `scheme (1) ∥ n (u32 BE) ∥ m (u32 BE) ∥ q (u16 BE) ∥ σ (f64 bits, u64 BE)
//! ∥ rounds (u32 BE) ∥ seed_len (u16 BE) ∥ com_len (u16 BE)`.

use std::io::{Read, Write};
use std::path::Path;

use crate::commit::Commitment;
use crate::cve::{CveCommitments, CveResponse, CveTranscript};
use crate::error::{Error, Result};
use crate::field::FqVector;
use crate::params::Params;
use crate::prg::Seed;
use crate::stern::{SternCommitments, SternResponse, SternTranscript};
use crate::verdict::Verdict;

pub const MAGIC: &[u8; 4] = b"LWID";
pub const VERSION: u8 = 0x01;
pub const FRAME_HEADER_LEN: usize = 5;
/// Upper bound on a frame payload accepted from the network.
pub const MAX_PAYLOAD: usize = 1 << 24;
pub const PARAMS_BLOCK_LEN: usize = 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    S1Commit = 0x01,
    S1Challenge = 0x02,
    S1Response = 0x03,
    S2Commit = 0x13,
    S2Alpha = 0x14,
    S2Beta = 0x15,
    S2Challenge = 0x16,
    S2Response = 0x17,
    Key = 0x20,
    Result = 0x30,
}

impl MessageType {
    pub const ALL: [MessageType; 10] = [
        MessageType::S1Commit,
        MessageType::S1Challenge,
        MessageType::S1Response,
        MessageType::S2Commit,
        MessageType::S2Alpha,
        MessageType::S2Beta,
        MessageType::S2Challenge,
        MessageType::S2Response,
        MessageType::Key,
        MessageType::Result,
    ];

    pub fn from_tag(tag: u8) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| *t as u8 == tag)
            .ok_or(Error::UnknownTag(tag))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WireMessage {
    pub kind: MessageType,
    pub payload: Vec<u8>,
}

impl WireMessage {
    pub fn new(kind: MessageType, payload: Vec<u8>) -> Self {
        WireMessage { kind, payload }
    }

    pub fn encoded_len(&self) -> usize {
        FRAME_HEADER_LEN + self.payload.len()
    }
}

pub fn encode_message(msg: &WireMessage) -> Vec<u8> {
    let mut out = Vec::with_capacity(msg.encoded_len());
    encode_into(msg, &mut out);
    out
}

fn encode_into(msg: &WireMessage, out: &mut Vec<u8>) {
    out.push(msg.kind as u8);
    out.extend_from_slice(&(msg.payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&msg.payload);
}

/// Parse one frame from the front of `bytes`; returns it and the bytes used.
pub fn decode_prefix(bytes: &[u8]) -> Result<(WireMessage, usize)> {
    if bytes.len() < FRAME_HEADER_LEN {
        return Err(Error::Truncated {
            declared: FRAME_HEADER_LEN,
            available: bytes.len(),
        });
    }
    let kind = MessageType::from_tag(bytes[0])?;
    let len = u32::from_be_bytes([bytes[1], bytes[2], bytes[3], bytes[4]]) as usize;
    let available = bytes.len() - FRAME_HEADER_LEN;
    if len > available {
        return Err(Error::Truncated {
            declared: len,
            available,
        });
    }
    let payload = bytes[FRAME_HEADER_LEN..FRAME_HEADER_LEN + len].to_vec();
    Ok((WireMessage { kind, payload }, FRAME_HEADER_LEN + len))
}

/// Decode exactly one frame; trailing bytes are an error.
pub fn decode_message(bytes: &[u8]) -> Result<WireMessage> {
    let (msg, used) = decode_prefix(bytes)?;
    if used != bytes.len() {
        return Err(Error::TrailingBytes(bytes.len() - used));
    }
    Ok(msg)
}

pub fn write_frame(w: &mut impl Write, msg: &WireMessage) -> Result<()> {
    w.write_all(&encode_message(msg))?;
    w.flush()?;
    Ok(())
}

pub fn read_frame(r: &mut impl Read) -> Result<WireMessage> {
    let mut header = [0u8; FRAME_HEADER_LEN];
    r.read_exact(&mut header)?;
    let kind = MessageType::from_tag(header[0])?;
    let len = u32::from_be_bytes([header[1], header[2], header[3], header[4]]) as usize;
    if len > MAX_PAYLOAD {
        return Err(Error::Malformed(format!("frame of {len} bytes exceeds limit")));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload)?;
    Ok(WireMessage { kind, payload })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum SchemeId {
    Stern = 0x01,
    Cve = 0x02,
}

impl SchemeId {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0x01 => Ok(SchemeId::Stern),
            0x02 => Ok(SchemeId::Cve),
            other => Err(Error::Malformed(format!("unknown scheme id {other:#04x}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeId::Stern => "stern",
            SchemeId::Cve => "cve",
        }
    }

    pub fn passes(&self) -> &'static [MessageType] {
        match self {
            SchemeId::Stern => &[
                MessageType::S1Commit,
                MessageType::S1Challenge,
                MessageType::S1Response,
            ],
            SchemeId::Cve => &[
                MessageType::S2Commit,
                MessageType::S2Alpha,
                MessageType::S2Beta,
                MessageType::S2Challenge,
                MessageType::S2Response,
            ],
        }
    }
}

impl std::str::FromStr for SchemeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stern" => Ok(SchemeId::Stern),
            "cve" => Ok(SchemeId::Cve),
            other => Err(Error::InvalidParams(format!("unknown scheme '{other}'"))),
        }
    }
}

pub fn encode_params_block(scheme: SchemeId, p: &Params) -> Vec<u8> {
    let mut out = Vec::with_capacity(PARAMS_BLOCK_LEN);
    out.push(scheme as u8);
    out.extend_from_slice(&(p.n as u32).to_be_bytes());
    out.extend_from_slice(&(p.m as u32).to_be_bytes());
    out.extend_from_slice(&p.q.to_be_bytes());
    out.extend_from_slice(&p.sigma.to_bits().to_be_bytes());
    out.extend_from_slice(&p.rounds.to_be_bytes());
    out.extend_from_slice(&p.seed_len.to_be_bytes());
    out.extend_from_slice(&p.com_len.to_be_bytes());
    out
}

pub fn decode_params_block(b: &[u8]) -> Result<(SchemeId, Params)> {
    if b.len() != PARAMS_BLOCK_LEN {
        return Err(Error::Malformed(format!(
            "params block of {} bytes, expected {PARAMS_BLOCK_LEN}",
            b.len()
        )));
    }
    let mut r = Reader::new(b);
    let scheme = SchemeId::from_byte(r.u8()?)?;
    let params = Params {
        n: r.u32()? as usize,
        m: r.u32()? as usize,
        q: r.u16()?,
        sigma: f64::from_bits(r.u64()?),
        rounds: r.u32()?,
        seed_len: r.u16()?,
        com_len: r.u16()?,
    };
    params.validate()?;
    Ok((scheme, params))
}

pub fn write_file_header(out: &mut Vec<u8>, scheme: SchemeId, params: &Params) {
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&encode_params_block(scheme, params));
}

/// Parse the common header; returns the remainder of the file.
pub fn read_file_header(bytes: &[u8]) -> Result<(SchemeId, Params, &[u8])> {
    if bytes.len() < 5 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(Error::Version(bytes[4]));
    }
    let end = 5 + PARAMS_BLOCK_LEN;
    if bytes.len() < end {
        return Err(Error::Malformed("file header truncated".into()));
    }
    let (scheme, params) = decode_params_block(&bytes[5..end])?;
    Ok((scheme, params, &bytes[end..]))
}

/// Cursor over a payload; every read failure is `Malformed`.
pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < len {
            return Err(Error::Malformed(format!(
                "payload too short: need {len} more bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn seed(&mut self, p: &Params) -> Result<Seed> {
        Ok(Seed::new(self.take(p.seed_bytes())?.to_vec()))
    }

    pub(crate) fn digest(&mut self, p: &Params) -> Result<Commitment> {
        Ok(Commitment::from_bytes(self.take(p.com_bytes())?.to_vec()))
    }

    pub(crate) fn vector(&mut self, p: &Params, len: usize) -> Result<FqVector> {
        FqVector::from_bytes(p.q, len, self.take(2 * len)?)
    }

    pub(crate) fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Malformed(format!(
                "{} unexpected trailing payload bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn seeds(out: &mut Vec<u8>, seeds: &[&Seed]) {
    for s in seeds {
        out.extend_from_slice(s.as_bytes());
    }
}

/// Payload codecs for each protocol message.
pub mod payload {
    use super::*;

    pub fn stern_commit(c: &SternCommitments) -> Vec<u8> {
        [c.c1.as_bytes(), c.c2.as_bytes(), c.c3.as_bytes()].concat()
    }

    pub fn decode_stern_commit(p: &Params, b: &[u8]) -> Result<SternCommitments> {
        let mut r = Reader::new(b);
        let c = SternCommitments {
            c1: r.digest(p)?,
            c2: r.digest(p)?,
            c3: r.digest(p)?,
        };
        r.finish()?;
        Ok(c)
    }

    pub fn challenge(ch: u8) -> Vec<u8> {
        vec![ch]
    }

    pub fn decode_challenge(b: &[u8], max: u8) -> Result<u8> {
        match b {
            [ch] if (1..=max).contains(ch) => Ok(*ch),
            _ => Err(Error::Malformed(format!("bad challenge payload {b:?}"))),
        }
    }

    pub fn stern_response(resp: &SternResponse) -> Vec<u8> {
        let mut out = vec![resp.challenge()];
        match resp {
            SternResponse::One {
                r1,
                r2,
                v,
                seed_gamma,
                seed_perm,
            } => {
                seeds(&mut out, &[r1, r2, seed_gamma, seed_perm]);
                v.write_bytes(&mut out);
            }
            SternResponse::Two { r2, r3, w, z } => {
                seeds(&mut out, &[r2, r3]);
                w.write_bytes(&mut out);
                z.write_bytes(&mut out);
            }
            SternResponse::Three {
                r1,
                r3,
                seed_gamma,
                seed_perm,
                seed_u,
            } => seeds(&mut out, &[r1, r3, seed_gamma, seed_perm, seed_u]),
        }
        out
    }

    pub fn decode_stern_response(p: &Params, b: &[u8]) -> Result<SternResponse> {
        let mut r = Reader::new(b);
        let resp = match r.u8()? {
            1 => SternResponse::One {
                r1: r.seed(p)?,
                r2: r.seed(p)?,
                seed_gamma: r.seed(p)?,
                seed_perm: r.seed(p)?,
                v: r.vector(p, p.m)?,
            },
            2 => SternResponse::Two {
                r2: r.seed(p)?,
                r3: r.seed(p)?,
                w: r.vector(p, p.n)?,
                z: r.vector(p, p.n)?,
            },
            3 => SternResponse::Three {
                r1: r.seed(p)?,
                r3: r.seed(p)?,
                seed_gamma: r.seed(p)?,
                seed_perm: r.seed(p)?,
                seed_u: r.seed(p)?,
            },
            other => return Err(Error::Malformed(format!("response tag {other}"))),
        };
        r.finish()?;
        Ok(resp)
    }

    pub fn cve_commit(c: &CveCommitments) -> Vec<u8> {
        [c.c1.as_bytes(), c.c2.as_bytes()].concat()
    }

    pub fn decode_cve_commit(p: &Params, b: &[u8]) -> Result<CveCommitments> {
        let mut r = Reader::new(b);
        let c = CveCommitments {
            c1: r.digest(p)?,
            c2: r.digest(p)?,
        };
        r.finish()?;
        Ok(c)
    }

    pub fn alpha(alpha: u16) -> Vec<u8> {
        alpha.to_le_bytes().to_vec()
    }

    pub fn decode_alpha(p: &Params, b: &[u8]) -> Result<u16> {
        match b {
            [lo, hi] => {
                let a = u16::from_le_bytes([*lo, *hi]);
                if a < p.q {
                    Ok(a)
                } else {
                    Err(Error::Malformed(format!("blind {a} not below q")))
                }
            }
            _ => Err(Error::Malformed("blind must be 2 bytes".into())),
        }
    }

    pub fn beta(beta: &FqVector) -> Vec<u8> {
        beta.to_bytes()
    }

    pub fn decode_beta(p: &Params, b: &[u8]) -> Result<FqVector> {
        let mut r = Reader::new(b);
        let v = r.vector(p, p.n)?;
        r.finish()?;
        Ok(v)
    }

    pub fn cve_response(resp: &CveResponse) -> Vec<u8> {
        let mut out = vec![resp.challenge()];
        match resp {
            CveResponse::One {
                r1,
                seed_gamma,
                seed_perm,
            } => seeds(&mut out, &[r1, seed_gamma, seed_perm]),
            CveResponse::Two { r2, z } => {
                seeds(&mut out, &[r2]);
                z.write_bytes(&mut out);
            }
        }
        out
    }

    pub fn decode_cve_response(p: &Params, b: &[u8]) -> Result<CveResponse> {
        let mut r = Reader::new(b);
        let resp = match r.u8()? {
            1 => CveResponse::One {
                r1: r.seed(p)?,
                seed_gamma: r.seed(p)?,
                seed_perm: r.seed(p)?,
            },
            2 => CveResponse::Two {
                r2: r.seed(p)?,
                z: r.vector(p, p.n)?,
            },
            other => return Err(Error::Malformed(format!("response tag {other}"))),
        };
        r.finish()?;
        Ok(resp)
    }

    pub fn verdict(v: &Verdict) -> Vec<u8> {
        vec![v.code()]
    }

    pub fn decode_verdict(b: &[u8]) -> Result<Verdict> {
        match b {
            [c] => Verdict::from_code(*c)
                .ok_or_else(|| Error::Malformed(format!("verdict code {c}"))),
            _ => Err(Error::Malformed("verdict must be 1 byte".into())),
        }
    }

    /// Session announcement sent by the verifier: params block ∥ rounds.
    pub fn session_hello(scheme: SchemeId, p: &Params, rounds: u32) -> Vec<u8> {
        let mut out = encode_params_block(scheme, p);
        out.extend_from_slice(&rounds.to_be_bytes());
        out
    }

    pub fn decode_session_hello(b: &[u8]) -> Result<(SchemeId, Params, u32)> {
        if b.len() != PARAMS_BLOCK_LEN + 4 {
            return Err(Error::Malformed("bad session hello length".into()));
        }
        let (scheme, params) = decode_params_block(&b[..PARAMS_BLOCK_LEN])?;
        let rounds = u32::from_be_bytes(b[PARAMS_BLOCK_LEN..].try_into().expect("4 bytes"));
        Ok((scheme, params, rounds))
    }
}

/// The ordered messages of one protocol round and the verifier's verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTranscript {
    pub scheme: SchemeId,
    pub messages: Vec<WireMessage>,
    pub verdict: Verdict,
}

impl RoundTranscript {
    /// Checks that message kinds follow the scheme's pass structure. A
    /// rejected round may stop early, so it only needs a prefix of it.
    pub fn new(scheme: SchemeId, messages: Vec<WireMessage>, verdict: Verdict) -> Result<Self> {
        let kinds: Vec<_> = messages.iter().map(|m| m.kind).collect();
        let passes = scheme.passes();
        let ok = if verdict.is_accept() {
            kinds == passes
        } else {
            passes.starts_with(&kinds)
        };
        if !ok {
            return Err(Error::Malformed(format!(
                "{} round has message sequence {kinds:?}",
                scheme.name()
            )));
        }
        Ok(RoundTranscript {
            scheme,
            messages,
            verdict,
        })
    }

    pub fn from_stern(t: &SternTranscript, verdict: Verdict) -> Self {
        RoundTranscript {
            scheme: SchemeId::Stern,
            messages: vec![
                WireMessage::new(MessageType::S1Commit, payload::stern_commit(&t.commitments)),
                WireMessage::new(MessageType::S1Challenge, payload::challenge(t.challenge)),
                WireMessage::new(MessageType::S1Response, payload::stern_response(&t.response)),
            ],
            verdict,
        }
    }

    pub fn from_cve(t: &CveTranscript, verdict: Verdict) -> Self {
        RoundTranscript {
            scheme: SchemeId::Cve,
            messages: vec![
                WireMessage::new(MessageType::S2Commit, payload::cve_commit(&t.commitments)),
                WireMessage::new(MessageType::S2Alpha, payload::alpha(t.alpha)),
                WireMessage::new(MessageType::S2Beta, payload::beta(&t.beta)),
                WireMessage::new(MessageType::S2Challenge, payload::challenge(t.challenge)),
                WireMessage::new(MessageType::S2Response, payload::cve_response(&t.response)),
            ],
            verdict,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.messages.len() == self.scheme.passes().len()
    }

    pub fn to_stern(&self, p: &Params) -> Result<SternTranscript> {
        if self.scheme != SchemeId::Stern || self.messages.len() != 3 {
            return Err(Error::Malformed("not a stern round".into()));
        }
        Ok(SternTranscript {
            commitments: payload::decode_stern_commit(p, &self.messages[0].payload)?,
            challenge: payload::decode_challenge(&self.messages[1].payload, 3)?,
            response: payload::decode_stern_response(p, &self.messages[2].payload)?,
        })
    }

    pub fn to_cve(&self, p: &Params) -> Result<CveTranscript> {
        if self.scheme != SchemeId::Cve || self.messages.len() != 5 {
            return Err(Error::Malformed("not a cve round".into()));
        }
        Ok(CveTranscript {
            commitments: payload::decode_cve_commit(p, &self.messages[0].payload)?,
            alpha: payload::decode_alpha(p, &self.messages[1].payload)?,
            beta: payload::decode_beta(p, &self.messages[2].payload)?,
            challenge: payload::decode_challenge(&self.messages[3].payload, 2)?,
            response: payload::decode_cve_response(p, &self.messages[4].payload)?,
        })
    }

    /// Total payload bits of the round (frame headers excluded).
    pub fn payload_bits(&self) -> usize {
        self.messages.iter().map(|m| 8 * m.payload.len()).sum()
    }
}

/// Serialized transcript file: header, then each round's frames closed by a
/// RESULT frame carrying its verdict.
pub fn transcripts_to_bytes(
    scheme: SchemeId,
    params: &Params,
    rounds: &[RoundTranscript],
) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_file_header(&mut out, scheme, params);
    for r in rounds {
        if r.scheme != scheme {
            return Err(Error::Precondition("round scheme differs from file scheme".into()));
        }
        for m in &r.messages {
            encode_into(m, &mut out);
        }
        encode_into(
            &WireMessage::new(MessageType::Result, payload::verdict(&r.verdict)),
            &mut out,
        );
    }
    Ok(out)
}

pub fn transcripts_from_bytes(bytes: &[u8]) -> Result<(SchemeId, Params, Vec<RoundTranscript>)> {
    let (scheme, params, mut rest) = read_file_header(bytes)?;
    let mut rounds = Vec::new();
    let mut pending = Vec::new();
    while !rest.is_empty() {
        let (msg, used) = decode_prefix(rest)?;
        rest = &rest[used..];
        if msg.kind == MessageType::Result {
            let verdict = payload::decode_verdict(&msg.payload)?;
            rounds.push(RoundTranscript::new(scheme, std::mem::take(&mut pending), verdict)?);
        } else {
            pending.push(msg);
        }
    }
    if !pending.is_empty() {
        return Err(Error::Malformed("transcript ends inside a round".into()));
    }
    Ok((scheme, params, rounds))
}

pub fn save_transcripts(
    path: impl AsRef<Path>,
    scheme: SchemeId,
    params: &Params,
    rounds: &[RoundTranscript],
) -> Result<()> {
    std::fs::write(path, transcripts_to_bytes(scheme, params, rounds)?)?;
    Ok(())
}

pub fn load_transcripts(path: impl AsRef<Path>) -> Result<(SchemeId, Params, Vec<RoundTranscript>)> {
    transcripts_from_bytes(&std::fs::read(path)?)
}
