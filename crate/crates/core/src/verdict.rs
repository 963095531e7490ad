use std::fmt;

/// Why a verifier rejected a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// Payload could not be parsed or does not match the challenge.
    Malformed,
    /// A commitment did not open to the recomputed value.
    Commitment,
    /// The revealed transformed error has the wrong Hamming weight.
    Weight,
    /// No answer arrived in time.
    Timeout,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::Malformed => "malformed",
            RejectReason::Commitment => "commitment",
            RejectReason::Weight => "weight",
            RejectReason::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    /// One-byte code used in RESULT frames.
    pub fn code(&self) -> u8 {
        match self {
            Verdict::Accept => 0x00,
            Verdict::Reject(RejectReason::Malformed) => 0x01,
            Verdict::Reject(RejectReason::Commitment) => 0x02,
            Verdict::Reject(RejectReason::Weight) => 0x03,
            Verdict::Reject(RejectReason::Timeout) => 0x04,
        }
    }

    pub fn from_code(code: u8) -> Option<Verdict> {
        Some(match code {
            0x00 => Verdict::Accept,
            0x01 => Verdict::Reject(RejectReason::Malformed),
            0x02 => Verdict::Reject(RejectReason::Commitment),
            0x03 => Verdict::Reject(RejectReason::Weight),
            0x04 => Verdict::Reject(RejectReason::Timeout),
            _ => return None,
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Accept => f.write_str("accept"),
            Verdict::Reject(r) => write!(f, "reject({})", r.as_str()),
        }
    }
}
