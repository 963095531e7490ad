//! LWE-based zero-knowledge identification.
//!
//! Two interactive schemes over the LWE relation `b = A·s + e`:
//!
//! * [`stern`]: three passes, challenges {1, 2, 3}, soundness error 2/3 per round;
//! * [`cve`]: five passes with a verifier-chosen blind α, challenges {1, 2},
//!   soundness error (q+1)/2q per round.
//!
//! Both come with knowledge extractors, rewinding simulators and cheating
//! provers. [`wire`] fixes the byte-level framing and the communication-cost
//! model, [`session`] and [`net`] run the protocols over TCP, and [`harness`]
//! holds the statistical completeness/soundness/zero-knowledge checks.

pub mod commit;
pub mod cost;
pub mod error;
pub mod field;
pub mod gaussian;
pub mod harness;
pub mod isometry;
pub mod cve;
pub mod keyfile;
pub mod keys;
pub mod net;
pub mod oracle;
pub mod params;
pub mod prg;
pub mod session;
pub mod stern;
pub mod verdict;
pub mod wire;

pub use error::{Error, Result};
pub use field::{FqMatrix, FqVector};
pub use params::Params;
pub use prg::Seed;
pub use verdict::{RejectReason, Verdict};
