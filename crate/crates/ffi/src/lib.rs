//! C ABI over the `lweid` crate.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every call returns an [`LweidStatus`]; on failure a message for the
//! calling thread is available from [`lweid_last_error`].
//!
//! Byte outputs use a two-call pattern: pass `buf = NULL` (or a short
//! buffer) to learn the required size through `written`, which returns
//! `LWEID_STATUS_BUFFER_TOO_SMALL`, then call again.
//!
//! Sessions are driven frame by frame: feed each received frame to
//! `*_receive`, then drain the frames to send with `*_take_output`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lweid::cost::{per_round_error, rounds_for_target};
use lweid::harness::keygen;
use lweid::keyfile::KeyFile;
use lweid::session::{Prover, Verifier};
use lweid::wire::{decode_prefix, encode_message, SchemeId, WireMessage};
use lweid::{Error, Params, RejectReason, Seed};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LweidStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    Malformed = 3,
    BufferTooSmall = 4,
    WrongKeyKind = 5,
    Protocol = 6,
    Internal = 99,
}

pub const LWEID_SCHEME_STERN: u8 = 1;
pub const LWEID_SCHEME_CVE: u8 = 2;

/// Verdict code reported before a session has finished.
pub const LWEID_VERDICT_PENDING: i32 = -1;

/// A key file: public key, optionally with the secret.
pub struct LweidKey(KeyFile);

pub struct LweidVerifier {
    inner: Verifier,
    out: Vec<u8>,
}

pub struct LweidProver {
    inner: Prover,
    out: Vec<u8>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> LweidStatus {
    match e {
        Error::InvalidParams(_) => LweidStatus::InvalidParams,
        Error::Malformed(_)
        | Error::UnknownTag(_)
        | Error::Truncated { .. }
        | Error::TrailingBytes(_)
        | Error::BadMagic
        | Error::Version(_) => LweidStatus::Malformed,
        Error::Protocol(_) => LweidStatus::Protocol,
        Error::Precondition(_) => LweidStatus::WrongKeyKind,
        _ => LweidStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), LweidStatus>) -> LweidStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LweidStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            LweidStatus::Internal
        }
    }
}

fn fail(e: Error) -> LweidStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn bytes<'a>(p: *const u8, len: usize) -> Result<&'a [u8], LweidStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        set_error("null buffer with nonzero length");
        return Err(LweidStatus::NullPointer);
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *mut T) -> Result<&'a mut T, LweidStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null handle");
        LweidStatus::NullPointer
    })
}

unsafe fn copy_out(src: &[u8], buf: *mut u8, cap: usize, written: *mut usize) -> Result<(), LweidStatus> {
    if written.is_null() {
        set_error("null length pointer");
        return Err(LweidStatus::NullPointer);
    }
    *written = src.len();
    if buf.is_null() || cap < src.len() {
        set_error(format!("need {} bytes", src.len()));
        return Err(LweidStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), LweidStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(LweidStatus::NullPointer);
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

fn scheme_id(s: u8) -> Result<SchemeId, LweidStatus> {
    SchemeId::from_byte(s).map_err(|e| {
        set_error(e.to_string());
        LweidStatus::InvalidParams
    })
}

/// Splits a buffer into complete frames.
fn frames(mut data: &[u8]) -> lweid::Result<Vec<WireMessage>> {
    let mut out = Vec::new();
    while !data.is_empty() {
        let (msg, used) = decode_prefix(data)?;
        out.push(msg);
        data = &data[used..];
    }
    Ok(out)
}

/// Message for the last failure on this thread. Valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn lweid_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Generates a key pair from a master seed. Seed and commitment lengths are
/// in bits; `rounds` is stored in the key as the session default.
///
/// # Safety
/// `seed` must point to `seed_len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lweid_keygen(
    scheme: u8,
    n: usize,
    m: usize,
    q: u16,
    sigma: f64,
    rounds: u32,
    seed_bits: u16,
    com_bits: u16,
    seed: *const u8,
    seed_len: usize,
    out: *mut *mut LweidKey,
) -> LweidStatus {
    guard(|| {
        let master = Seed::new(bytes(seed, seed_len)?.to_vec());
        let params = Params::new(n, m, q)
            .with_sigma(sigma)
            .with_rounds(rounds)
            .with_seed_len(seed_bits)
            .with_com_len(com_bits);
        let kf = keygen(scheme_id(scheme)?, &params, &master).map_err(fail)?;
        put(out, LweidKey(kf))
    })
}

/// Parses a key file image.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lweid_key_load(data: *const u8, len: usize, out: *mut *mut LweidKey) -> LweidStatus {
    guard(|| {
        let kf = KeyFile::from_bytes(bytes(data, len)?).map_err(fail)?;
        put(out, LweidKey(kf))
    })
}

/// Serializes a key in the key file format.
///
/// # Safety
/// `key` must be a live handle; `buf` must hold `cap` bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn lweid_key_serialize(
    key: *mut LweidKey,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> LweidStatus {
    guard(|| {
        let k = handle(key)?;
        copy_out(&k.0.to_bytes(), buf, cap, written)
    })
}

/// New handle holding only the public part of `key`.
///
/// # Safety
/// `key` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lweid_key_public(key: *mut LweidKey, out: *mut *mut LweidKey) -> LweidStatus {
    guard(|| {
        let k = handle(key)?;
        put(out, LweidKey(k.0.public_only()))
    })
}

/// 1 if the key carries secret material, 0 if not, -1 for a null handle.
///
/// # Safety
/// `key` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lweid_key_has_secret(key: *const LweidKey) -> i32 {
    match key.as_ref() {
        Some(k) => k.0.has_secret() as i32,
        None => -1,
    }
}

/// # Safety
/// `key` must be a handle from this library or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn lweid_key_free(key: *mut LweidKey) {
    if !key.is_null() {
        drop(Box::from_raw(key));
    }
}

/// Verifier for `rounds` rounds (0: the key's default). Refuses keys that
/// carry a secret. The session hello is queued as the first output.
///
/// # Safety
/// `key` must be a live handle; `coins` must point to `coins_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lweid_verifier_new(
    key: *mut LweidKey,
    rounds: u32,
    coins: *const u8,
    coins_len: usize,
    out: *mut *mut LweidVerifier,
) -> LweidStatus {
    guard(|| {
        let k = handle(key)?;
        if k.0.has_secret() {
            set_error("verifier must be given a public-only key");
            return Err(LweidStatus::WrongKeyKind);
        }
        let coins = Seed::new(bytes(coins, coins_len)?.to_vec());
        let rounds = if rounds == 0 { k.0.params.rounds } else { rounds };
        let v = Verifier::from_keyfile(&k.0, rounds, &coins).map_err(fail)?;
        let out_bytes = encode_message(&v.hello());
        put(out, LweidVerifier { inner: v, out: out_bytes })
    })
}

/// Feeds one or more complete frames from the prover. Unreadable input ends
/// the session with a malformed verdict rather than failing the call.
///
/// # Safety
/// `v` must be a live handle; `frame` must point to `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lweid_verifier_receive(v: *mut LweidVerifier, frame: *const u8, len: usize) -> LweidStatus {
    guard(|| {
        let v = handle(v)?;
        match frames(bytes(frame, len)?) {
            Ok(msgs) => {
                for msg in msgs {
                    let replies = v.inner.receive(msg);
                    append(&mut v.out, &replies);
                }
            }
            Err(_) => {
                let replies = v.inner.abort(RejectReason::Malformed);
                append(&mut v.out, &replies);
            }
        }
        Ok(())
    })
}

/// Ends the session because the prover went silent.
///
/// # Safety
/// `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lweid_verifier_timeout(v: *mut LweidVerifier) -> LweidStatus {
    guard(|| {
        let v = handle(v)?;
        let replies = v.inner.abort(RejectReason::Timeout);
        append(&mut v.out, &replies);
        Ok(())
    })
}

/// Bytes queued for the prover.
///
/// # Safety
/// `v` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lweid_verifier_output_len(v: *const LweidVerifier) -> usize {
    v.as_ref().map_or(0, |v| v.out.len())
}

/// Moves the queued frames into `buf`; the queue is emptied on success.
///
/// # Safety
/// `v` must be a live handle; `buf` must hold `cap` bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn lweid_verifier_take_output(
    v: *mut LweidVerifier,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> LweidStatus {
    guard(|| {
        let v = handle(v)?;
        copy_out(&v.out, buf, cap, written)?;
        v.out.clear();
        Ok(())
    })
}

/// Session verdict code (0 accept, 1 malformed, 2 commitment, 3 weight,
/// 4 timeout) or `LWEID_VERDICT_PENDING`.
///
/// # Safety
/// `v` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lweid_verifier_verdict(v: *const LweidVerifier) -> i32 {
    v.as_ref()
        .and_then(|v| v.inner.verdict())
        .map_or(LWEID_VERDICT_PENDING, |x| x.code() as i32)
}

/// # Safety
/// `v` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn lweid_verifier_free(v: *mut LweidVerifier) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Prover for a secret-bearing key. `master` seeds its randomness.
///
/// # Safety
/// `key` must be a live handle; `master` must point to `master_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lweid_prover_new(
    key: *mut LweidKey,
    master: *const u8,
    master_len: usize,
    out: *mut *mut LweidProver,
) -> LweidStatus {
    guard(|| {
        let k = handle(key)?;
        let p = Prover::new(&k.0, Seed::new(bytes(master, master_len)?.to_vec())).map_err(fail)?;
        put(out, LweidProver { inner: p, out: Vec::new() })
    })
}

/// Feeds one or more complete frames from the verifier.
///
/// # Safety
/// `p` must be a live handle; `frame` must point to `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lweid_prover_receive(p: *mut LweidProver, frame: *const u8, len: usize) -> LweidStatus {
    guard(|| {
        let p = handle(p)?;
        for msg in frames(bytes(frame, len)?).map_err(fail)? {
            let replies = p.inner.receive(msg).map_err(fail)?;
            append(&mut p.out, &replies);
        }
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lweid_prover_output_len(p: *const LweidProver) -> usize {
    p.as_ref().map_or(0, |p| p.out.len())
}

/// # Safety
/// `p` must be a live handle; `buf` must hold `cap` bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn lweid_prover_take_output(
    p: *mut LweidProver,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> LweidStatus {
    guard(|| {
        let p = handle(p)?;
        copy_out(&p.out, buf, cap, written)?;
        p.out.clear();
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn lweid_prover_verdict(p: *const LweidProver) -> i32 {
    p.as_ref()
        .and_then(|p| p.inner.verdict())
        .map_or(LWEID_VERDICT_PENDING, |x| x.code() as i32)
}

/// # Safety
/// `p` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn lweid_prover_free(p: *mut LweidProver) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Smallest r with per-round error^r ≤ `target`, decided exactly.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lweid_rounds_for_target(
    scheme: u8,
    q: u16,
    target: f64,
    out: *mut u32,
) -> LweidStatus {
    guard(|| {
        if out.is_null() {
            return Err(LweidStatus::NullPointer);
        }
        let t = num_rational::BigRational::from_float(target).ok_or_else(|| {
            set_error("target is not finite");
            LweidStatus::InvalidParams
        })?;
        *out = rounds_for_target(scheme_id(scheme)?, q, &t).map_err(fail)?;
        Ok(())
    })
}

/// Per-round soundness error as a double; NaN for an unknown scheme.
#[no_mangle]
pub extern "C" fn lweid_per_round_error(scheme: u8, q: u16) -> f64 {
    use num_traits::ToPrimitive;
    match SchemeId::from_byte(scheme) {
        Ok(id) => per_round_error(id, q).to_f64().unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    }
}

fn append(out: &mut Vec<u8>, msgs: &[WireMessage]) {
    for m in msgs {
        out.extend_from_slice(&encode_message(m));
    }
}
