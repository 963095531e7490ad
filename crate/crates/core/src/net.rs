//! TCP transport: one connection per identification session.

use std::io::Write;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Mutex;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::keyfile::KeyFile;
use crate::prg::Seed;
use crate::session::{Prover, Verifier};
use crate::verdict::{RejectReason, Verdict};
use crate::wire::{encode_message, read_frame, RoundTranscript, WireMessage};

/// Per-message wait before the session is failed.
pub const IO_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub rounds: u32,
    /// Sessions to accept before returning; 0 serves forever.
    pub sessions: usize,
    pub timeout: Duration,
    /// Fixed verifier coins for reproducible runs; fresh OS randomness if unset.
    pub coins: Option<Seed>,
}

impl ServeConfig {
    pub fn new(rounds: u32) -> Self {
        ServeConfig {
            rounds,
            sessions: 1,
            timeout: IO_TIMEOUT,
            coins: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionReport {
    pub peer: Option<SocketAddr>,
    pub verdict: Verdict,
    pub transcripts: Vec<RoundTranscript>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProverReport {
    pub verdict: Verdict,
    pub rounds_completed: u32,
    pub rounds_announced: u32,
}

fn send_all(stream: &mut TcpStream, msgs: &[WireMessage]) -> Result<()> {
    let buf: Vec<u8> = msgs.iter().flat_map(encode_message).collect();
    stream.write_all(&buf)?;
    stream.flush()?;
    Ok(())
}

/// Runs the verifier side of one session on an accepted connection.
pub fn serve_connection(
    mut stream: TcpStream,
    kf: &KeyFile,
    rounds: u32,
    coins: &Seed,
    timeout: Duration,
) -> Result<SessionReport> {
    let peer = stream.peer_addr().ok();
    stream.set_read_timeout(Some(timeout))?;
    stream.set_write_timeout(Some(timeout))?;
    stream.set_nodelay(true)?;
    let mut v = Verifier::from_keyfile(&kf.public_only(), rounds, coins)?;
    send_all(&mut stream, &[v.hello()])?;
    while !v.is_finished() {
        let out = match read_frame(&mut stream) {
            Ok(msg) => v.receive(msg),
            Err(Error::Timeout) => {
                log::info!("{peer:?}: no message within {timeout:?}");
                v.abort(RejectReason::Timeout)
            }
            Err(e @ (Error::UnknownTag(_) | Error::Malformed(_))) => {
                log::info!("{peer:?}: unreadable frame: {e}");
                v.abort(RejectReason::Malformed)
            }
            Err(e) => {
                log::info!("{peer:?}: connection lost: {e}");
                v.abort(RejectReason::Timeout);
                break;
            }
        };
        if let Err(e) = send_all(&mut stream, &out) {
            log::debug!("{peer:?}: could not deliver verdict: {e}");
        }
    }
    let verdict = v.verdict().expect("finished verifier has a verdict");
    log::info!(
        "{peer:?}: {verdict} after {} of {rounds} rounds",
        v.rounds_completed()
    );
    Ok(SessionReport {
        peer,
        verdict,
        transcripts: v.transcripts().to_vec(),
    })
}

/// Accepts sessions and runs each on its own thread. `on_report` sees each
/// session as it finishes; reports are returned in completion order.
pub fn serve(
    listener: &TcpListener,
    kf: &KeyFile,
    cfg: &ServeConfig,
    on_report: impl Fn(&SessionReport) + Sync,
) -> Result<Vec<SessionReport>> {
    if kf.has_secret() {
        return Err(Error::Precondition("verifier must not hold secret key material".into()));
    }
    let reports = Mutex::new(Vec::new());
    std::thread::scope(|scope| -> Result<()> {
        let mut accepted = 0usize;
        while cfg.sessions == 0 || accepted < cfg.sessions {
            let (stream, addr) = listener.accept()?;
            log::debug!("accepted {addr}");
            let coins = match &cfg.coins {
                Some(c) => c.derive_indexed(b"session", accepted as u64, 32),
                None => Seed::random(32),
            };
            accepted += 1;
            let (reports, on_report) = (&reports, &on_report);
            scope.spawn(move || {
                match serve_connection(stream, kf, cfg.rounds, &coins, cfg.timeout) {
                    Ok(r) => {
                        on_report(&r);
                        reports.lock().expect("report lock").push(r);
                    }
                    Err(e) => log::warn!("session with {addr} failed: {e}"),
                }
            });
        }
        Ok(())
    })?;
    Ok(reports.into_inner().expect("report lock"))
}

/// Connects to a verifier and proves knowledge of the key's secret.
pub fn prove(addr: &str, kf: &KeyFile, master: Seed, timeout: Duration) -> Result<ProverReport> {
    let target = addr
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| Error::Io(format!("cannot resolve {addr}")))?;
    let mut stream = TcpStream::connect_timeout(&target, timeout)?;
    stream.set_read_timeout(Some(timeout))?;
    stream.set_write_timeout(Some(timeout))?;
    stream.set_nodelay(true)?;
    let mut p = Prover::new(kf, master)?;
    while p.verdict().is_none() {
        let msg = read_frame(&mut stream)?;
        let out = p.receive(msg)?;
        send_all(&mut stream, &out)?;
    }
    Ok(ProverReport {
        verdict: p.verdict().expect("loop exits on verdict"),
        rounds_completed: p.rounds_completed(),
        rounds_announced: p.rounds_announced(),
    })
}
