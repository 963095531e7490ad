//! `lweid`: key generation, TCP identification, benches and simulations.
//!
//! Exit codes: 0 success, 1 protocol failure, 2 usage, 3 transport.

use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use lweid::cost::{cost_model, display_bits, parse_target, rounds_for_target, CostMode};
use lweid::harness::{self, keygen};
use lweid::keyfile::KeyFile;
use lweid::net::{self, ServeConfig};
use lweid::oracle::SimOptions;
use lweid::session::replay;
use lweid::wire::{load_transcripts, save_transcripts, RoundTranscript, SchemeId};
use lweid::{Error, Params, Seed, Verdict};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TRANSPORT: u8 = 3;

#[derive(Parser)]
#[command(name = "lweid", version, about = "LWE-based zero-knowledge identification")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair and write PATH.pk and PATH.sk.
    Keygen(KeygenArgs),
    /// Act as verifier: accept provers and run the identification.
    Serve(ServeArgs),
    /// Act as prover against a listening verifier.
    Prove(ProveArgs),
    /// Rounds needed for a soundness target, and per-round costs.
    Bench(BenchArgs),
    /// Write simulator transcripts (produced without the secret) to a file.
    Simulate(SimulateArgs),
    /// Re-run the verifier checks over a captured transcript.
    Replay(ReplayArgs),
    /// Compare real and simulated transcripts with chi-square tests.
    ZkTest(ZkTestArgs),
    /// Empirical soundness of the cheating prover.
    Soundness(SoundnessArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 257)]
    q: u16,
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
    /// Seed length in bits.
    #[arg(long, default_value_t = 128)]
    seed_len: u16,
    /// Commitment digest length in bits.
    #[arg(long, default_value_t = 256)]
    com_len: u16,
}

impl ParamArgs {
    fn params(&self, rounds: u32) -> Params {
        Params::new(self.n, self.m, self.q)
            .with_sigma(self.sigma)
            .with_rounds(rounds)
            .with_seed_len(self.seed_len)
            .with_com_len(self.com_len)
    }
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long)]
    scheme: SchemeId,
    #[command(flatten)]
    params: ParamArgs,
    /// Default: smallest r reaching soundness 2^-16.
    #[arg(long)]
    rounds: Option<u32>,
    /// Master seed in hex; fresh randomness if omitted.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    pk: PathBuf,
    #[arg(long)]
    listen: String,
    /// Default: the rounds recorded in the key file.
    #[arg(long)]
    rounds: Option<u32>,
    /// Sessions to serve before exiting; 0 serves forever.
    #[arg(long, default_value_t = 1)]
    sessions: usize,
    /// Save each session's transcript here (suffixed .N when serving several).
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Seconds to wait for each prover message.
    #[arg(long, default_value_t = 10)]
    timeout: u64,
    /// Fixed verifier coins (hex) for reproducible runs.
    #[arg(long)]
    coins: Option<String>,
}

#[derive(Args)]
struct ProveArgs {
    #[arg(long)]
    sk: PathBuf,
    #[arg(long)]
    connect: String,
    /// Prover randomness in hex; fresh if omitted.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, default_value_t = 10)]
    timeout: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scheme: SchemeId,
    /// Target soundness L in (0, 1): `2^-16`, `1/65536` or `1.5e-5`.
    #[arg(long, allow_hyphen_values = true)]
    target_soundness: String,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scheme: SchemeId,
    #[arg(long)]
    rounds: usize,
    /// Public key to simulate for; a key is generated from the parameter
    /// flags and --seed if omitted.
    #[arg(long)]
    pk: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    seed: Option<String>,
    /// Nonce of the hash-oracle verifier.
    #[arg(long, default_value = "lweid")]
    nonce: String,
    /// Reuse one permutation for every round (broken negative control).
    #[arg(long)]
    fixed_permutation: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    pk: PathBuf,
    #[arg(long)]
    transcript: PathBuf,
    /// Rounds the session was supposed to run; fewer recorded is a failure.
    #[arg(long)]
    rounds: Option<u32>,
    /// Write the transcript again with the replayed verdicts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ZkTestArgs {
    #[arg(long)]
    sk: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    rounds: usize,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, default_value = "lweid")]
    nonce: String,
    /// Use the broken fixed-permutation simulator.
    #[arg(long)]
    fixed_permutation: bool,
    /// Write the CSV report here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Significance level for the pass/fail exit code.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
}

#[derive(Args)]
struct SoundnessArgs {
    #[arg(long)]
    scheme: SchemeId,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    rounds_per_trial: u32,
    #[arg(long)]
    seed: Option<String>,
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) => EXIT_USAGE,
            Error::Io(_) | Error::Timeout => EXIT_TRANSPORT,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

type CmdResult = Result<u8, Failure>;

fn seed_or_random(hex: &Option<String>) -> Result<Seed, Failure> {
    match hex {
        Some(h) => Seed::from_hex(h).map_err(|e| usage(format!("--seed: {e}"))),
        None => Ok(Seed::random(32)),
    }
}

/// Loading a file given on the command line: a missing or unreadable file
/// is a usage problem, not a transport one.
fn load_key(path: &Path, load: fn(&Path) -> lweid::Result<KeyFile>) -> Result<KeyFile, Failure> {
    load(path).map_err(|e| match e {
        Error::Io(m) => usage(format!("{}: {m}", path.display())),
        Error::Precondition(m) => usage(format!("{}: {m}", path.display())),
        other => Failure {
            code: EXIT_USAGE,
            msg: format!("{}: {other}", path.display()),
        },
    })
}

fn default_rounds(scheme: SchemeId, q: u16) -> u32 {
    let l = parse_target("2^-16").expect("constant target");
    rounds_for_target(scheme, q, &l).unwrap_or(1)
}

fn cmd_keygen(a: KeygenArgs) -> CmdResult {
    let rounds = a
        .rounds
        .unwrap_or_else(|| default_rounds(a.scheme, a.params.q));
    let params = a.params.params(rounds);
    params.validate()?;
    let master = seed_or_random(&a.seed)?;
    let kf = keygen(a.scheme, &params, &master)?;
    let pk_path = with_suffix(&a.out, "pk");
    let sk_path = with_suffix(&a.out, "sk");
    kf.public_only().save(&pk_path).map_err(|e| usage(e.to_string()))?;
    kf.save(&sk_path).map_err(|e| usage(e.to_string()))?;
    println!(
        "scheme={} n={} m={} q={} sigma={} rounds={} seed_len={} com_len={}",
        a.scheme.name(),
        params.n,
        params.m,
        params.q,
        params.sigma,
        params.rounds,
        params.seed_len,
        params.com_len
    );
    println!("p={}", kf.public.weight());
    println!("wrote {} and {}", pk_path.display(), sk_path.display());
    Ok(0)
}

fn with_suffix(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn verdict_line(v: &Verdict) -> String {
    match v {
        Verdict::Accept => "success".to_string(),
        Verdict::Reject(r) => format!("failure: {}", r.as_str()),
    }
}

fn cmd_serve(a: ServeArgs) -> CmdResult {
    let kf = load_key(&a.pk, |p| KeyFile::load_verifier(p))?;
    let mut cfg = ServeConfig::new(a.rounds.unwrap_or(kf.params.rounds));
    if cfg.rounds == 0 {
        return Err(usage("--rounds must be at least 1"));
    }
    cfg.sessions = a.sessions;
    cfg.timeout = Duration::from_secs(a.timeout.max(1));
    cfg.coins = match &a.coins {
        Some(h) => Some(Seed::from_hex(h).map_err(|e| usage(format!("--coins: {e}")))?),
        None => None,
    };
    let listener = TcpListener::bind(&a.listen).map_err(|e| Failure {
        code: EXIT_TRANSPORT,
        msg: format!("cannot listen on {}: {e}", a.listen),
    })?;
    log::info!("listening on {}", listener.local_addr().map_err(Error::from)?);
    let counter = std::sync::atomic::AtomicUsize::new(0);
    let reports = net::serve(&listener, &kf, &cfg, |r| {
        let idx = counter.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        println!("{}", verdict_line(&r.verdict));
        if let Some(path) = &a.transcript {
            let path = if cfg.sessions == 1 {
                path.clone()
            } else {
                with_suffix(path, &idx.to_string())
            };
            if let Err(e) = save_transcripts(&path, kf.scheme(), &kf.params, &r.transcripts) {
                log::error!("cannot save transcript {}: {e}", path.display());
            }
        }
    })?;
    Ok(if reports.iter().all(|r| r.verdict.is_accept()) && !reports.is_empty() {
        0
    } else {
        EXIT_FAILURE
    })
}

fn cmd_prove(a: ProveArgs) -> CmdResult {
    let kf = load_key(&a.sk, |p| KeyFile::load_prover(p))?;
    let master = seed_or_random(&a.seed)?;
    let report = net::prove(&a.connect, &kf, master, Duration::from_secs(a.timeout.max(1)))
        .map_err(|e| {
            let f = Failure::from(e);
            Failure {
                msg: format!("{}: {}", a.connect, f.msg),
                ..f
            }
        })?;
    println!(
        "{} after {}/{} rounds",
        verdict_line(&report.verdict),
        report.rounds_completed,
        report.rounds_announced
    );
    Ok(if report.verdict.is_accept() { 0 } else { EXIT_FAILURE })
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let target = parse_target(&a.target_soundness).map_err(|e| usage(e.to_string()))?;
    let r = rounds_for_target(a.scheme, a.params.q, &target).map_err(|e| usage(e.to_string()))?;
    let params = a.params.params(r);
    params.validate()?;
    let err = lweid::cost::per_round_error(a.scheme, params.q);
    println!("scheme={} per_round_error={} target={}", a.scheme.name(), err, a.target_soundness);
    println!("r={r}");
    println!(
        "{:<14} {:>10} {:>10} {:>10} {:>10}",
        "mode", "commit", "challenge", "answer", "total"
    );
    for mode in [CostMode::Formula, CostMode::Counted, CostMode::Wire] {
        println!("{}", cost_model(&params, a.scheme, mode));
    }
    let per = cost_model(&params, a.scheme, CostMode::Formula).total_bits_avg;
    let whole = &per * num_rational::BigRational::from_integer(r.into());
    println!("session_bits (formula, r rounds) = {}", display_bits(&whole));
    println!("counted and wire modes count this implementation's payloads; wire is byte-aligned");
    Ok(0)
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let seed = seed_or_random(&a.seed)?;
    let kf = match &a.pk {
        Some(p) => load_key(p, |p| KeyFile::load(p))?.public_only(),
        None => keygen(a.scheme, &a.params.params(1), &seed.derive(b"key", 32))?.public_only(),
    };
    if kf.scheme() != a.scheme {
        return Err(usage(format!(
            "key is for {}, not {}",
            kf.scheme().name(),
            a.scheme.name()
        )));
    }
    let opts = SimOptions {
        fixed_permutation: a.fixed_permutation,
        ..SimOptions::default()
    };
    let rounds = harness::simulated_transcripts(
        &kf.params,
        &kf.public,
        a.rounds,
        a.nonce.as_bytes(),
        &seed.derive(b"sim", 32),
        opts,
    )?;
    save_transcripts(&a.out, a.scheme, &kf.params, &rounds).map_err(|e| usage(e.to_string()))?;
    let accepted = rounds.iter().filter(|r| r.verdict.is_accept()).count();
    println!("wrote {} simulated rounds ({accepted} accepting) to {}", rounds.len(), a.out.display());
    Ok(0)
}

fn cmd_replay(a: ReplayArgs) -> CmdResult {
    let kf = load_key(&a.pk, |p| KeyFile::load(p))?.public_only();
    let (scheme, params, rounds) = load_transcripts(&a.transcript)?;
    if scheme != kf.scheme() || params != kf.params {
        return Err(usage("transcript and key disagree on scheme or parameters"));
    }
    let (verdicts, overall) = replay(&kf.params, &kf.public, &rounds, a.rounds);
    let mut mismatches = 0;
    for (i, (r, v)) in rounds.iter().zip(&verdicts).enumerate() {
        let same = r.verdict == *v;
        mismatches += !same as usize;
        println!(
            "round {:>4}: recorded {} replayed {}{}",
            i + 1,
            r.verdict,
            v,
            if same { "" } else { "  MISMATCH" }
        );
    }
    if let Some(out) = &a.out {
        let replayed: Vec<RoundTranscript> = rounds
            .iter()
            .zip(&verdicts)
            .map(|(r, v)| RoundTranscript {
                verdict: *v,
                ..r.clone()
            })
            .collect();
        save_transcripts(out, scheme, &params, &replayed).map_err(|e| usage(e.to_string()))?;
    }
    println!("{}", verdict_line(&overall));
    if mismatches > 0 {
        eprintln!("{mismatches} rounds disagree with the recorded verdicts");
    }
    Ok(if overall.is_accept() && mismatches == 0 { 0 } else { EXIT_FAILURE })
}

fn cmd_zk_test(a: ZkTestArgs) -> CmdResult {
    let kf = load_key(&a.sk, |p| KeyFile::load_prover(p))?;
    let seed = seed_or_random(&a.seed)?;
    let nonce = a.nonce.as_bytes();
    let real = harness::real_transcripts(&kf, a.rounds, nonce, &seed.derive(b"real", 32))?;
    let opts = SimOptions {
        fixed_permutation: a.fixed_permutation,
        ..SimOptions::default()
    };
    let sim = harness::simulated_transcripts(
        &kf.params,
        &kf.public,
        a.rounds,
        nonce,
        &seed.derive(b"sim", 32),
        opts,
    )?;
    let report = harness::zk_stat_test(&kf.params, &real, &sim)?;
    print!("{}", report.table());
    if let Some(path) = &a.csv {
        std::fs::write(path, report.csv()).map_err(|e| usage(e.to_string()))?;
    }
    Ok(if report.all_above(a.alpha) { 0 } else { EXIT_FAILURE })
}

fn cmd_soundness(a: SoundnessArgs) -> CmdResult {
    let params = a.params.params(a.rounds_per_trial.max(1));
    let seed = seed_or_random(&a.seed)?;
    let est = harness::estimate_soundness(a.scheme, &params, a.rounds_per_trial, a.trials, &seed)?;
    println!(
        "scheme={} trials={} accepted={} rate={:.4} ci99=[{:.4}, {:.4}] theory={:.4} covered={}",
        a.scheme.name(),
        est.trials,
        est.accepted,
        est.rate,
        est.ci.0,
        est.ci.1,
        est.theoretical,
        est.covers_theory()
    );
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LWEID_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Keygen(a) => cmd_keygen(a),
        Command::Serve(a) => cmd_serve(a),
        Command::Prove(a) => cmd_prove(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Replay(a) => cmd_replay(a),
        Command::ZkTest(a) => cmd_zk_test(a),
        Command::Soundness(a) => cmd_soundness(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
