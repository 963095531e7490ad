#![allow(dead_code)]

use std::io::Read;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};
use std::thread;
use std::time::Duration;

pub fn lweid() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lweid"))
}

pub fn run(args: &[&str]) -> Output {
    lweid().args(args).output().expect("spawn lweid")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn free_addr() -> String {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    l.local_addr().unwrap().to_string()
}

pub fn keygen(dir: &Path, name: &str, scheme: &str, seed: &str, extra: &[&str]) -> String {
    let base = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec!["keygen", "--scheme", scheme, "--seed", seed, "--out", &base];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    base
}

pub fn spawn_serve(args: &[&str]) -> Child {
    lweid()
        .arg("serve")
        .args(args)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn serve")
}

/// Runs `prove`, retrying while the server is still binding.
pub fn prove(sk: &str, addr: &str, seed: &str) -> Output {
    for _ in 0..100 {
        let o = run(&["prove", "--sk", sk, "--connect", addr, "--seed", seed]);
        if o.status.code() != Some(3) {
            return o;
        }
        thread::sleep(Duration::from_millis(50));
    }
    panic!("server at {addr} never came up");
}

pub fn finish(mut child: Child) -> (Option<i32>, String, String) {
    let status = child.wait().unwrap();
    let mut out = String::new();
    let mut err = String::new();
    child.stdout.take().unwrap().read_to_string(&mut out).unwrap();
    child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
    (status.code(), out, err)
}
