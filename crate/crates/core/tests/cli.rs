//! End-to-end runs of the `polcor` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use polcor::algebra::closed_form_r;
use polcor::algebra::DetectorPair;
use polcor::wire::{HEADER_LEN, RECORD_LEN};

fn polcor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polcor"))
        .args(args)
        .env_remove("POLCOR_SEED")
        .output()
        .expect("spawn polcor")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn run_party(dir: &Path, role: &str, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join(format!("{role}.bin"));
    let mut args = vec!["run-party", "--role", role, "--bins", "2000", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = polcor(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn simulate_writes_config_header_and_rows() {
    let o = polcor(&["simulate", "--bins", "5000", "--theta", "pi/8", "--xi", "0.1", "--seed", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# polcor correlation v1\n"));
    assert!(text.contains("# seed=3\n"));
    assert!(text.contains("# n_bins=5000\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    for row in rows {
        let pair: DetectorPair = row[0].parse().unwrap();
        let expect = closed_form_r(pair, std::f64::consts::FRAC_PI_8, 0.1, 0.0, 1.0).unwrap();
        let closed: f64 = row[10].parse().unwrap();
        let est: f64 = row[9].parse().unwrap();
        assert!((closed - expect).abs() < 1e-12);
        assert!((est - expect).abs() < 1e-9);
    }
}

#[test]
fn same_seed_same_bytes_and_env_seed() {
    let a = polcor(&["simulate", "--bins", "3000", "--seed", "11"]);
    let b = polcor(&["simulate", "--bins", "3000", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_polcor"))
        .args(["simulate", "--bins", "3000"])
        .env("POLCOR_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "theta = pi/4\nn_bins = 1000\nseed = 2\n").unwrap();
    let out = dir.path().join("nested/out.csv");
    let o = polcor(&["simulate", "--config", cfg.to_str().unwrap(), "--pair", "AB", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# theta=0.7853981633974483\n"));
    assert_eq!(data_rows(&text).len(), 1);
}

#[test]
fn invalid_config_names_key() {
    let o = polcor(&["simulate", "--duty", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("duty"), "{err}");
}

#[test]
fn fringe_and_local_scans() {
    let o = polcor(&["fringe-scan", "--bins", "1000", "--pair", "AB", "--sweep", "xi:0:pi:5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# sweep=xi:0:3.141592653589793:5\n"));
    assert_eq!(data_rows(&text).len(), 5);

    let o = polcor(&["local-scan", "--bins", "1000"]);
    assert!(o.status.success());
    assert_eq!(data_rows(&stdout(&o)).len(), 32);
}

#[test]
fn chsh_prints_summary() {
    let o = polcor(&["chsh", "--bins", "2000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("closed form 2.828427"), "{text}");
    assert!(text.contains("violation: yes"));
}

#[test]
fn algebra_lists_rules() {
    let o = polcor(&["algebra", "--pair", "CD", "--eta", "pi"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("R_CD"), "{text}");
}

#[test]
fn file_correlator_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_party(dir.path(), "alice", &[]);
    let b = run_party(dir.path(), "bob", &[]);
    assert_eq!(fs::metadata(&a).unwrap().len() as usize, HEADER_LEN + 2000 * RECORD_LEN);
    let o = polcor(&["run-correlator", "--bins", "2000", "--input", a.to_str().unwrap(), "--input", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let direct = polcor(&["simulate", "--bins", "2000"]);
    assert_eq!(o.stdout, direct.stdout);
}

#[test]
fn correlator_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_party(dir.path(), "alice", &[]);
    let b = run_party(dir.path(), "bob", &["--seed", "5"]);
    let (a_s, b_s) = (a.to_str().unwrap(), b.to_str().unwrap());

    let mismatch = polcor(&["run-correlator", "--bins", "2000", "--input", a_s, "--input", b_s]);
    assert_eq!(mismatch.status.code(), Some(2));

    let b = run_party(dir.path(), "bob", &[]);
    let bytes = fs::read(&b).unwrap();
    let cut = dir.path().join("cut.bin");
    fs::write(&cut, &bytes[..bytes.len() - 10]).unwrap();
    let framing = polcor(&["run-correlator", "--bins", "2000", "--input", a_s, "--input", cut.to_str().unwrap()]);
    assert_eq!(framing.status.code(), Some(3));

    let mut gap = bytes[..HEADER_LEN].to_vec();
    gap.extend_from_slice(&bytes[HEADER_LEN + RECORD_LEN..]);
    let gapped = dir.path().join("gap.bin");
    fs::write(&gapped, gap).unwrap();
    let o = polcor(&["run-correlator", "--bins", "2000", "--input", a_s, "--input", gapped.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing bins"));
}

#[test]
fn tcp_parties_and_correlator() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let correlator = Command::new(env!("CARGO_BIN_EXE_polcor"))
        .args(["run-correlator", "--bins", "1500", "--listen", &addr])
        .env_remove("POLCOR_SEED")
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let parties: Vec<_> = ["alice", "bob"]
        .into_iter()
        .map(|role| {
            Command::new(env!("CARGO_BIN_EXE_polcor"))
                .args(["run-party", "--role", role, "--bins", "1500", "--connect", &addr])
                .env_remove("POLCOR_SEED")
                .spawn()
                .unwrap()
        })
        .collect();
    for mut p in parties {
        assert!(p.wait().unwrap().success());
    }
    let out = correlator.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(out.stdout, polcor(&["simulate", "--bins", "1500"]).stdout);
}

#[test]
fn verify_subcommand_reports_ten_lines() {
    let o = polcor(&["verify"]);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count(), 10);
    assert!(o.status.success(), "{text}");
}
