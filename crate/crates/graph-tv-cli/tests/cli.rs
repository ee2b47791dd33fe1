//! End-to-end runs of the `gtv` binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn gtv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gtv"))
}

fn run_with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = gtv()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_into_scatter_auto() {
    let sim = gtv()
        .args(["simulate", "-n", "1000", "--sd", "0.05", "--seed", "7"])
        .output()
        .unwrap();
    assert!(sim.status.success());
    let rows = stdout_str(&sim);
    assert_eq!(rows.lines().count(), 1001, "header plus one row per sample");
    assert_eq!(rows.lines().next(), Some("x1,x2,y"));

    let fit = run_with_stdin(&["scatter", "--auto"], rows.as_bytes());
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    let out = stdout_str(&fit);
    assert_eq!(out.lines().count(), 1001);
    assert_eq!(out.lines().next(), Some("x1,x2,y,fit"));
}

#[test]
fn simulate_is_deterministic() {
    let a = gtv().args(["simulate", "-n", "20", "--seed", "3"]).output().unwrap();
    let b = gtv().args(["simulate", "-n", "20", "--seed", "3"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn chain_fixed_lambda_merges_close_pair() {
    let out = run_with_stdin(
        &["chain", "--lambda", "0.4", "--regions"],
        b"x,y\n0,1\n1,1.1\n2,5\n3,5.2\n4,1\n",
    );
    assert!(out.status.success());
    let text = stdout_str(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 5);
    // First two and middle two vertices fuse.
    assert_eq!(rows[0][3], rows[1][3]);
    assert_eq!(rows[2][3], rows[3][3]);
    assert_ne!(rows[1][3], rows[2][3]);
    assert_eq!(rows[0][2], rows[1][2]);
}

#[test]
fn image_output_round_trips_byte_identically() {
    let dir = tempdir();
    let input = dir.join("in.pgm");
    let out1 = dir.join("out1.pgm");
    let out2 = dir.join("out2.pgm");
    std::fs::write(
        &input,
        b"P2\n4 4\n255\n10 10 200 200\n10 10 200 200\n10 10 200 200\n10 10 200 200\n",
    )
    .unwrap();
    let s1 = gtv()
        .args(["image", "--lambda", "0.1"])
        .arg(&input)
        .arg(&out1)
        .status()
        .unwrap();
    assert!(s1.success());
    // Denoising the already piecewise-constant output with a tiny
    // parameter leaves every gray level in place.
    let s2 = gtv()
        .args(["image", "--lambda", "1e-9"])
        .arg(&out1)
        .arg(&out2)
        .status()
        .unwrap();
    assert!(s2.success());
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn solve_then_verify_passes() {
    let dir = tempdir();
    let graph = dir.join("g.txt");
    std::fs::write(&graph, "3 2\n0 1 0.2\n1 2 0.2\n1 0\n1 1\n1 0.5\n").unwrap();
    let solve = gtv().arg("solve").arg(&graph).output().unwrap();
    assert!(solve.status.success());
    assert!(stdout_str(&solve).starts_with("vertex,fit\n"));
    let verify = gtv().arg("verify").arg(&graph).output().unwrap();
    assert!(verify.status.success());
    assert!(stdout_str(&verify).contains("certificate: PASS"));
}

#[test]
fn trace_log_has_event_rows() {
    let dir = tempdir();
    let graph = dir.join("g.txt");
    let trace = dir.join("trace.csv");
    std::fs::write(&graph, "3 2\n0 1 0.2\n1 2 0.2\n1 0\n1 1\n1 0.5\n").unwrap();
    let status = gtv()
        .arg("solve")
        .arg(&graph)
        .arg("--trace")
        .arg(&trace)
        .status()
        .unwrap();
    assert!(status.success());
    let log = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(log.lines().next(), Some("iter,edge,kind,df_k,df_l,dc,q_working"));
    assert!(log.lines().count() > 1);
}

#[test]
fn conflicting_modes_exit_usage() {
    let out = run_with_stdin(&["chain", "--lambda", "1", "--auto"], b"x,y\n0,1\n");
    assert_eq!(out.status.code(), Some(1));
    let out = run_with_stdin(&["chain"], b"x,y\n0,1\n");
    assert_eq!(out.status.code(), Some(1), "a mode flag is required");
}

#[test]
fn data_errors_exit_two() {
    let out = gtv()
        .args(["chain", "--lambda", "1", "/nonexistent/input.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = run_with_stdin(&["chain", "--lambda", "1"], b"x,y\n0,1\n0,2\n");
    assert_eq!(out.status.code(), Some(2), "duplicate x is a data error");
    let dir = tempdir();
    let bad = dir.join("bad.pgm");
    std::fs::write(&bad, b"P2\n1 1\n0\n0\n").unwrap();
    let out = gtv()
        .args(["image", "--lambda", "1"])
        .arg(&bad)
        .arg(dir.join("out.pgm"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "maxval 0 is malformed");
}

#[test]
fn chain_squeeze_baseline_flattens_background() {
    let mut csv = String::from("x,y\n");
    // Deterministic small-noise background with three spikes of height 5.
    let mut state: u64 = 9;
    let mut noise = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.2
    };
    for i in 0..150 {
        let spike = if i % 50 >= 20 && i % 50 < 23 { 5.0 } else { 0.0 };
        csv.push_str(&format!("{i},{}\n", spike + noise()));
    }
    let out = run_with_stdin(
        &["chain", "--squeeze", "--baseline", "auto", "--mean-correct"],
        csv.as_bytes(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut off_spike: Vec<&str> = Vec::new();
    let mut spikes = 0;
    let text = stdout_str(&out);
    for line in text.lines().skip(1) {
        let fit = line.split(',').nth(2).unwrap();
        if fit.parse::<f64>().unwrap() > 2.5 {
            spikes += 1;
        } else {
            off_spike.push(fit);
        }
    }
    off_spike.dedup();
    assert_eq!(off_spike.len(), 1, "one constant off-spike level");
    assert!(spikes >= 3, "all spikes detected, got {spikes}");
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "gtv-test-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
