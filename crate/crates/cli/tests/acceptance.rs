//! Criterion 11: the `oracle-check` subcommand runs the exact identities
//! (acceptance criteria 1-3) and exits 0.

use std::process::Command;
use std::time::Instant;

#[test]
fn criterion_11_oracle_check_exits_zero() {
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_circuitlab"))
        .arg("oracle-check")
        .output()
        .expect("spawn circuitlab");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let pass = out.status.success() && stdout.matches("[PASS]").count() == 3;
    println!(
        "[{}] criterion 11, oracle-check CLI: exit {:?}, {} PASS lines ({:.1}s)\n{stdout}",
        if pass { "PASS" } else { "FAIL" },
        out.status.code(),
        stdout.matches("[PASS]").count(),
        t0.elapsed().as_secs_f64()
    );
    assert!(pass, "oracle-check failed:\n{stdout}");
}

#[test]
fn unknown_subcommand_fails_with_usage() {
    let out = Command::new(env!("CARGO_BIN_EXE_circuitlab"))
        .arg("no-such-command")
        .output()
        .expect("spawn circuitlab");
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn unknown_flag_fails() {
    let out = Command::new(env!("CARGO_BIN_EXE_circuitlab"))
        .args(["oracle-check", "--bogus"])
        .output()
        .expect("spawn circuitlab");
    assert!(!out.status.success());
}
