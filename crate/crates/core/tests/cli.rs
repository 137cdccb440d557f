// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sfq_route::bench;
use sfq_route::flow::{LOG_FILE, MANIFEST_FILE, REPORT_FILE, REPORT_TEXT_FILE, SCRIPT_FILE, SLACK_FILE};

fn tech_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/desk-nb04.toml")
}

fn export(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    let b = bench::generate(&bench::by_name(name).unwrap());
    let (p, n) = (dir.join(format!("{name}.place")), dir.join(format!("{name}.net")));
    std::fs::write(&p, &b.placement).unwrap();
    std::fs::write(&n, &b.netlist).unwrap();
    (p, n)
}

fn run(place: &Path, net: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfq-route"))
        .arg("--tech")
        .arg(tech_file())
        .arg("--placement")
        .arg(place)
        .arg("--netlist")
        .arg(net)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn chain_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let (p, n) = export(dir.path(), "chain2");
    let out = dir.path().join("out");
    let res = run(&p, &n, &out, &["--report", "machine"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for f in [SCRIPT_FILE, MANIFEST_FILE, LOG_FILE, SLACK_FILE, REPORT_FILE, REPORT_TEXT_FILE] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["design"], "chain2");
    assert_eq!(report["t_clk_post_ps"], 13.2);
    assert_eq!(report["hold_violations_post"], 0);
}

#[test]
fn c17_text_report_shows_fixed_violations() {
    let dir = tempfile::tempdir().unwrap();
    let (p, n) = export(dir.path(), "c17");
    let res = run(&p, &n, &dir.path().join("out"), &["--mode", "nb03", "--seed", "3", "--threads", "2"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("hold violations pre/post  5/0"), "{text}");
    assert!(text.contains("on nb03"), "{text}");
}

#[test]
fn unreadable_input_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (_, n) = export(dir.path(), "chain2");
    let out = dir.path().join("out");
    let res = run(&dir.path().join("missing.place"), &n, &out, &[]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("missing.place"));
    assert!(!out.exists());
}

#[test]
fn malformed_netlist_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (p, n) = export(dir.path(), "chain2");
    std::fs::write(&n, "netlist 1\nnet x signal nowhere.q -> d1.a\n").unwrap();
    let res = run(&p, &n, &dir.path().join("out"), &[]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_mode_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (p, n) = export(dir.path(), "chain2");
    let res = run(&p, &n, &dir.path().join("out"), &["--mode", "nb05"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("nb05"));
}

#[test]
fn repeated_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (p, n) = export(dir.path(), "adder4");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&p, &n, &a, &["--threads", "1"]);
    run(&p, &n, &b, &["--threads", "4"]);
    for f in [SCRIPT_FILE, MANIFEST_FILE, LOG_FILE, SLACK_FILE] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}
