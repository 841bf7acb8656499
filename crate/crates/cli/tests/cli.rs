use std::fs;
use std::process::{Command, Output};

fn lsw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsw")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn default_report_violates() {
    let o = lsw(&["report", "--shots", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# run\neta,state,shots,seed\n0.67,phi0,20000,"));
    assert!(text.contains("\n# significance\nmeasured,sigma,bound,n_sigma\n"));
}

#[test]
fn report_is_reproducible() {
    let args = ["report", "--shots", "5000", "--seed", "9", "--format", "object"];
    let (a, b) = (lsw(&args), lsw(&args));
    assert_eq!(a.stdout, b.stdout);
    let other = lsw(&["report", "--shots", "5000", "--seed", "10", "--format", "object"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn non_violating_eta_exits_one() {
    assert_eq!(lsw(&["report", "--eta", "0.71", "--shots", "1000"]).status.code(), Some(1));
    assert_eq!(lsw(&["report", "--state", "H", "--shots", "1000"]).status.code(), Some(1));
}

#[test]
fn contract_failures_exit_two() {
    let o = lsw(&["check", "--eta", "0.8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radicand"));
    assert_eq!(lsw(&["report", "--state", "bogus"]).status.code(), Some(2));
    assert_eq!(lsw(&["report", "--shots", "0"]).status.code(), Some(2));
    assert_eq!(lsw(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sweep_table() {
    let o = lsw(&["sweep", "--eta-min", "0.67", "--eta-max", "0.73", "--steps", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eta,alpha,a_norm,r3,bound,margin");
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[1], "0.670000,0.775550,0.390612,0.807531,0.776667,0.0308644");
    assert_eq!(lsw(&["sweep", "--steps", "1"]).status.code(), Some(2));
}

#[test]
fn marginals_and_compile() {
    let o = lsw(&["marginals"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 25);
    assert!(text.contains("E+1,H,G12++ + G12+-,0.835000,G13++ + G13+-,0.835000,0.835000"));

    let o = lsw(&["compile"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("pair,stage,outcome,q1_deg,h_deg,q2_deg,t_v,chi"));
    assert!(text.contains("12,1,+-,-7.2941,32.8942,-7.2941,0.3878,0.612225"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "eta = 0.68\nstate = \"phi0\"\nshots = 3000\nseed = 5\n").unwrap();
    let out = dir.path().join("report.json");
    let cfg_s = cfg.to_str().unwrap();
    let out_s = out.to_str().unwrap();
    let o = lsw(&["report", "--config", cfg_s, "--format", "object", "--out", out_s]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"eta\": 0.68"));
    assert!(text.contains("\"shots\": 3000"));

    let o = lsw(&["report", "--config", cfg_s, "--eta", "0.71", "--out", out_s]);
    assert_eq!(o.status.code(), Some(1));
    assert!(fs::read_to_string(&out).unwrap().contains("\n0.71,phi0,3000,5\n"));

    fs::write(&cfg, "eta = 0.68\ncolour = \"blue\"\n").unwrap();
    assert_eq!(lsw(&["check", "--config", cfg_s]).status.code(), Some(2));
}

#[test]
fn explicit_amplitudes() {
    let o = lsw(&["report", "--state", "0.7071067811865476,0,0,0.7071067811865476", "--shots", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let o = lsw(&["check", "--state", "-1,0,0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
