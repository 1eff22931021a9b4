use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Scratch {
        let dir = std::env::temp_dir().join(format!("pdbs-cli-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, file: &str) -> PathBuf {
        self.0.join(file)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn pdbs(args: &[&str]) -> Output {
    pdbs_env(args, &[])
}

fn pdbs_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pdbs"));
    cmd.args(args).env_remove("SCAN_CAP").env_remove("ENUM_CAP");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const MODEL: [&str; 10] = ["--n", "12", "--kr", "2", "--kl", "3", "--p", "0.9", "--q", "0.2"];

#[test]
fn sampled_file_and_sampled_detect_agree() {
    let dir = Scratch::new("roundtrip");
    let file = dir.path("g.txt");
    let sample = json(&pdbs(&[&["--seed", "5", "sample"], &MODEL[..], &["--out", path_str(&file)]].concat()));
    let edges = sample["result"]["edges"].as_u64().unwrap();
    let text = std::fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('n')).count() as u64, edges);

    let from_file = json(&pdbs(
        &[&["--seed", "5", "detect", "--method", "count,degree,scan", "--in", path_str(&file)], &MODEL[2..]].concat(),
    ));
    let sampled = json(&pdbs(&[&["--seed", "5", "detect", "--method", "count,degree,scan"], &MODEL[..]].concat()));
    assert_eq!(from_file["result"], sampled["result"]);
    assert_eq!(from_file["result"][0]["statistic"].as_f64().unwrap() as u64, edges);
}

#[test]
fn null_flag_is_echoed() {
    let out = json(&pdbs(&[&["detect", "--method", "count", "--null"], &MODEL[..]].concat()));
    assert_eq!(out["config"]["args"]["null"], Value::Bool(true));
}

#[test]
fn infeasible_scan_exits_with_budget_code() {
    let out =
        pdbs(&["detect", "--method", "scan", "--n", "200", "--kr", "20", "--kl", "20", "--p", "0.9", "--q", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error[E_BUDGET]"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_edge_file_exits_with_parse_code() {
    let dir = Scratch::new("parse");
    for (name, body) in
        [("dup", "n 4\n0 1\n1 0\n"), ("loop", "n 4\n2 2\n"), ("range", "n 4\n0 9\n"), ("header", "0 1\n")]
    {
        let file = dir.path(name);
        std::fs::write(&file, body).unwrap();
        let out = pdbs(&[
            "detect",
            "--method",
            "count",
            "--in",
            path_str(&file),
            "--kr",
            "1",
            "--kl",
            "1",
            "--p",
            "0.5",
            "--q",
            "0.1",
        ]);
        assert_eq!(out.status.code(), Some(4), "{name}: {}", stderr(&out));
        assert!(stderr(&out).contains("line"), "{name}: {}", stderr(&out));
    }
}

#[test]
fn usage_errors_exit_with_code_two() {
    for args in [
        vec!["detect", "--method", "bogus", "--n", "10", "--kr", "2", "--kl", "2", "--p", "0.9", "--q", "0.1"],
        vec!["risk", "--n", "10", "--kr", "2", "--kl", "2", "--p", "0.1", "--q", "0.5", "--method", "count"],
        vec!["oracle", "--n", "4", "--kr", "3", "--kl", "3", "--p", "0.9", "--q", "0.1"],
        vec!["--seed", "not-a-number", "phase", "--family", "balanced", "--beta", "0:0.5:0.1", "--alpha", "0:1:0.5"],
        vec!["no-such-command"],
    ] {
        let out = pdbs(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn phase_csv_reproduces_anchor_labels() {
    let out =
        pdbs(&["phase", "--family", "extremely", "--beta", "0.7:0.7:0.1", "--alpha", "0.3:0.3:0.1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config={"));
    assert_eq!(lines.next(), Some("beta,alpha,label,witnesses"));
    assert_eq!(lines.next(), Some("0.7,0.3,Easy,Degree"));
    assert_eq!(lines.next(), None);
}

#[test]
fn phase_grid_drops_out_of_range_values() {
    let out = pdbs(&["phase", "--family", "balanced", "--beta", "0:1:0.25", "--alpha", "0:2:1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = String::from_utf8_lossy(&out.stdout).lines().skip(2).count();
    assert_eq!(rows, 4 * 3);
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn oracle_risk_respects_its_lower_bound() {
    for (kr, kl, p) in [("1", "1", "0.6"), ("2", "1", "0.8"), ("2", "2", "0.95")] {
        let out = json(&pdbs(&["oracle", "--n", "6", "--kr", kr, "--kl", kl, "--p", p, "--q", "0.3"]));
        let r = &out["result"];
        let risk = r["bayes_risk"].as_f64().unwrap();
        assert!(risk >= r["lower_bound"].as_f64().unwrap() - 1e-12, "{r}");
        assert!((risk + r["tv"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        let (m2, brute) = (r["second_moment"].as_f64().unwrap(), r["second_moment_bruteforce"].as_f64().unwrap());
        assert!((m2 - brute).abs() <= 1e-10 * m2);
    }
}

#[test]
fn settings_resolve_flag_then_env_then_file() {
    let dir = Scratch::new("precedence");
    let config = dir.path("run.toml");
    std::fs::write(&config, "seed = 99\nscan_cap = 111\nenum_cap = 222\ngreedy_restarts = 7\n").unwrap();
    let base = [
        "--format",
        "json",
        "--config",
        path_str(&config),
        "phase",
        "--family",
        "balanced",
        "--beta",
        "0.5:0.5:0.1",
        "--alpha",
        "0:0:1",
    ];
    let settings = |args: &[&str], env: &[(&str, &str)]| json(&pdbs_env(args, env))["config"]["settings"].clone();

    let file_only = settings(&base, &[]);
    assert_eq!((file_only["seed"].as_u64(), file_only["scan_cap"].as_u64()), (Some(99), Some(111)));
    assert_eq!(file_only["greedy_restarts"].as_u64(), Some(7));

    let env = settings(&base, &[("SCAN_CAP", "333")]);
    assert_eq!((env["scan_cap"].as_u64(), env["enum_cap"].as_u64()), (Some(333), Some(222)));

    let flags = settings(&[&["--scan-cap", "444", "--seed", "0x10"], &base[..]].concat(), &[("SCAN_CAP", "333")]);
    assert_eq!((flags["scan_cap"].as_u64(), flags["seed"].as_u64()), (Some(444), Some(16)));
}

#[test]
fn bad_config_file_is_a_parse_error() {
    let dir = Scratch::new("badconfig");
    let config = dir.path("bad.toml");
    std::fs::write(&config, "colour = \"blue\"\n").unwrap();
    let out =
        pdbs(&["--config", path_str(&config), "phase", "--family", "balanced", "--beta", "0:0:1", "--alpha", "0:0:1"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn output_flag_writes_the_same_bytes() {
    let dir = Scratch::new("output");
    let file = dir.path("risk.csv");
    let args =
        [&["--seed", "8", "risk"], &MODEL[..], &["--method", "count,degree", "--trials", "40", "--format", "csv"]]
            .concat();
    let stdout = pdbs(&args).stdout;
    let to_file = pdbs(&[&args[..], &["--output", path_str(&file)]].concat());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&file).unwrap(), stdout);
    let text = String::from_utf8(stdout).unwrap();
    assert_eq!(text.lines().nth(1), Some("n,kr,kl,p,q,method,trials,type1,type2,risk,ci,seed"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn sweep_records_failing_cells_and_continues() {
    let out = pdbs(&[
        "sweep",
        "--n",
        "12,200",
        "--kr",
        "2",
        "--kl",
        "2",
        "--p",
        "0.9",
        "--q",
        "0.1",
        "--method",
        "scan",
        "--trials",
        "10",
        "--scan-cap",
        "100000",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("12,") && rows[0].ends_with(','), "{}", rows[0]);
    assert!(rows[1].starts_with("200,") && rows[1].contains("budget"), "{}", rows[1]);
}
