use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use equidecomp::pipeline::EquidecomposeConfig;
use equidecomp::space::SetPredicate;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_equidecomp"));
    c.env_remove("EQUIDECOMP_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("equidecomp-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn unknown_flag_is_a_usage_error_without_output() {
    let o = run(&["bounds", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn cube_check_reports_height_and_angle() {
    let o = run(&["cube", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("h = 0.707106781186548"), "{s}");
    assert!(s.contains("max angle 0.785398163397448"), "{s}");
}

#[test]
fn bounds_prints_the_stated_closed_form() {
    let o = run(&["bounds", "--eta", "6.1035e-5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("size bound (closed form) = 38·5^"), "{s}");
    assert!(s.contains("delta (quoted)"));
}

#[test]
fn bounds_markdown_has_one_table_per_ledger() {
    let o = run(&["bounds", "--ledger", "all", "--markdown"]);
    let s = stdout(&o);
    assert_eq!(s.matches("| constant | value | formula | source | check |").count(), 3);
    assert!(s.contains("6·5^277"));
}

#[test]
fn json_reports_are_deterministic_for_a_seed() {
    let args = ["verify-expansion", "--q", "16", "--family", "12", "--seed", "5", "--json"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["pass"], true);
    let c = run(&["verify-expansion", "--q", "16", "--family", "12", "--seed", "6", "--json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn thread_count_does_not_change_results() {
    let one = bin().args(["gap", "--q", "13", "--json"]).env("EQUIDECOMP_THREADS", "1").output().unwrap();
    let many = run(&["gap", "--q", "13", "--json", "--threads", "4"]);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn gap_matches_the_dense_oracle() {
    let o = run(&["gap", "--q", "17", "--dense", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let est = v["estimate"]["norm"].as_f64().unwrap();
    assert!((est - v["dense_norm"].as_f64().unwrap()).abs() < 1e-9);
    assert!((est - v["exact"]["norm"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn gap_on_composite_model_rejects_block_oracle_quietly() {
    let o = run(&["gap", "--model", "torus", "--q", "8", "--generators", "translations"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn expander_reports_symbolic_lps_set() {
    let o = run(&["expander", "--eta", "0.1666", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["l"], 255);
    assert_eq!(v["symbolic"], true);
}

#[test]
fn invalid_eta_is_a_usage_error() {
    let o = run(&["expander", "--eta", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn equidecompose_writes_a_valid_certificate() {
    let dir = scratch("eq");
    let o = run(&["equidecompose", "--q", "32", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert: Value = serde_json::from_str(&fs::read_to_string(dir.join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["residue_mass"], 0.0);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["validation"]["ok"], true);
}

#[test]
fn equidecompose_from_config_file() {
    let dir = scratch("cfg");
    let cfg = EquidecomposeConfig::torus_example(32, 4).unwrap();
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let o = run(&["equidecompose", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unequal_measures_fail_validation() {
    let dir = scratch("bad");
    let mut cfg = EquidecomposeConfig::torus_example(16, 4).unwrap();
    cfg.b = SetPredicate::rect(&[0.5, 0.0], &[1.0, 0.75]);
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let o = run(&["equidecompose", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "validation");
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = scratch("malformed");
    let path = dir.join("config.json");
    fs::write(&path, "{\"model\": 3}").unwrap();
    let o = run(&["equidecompose", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn match_plot_data_is_csv() {
    let o = run(&["match", "--q", "16", "--plot-data", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("stage,unmatched_left,unmatched_right,flipped_mass,flip_bound"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(cols[3] <= cols[4] + 1e-12);
    }
}

#[test]
fn diffuser_with_explicit_intervals() {
    let o = run(&["diffuser", "--samples", "200000", "--intervals", "1.1:1.3,1.45:1.65", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["failing"], 0);
    assert_eq!(run(&["diffuser", "--intervals", "0.5:1.2"]).status.code(), Some(2));
}

#[test]
fn reduce_open_passes_and_writes_certificate() {
    let dir = scratch("reduce");
    let o = run(&["reduce-open", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.join("certificate.json").exists());
}
