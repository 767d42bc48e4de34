use std::path::Path;
use std::process::{Command, Output};

use byzrelay::harness::{load_config, parse_config};

const CONFIG: &str = "\
# attack 1 at unit gains
h1 = 1
h2 = 1
h3 = 1
n = 500
trials = 25
strategy = attack1
n_x = 8
n_y = 22
n_u = 82
n_v = 42
range = 3
schedule = off
seed = 4
quantile = 0.95
";

fn byzrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_byzrelay")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let o = byzrelay(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let trials = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    let mut lines = trials.lines();
    assert_eq!(lines.next(), Some("arm,trial,seed,d_n,verdict"));
    assert_eq!(lines.count(), 2 * 25);

    let cdf = std::fs::read_to_string(out.join("cdf.csv")).unwrap();
    assert!(cdf.starts_with("arm,d_n_value,ecdf\n"));
    assert_eq!(cdf.lines().count(), 1 + 2 * 25);

    let echoed = load_config(&out.join("config.txt")).unwrap();
    let mut original = parse_config(CONFIG).unwrap();
    original.out = Some(out.clone());
    assert_eq!(echoed, original);
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("o");
    let o = byzrelay(&[
        "simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--trials", "30", "--seed", "11",
    ]);
    assert!(o.status.success());
    let echoed = load_config(&out.join("config.txt")).unwrap();
    assert_eq!((echoed.trials, echoed.seed), (30, 11));
    let rows = std::fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 60);
    assert!(rows.lines().skip(1).all(|l| l.split(',').nth(2) == Some("11")));
}

#[test]
fn calibrate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let a = byzrelay(&["calibrate", "--config", &cfg, "--jobs", "1"]);
    let b = byzrelay(&["calibrate", "--config", &cfg, "--jobs", "4"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("threshold="));
}

#[test]
fn detect_scores_observations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let obs = dir.path().join("obs.csv");
    // Y far from anything the honest channel produces for these X
    let mut text = String::from("x,y\n");
    for i in 0..400 {
        let x = -2.5 + 5.0 * (i as f64) / 400.0;
        text.push_str(&format!("{x},{}\n", -x * 3.0));
    }
    std::fs::write(&obs, text).unwrap();
    let o = byzrelay(&["detect", "--config", &cfg, "--observations", obs.to_str().unwrap(), "--threshold", "0.05"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).trim_end().ends_with("verdict=malicious"));

    std::fs::write(&obs, "a,b\n1,2\n").unwrap();
    let o = byzrelay(&["detect", "--config", &cfg, "--observations", obs.to_str().unwrap(), "--threshold", "0.05"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_manipulable_reports_gap() {
    let o = byzrelay(&["check-manipulable", "--kernel", "marginal", "--h3", "0", "--points", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("manipulable=true"));
    let o = byzrelay(&["check-manipulable", "--kernel", "shift", "--width", "0.3", "--points", "3"]);
    assert!(stdout(&o).contains("manipulable=false"));
}

#[test]
fn usage_and_config_errors_exit_one() {
    assert_eq!(byzrelay(&[]).status.code(), Some(1));
    assert_eq!(byzrelay(&["simulate"]).status.code(), Some(1));
    assert_eq!(byzrelay(&["reproduce-figure", "3"]).status.code(), Some(1));
    assert_eq!(byzrelay(&["simulate", "--config", "/nonexistent/cfg"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), &CONFIG.replace("strategy = attack1", "strategy = attack9"));
    let o = byzrelay(&["simulate", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strategy"));

    let unknown = write_config(dir.path(), &format!("{CONFIG}colour = blue\n"));
    let o = byzrelay(&["simulate", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn numeric_failure_exits_two() {
    // a kernel that is far too narrow for the normalization check to resolve
    let o = byzrelay(&["check-manipulable", "--kernel", "near-identity", "--width", "1e-300", "--points", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn help_exits_zero() {
    let o = byzrelay(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("reproduce-figure"));
}
