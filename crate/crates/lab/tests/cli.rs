use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bec_lab(args: &[&str], jobs: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bec-lab"));
    cmd.args(args).env_remove("BECLAB_JOBS");
    if let Some(j) = jobs {
        cmd.env("BECLAB_JOBS", j);
    }
    cmd.output().expect("binary runs")
}

fn run_config(dir: &TempDir, sub: &str, body: &str, ext: &str) -> (Output, PathBuf) {
    let cfg = dir.path().join(format!("{sub}.{ext}"));
    fs::write(&cfg, body).unwrap();
    let out = dir.path().join(format!("out-{sub}"));
    let o = bec_lab(&[sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    (o, out)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

const SCATTER_ZERO: &str = r#"
mu = [1.0, 0.01]
profiles = false
[potential]
kind = "constant"
v0 = 0.0
R0 = 1.0
"#;

#[test]
fn scatter_zero_potential_gives_zero_length() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run_config(&dir, "scatter", SCATTER_ZERO, "toml");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("scatter.csv")).unwrap();
    let a0_col = rdr.headers().unwrap().iter().position(|h| h == "a0").unwrap();
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r[a0_col].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn rate_step_potential_reports_half_slope() {
    let dir = TempDir::new().unwrap();
    let body = "n = [0.0]\nmu = { min = 1e-6, max = 1e-2, points = 10 }\n";
    let (o, out) = run_config(&dir, "rate", body, "toml");
    assert_eq!(o.status.code(), Some(0));
    let m = manifest(&out);
    let slope = m["derived_params"]["fits"][0]["slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.05, "slope {slope}");
    let text = fs::read_to_string(out.join("rate.csv")).unwrap();
    assert!(text.starts_with("n,mu,eta"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn json_config_is_accepted() {
    let dir = TempDir::new().unwrap();
    let body = r#"{"mu": [1.0], "profiles": false, "potential": {"kind": "constant", "v0": 1.0, "R0": 1.0}}"#;
    let (o, _) = run_config(&dir, "scatter", body, "json");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn manifest_has_the_documented_keys() {
    let dir = TempDir::new().unwrap();
    let (_, out) = run_config(&dir, "scatter", SCATTER_ZERO, "toml");
    let m = manifest(&out);
    let keys: Vec<&str> = m.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["version", "subcommand", "config_echo", "derived_params", "timings", "status"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(m["subcommand"], "scatter");
    assert_eq!(m["config_echo"]["potential"]["v0"], 0.0);
    assert_eq!(m["status"]["state"], "ok");
}

#[test]
fn invalid_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run_config(&dir, "scatter", "mu = [1.0]\nbogus = 3\n", "toml");
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run_config(&dir, "neumann", "this is not toml = = =", "toml");
    assert_eq!(o.status.code(), Some(2));
    let (o, out) = run_config(&dir, "rate", "n = [0.0]\nmu = [-1.0]\n", "toml");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(manifest(&out)["status"]["state"], "config_invalid");
}

#[test]
fn solver_failure_exits_3_with_typed_error() {
    let dir = TempDir::new().unwrap();
    // A phase with a caustic well before the requested time.
    let body = r#"
amplitude = [0.0, 0.0]
times = [5.0]
[grid]
dim = 1
n = 64
L = 6.283185307179586
[phase]
[[phase.modes]]
amp = 1.0
k = [1.0, 0.0, 0.0]
"#;
    let (o, out) = run_config(&dir, "eikonal-run", body, "toml");
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["status"]["state"], "solver_failure");
    assert_eq!(m["status"]["exit_code"], 3);
    assert!(!m["status"]["error_kind"].as_str().unwrap().is_empty());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = shipped("gp-run.toml");
    let outs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for (out, jobs) in outs.iter().zip(["1", "3"]) {
        let o = bec_lab(&["gp-run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], Some(jobs));
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["gp_run.csv", "gp_final_slice.csv"] {
        assert_eq!(fs::read(outs[0].join(name)).unwrap(), fs::read(outs[1].join(name)).unwrap(), "{name}");
    }
}

#[test]
fn jobs_come_from_environment_unless_overridden() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(&cfg, SCATTER_ZERO).unwrap();
    let out = dir.path().join("o");
    let args = ["scatter", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    bec_lab(&args, Some("3"));
    assert_eq!(manifest(&out)["timings"]["jobs"], 3);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--jobs", "2"]);
    bec_lab(&with_flag, Some("3"));
    assert_eq!(manifest(&out)["timings"]["jobs"], 2);
}

#[test]
fn every_shipped_experiment_config_runs() {
    let dir = TempDir::new().unwrap();
    for sub in [
        "scatter", "neumann", "rate", "gp-run", "euler-run", "eikonal-run", "modenergy", "wkb-sweep", "pair-check",
    ] {
        let out = dir.path().join(sub);
        let cfg = shipped(&format!("{sub}.toml"));
        let o = bec_lab(&[sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(0), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        let csvs = fs::read_dir(&out)
            .unwrap()
            .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
            .count();
        assert!(csvs > 0, "{sub} wrote no CSV");
    }
}
