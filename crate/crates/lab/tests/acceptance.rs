//! Acceptance target: runs `bec-lab acceptance` on the shipped configuration twice and
//! prints one PASS/FAIL line per criterion. Exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use bec_lab::acceptance::{line, tol};

fn pinned_tolerances() -> Vec<(&'static str, f64, f64)> {
    vec![
        ("closed-form abs", tol::CLOSED_FORM_ABS, 1e-8),
        ("closed-form budget", tol::CLOSED_FORM_SECONDS, 1.0),
        ("rate rel", tol::RATE_REL, 0.15),
        ("rate min points", tol::RATE_MIN_POINTS as f64, 8.0),
        ("rate budget", tol::RATE_SECONDS, 30.0),
        ("ratio low", tol::NEUMANN_RATIO_LOW, 0.8),
        ("ratio high", tol::NEUMANN_RATIO_HIGH, 1.0),
        ("fd rel", tol::NEUMANN_FD_REL, 1e-6),
        ("neumann budget", tol::NEUMANN_SECONDS, 10.0),
        ("identity abs", tol::IDENTITY_ABS, 1e-6),
        ("mass drift", tol::GP_MASS_DRIFT, 1e-10),
        ("energy drift", tol::GP_ENERGY_DRIFT, 1e-6),
        ("drift ratio low", tol::GP_DRIFT_RATIO.0, 3.0),
        ("drift ratio high", tol::GP_DRIFT_RATIO.1, 5.0),
        ("gp budget", tol::GP_SECONDS, 60.0),
        ("continuity slope", tol::CONTINUITY_SLOPE, 2.0),
        ("slope tol", tol::SLOPE_TOL, 0.2),
        ("l integral", tol::L_INTEGRAL, 1e-10),
        ("acoustic rel", tol::ACOUSTIC_REL, 0.01),
        ("euler drift", tol::EULER_ENERGY_DRIFT, 1e-6),
        ("reversal factor", tol::REVERSAL_FACTOR, 10.0),
        ("modenergy budget", tol::MODENERGY_SECONDS, 300.0),
        ("stability spread", tol::STABILITY_SPREAD, 2.0),
        ("wkb budget", tol::WKB_SECONDS, 600.0),
    ]
}

fn run_once(config: &Path, out: &Path) -> (Option<i32>, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_bec-lab"))
        .args(["acceptance", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("bec-lab runs");
    (o.status.code(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn csv_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut tree = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let rel = p.strip_prefix(dir).unwrap().to_path_buf();
                tree.insert(rel, fs::read(&p).unwrap_or_default());
            }
        }
    }
    tree
}

/// Verdict of each criterion as reported on the `criterion NN [PASS|FAIL]` lines.
fn verdicts(stderr: &str) -> BTreeMap<u32, (bool, String)> {
    stderr
        .lines()
        .filter_map(|l| {
            let rest = l.strip_prefix("criterion ")?;
            let (id, rest) = rest.trim_start().split_once(' ')?;
            let passed = rest.starts_with("[PASS]");
            let summary = rest.split_once(": ").map_or("", |(_, s)| s).to_string();
            Some((id.parse().ok()?, (passed, summary)))
        })
        .collect()
}

fn main() -> ExitCode {
    let bad_tol: Vec<_> = pinned_tolerances().into_iter().filter(|(_, got, want)| got != want).collect();
    println!(
        "tolerances [{}] {} pinned values checked{}",
        if bad_tol.is_empty() { "PASS" } else { "FAIL" },
        pinned_tolerances().len(),
        if bad_tol.is_empty() { String::new() } else { format!("; drifted: {bad_tol:?}") }
    );

    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance.toml");
    let scratch = tempfile::TempDir::new().expect("scratch dir");
    let (dir_a, dir_b) = (scratch.path().join("a"), scratch.path().join("b"));
    let (code_a, err_a) = run_once(&config, &dir_a);
    let (code_b, _) = run_once(&config, &dir_b);
    let first = verdicts(&err_a);
    let trees_equal = csv_tree(&dir_a) == csv_tree(&dir_b) && !csv_tree(&dir_a).is_empty();

    let mut all_pass = bad_tol.is_empty();
    for id in 1..=11u32 {
        let (passed, summary) = first
            .get(&id)
            .cloned()
            .unwrap_or((false, "no verdict reported".to_string()));
        all_pass &= passed;
        println!("{}", line(id, passed, &summary));
    }
    let exits_clean = code_a == Some(0) && code_b == Some(0);
    let det_pass = trees_equal && exits_clean;
    all_pass &= det_pass;
    println!(
        "{}",
        line(
            12,
            det_pass,
            &format!(
                "two processes: CSV trees {}; exit statuses {:?}, {:?}",
                if trees_equal { "identical" } else { "differ" },
                code_a,
                code_b
            )
        )
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
