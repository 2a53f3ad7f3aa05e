use std::path::Path;
use std::process::{Command, Output};

fn stochint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.toml");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn list_integrands_shows_library_and_flags() {
    let out = stochint(&["list-integrands"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("name,parameters,h2,pathwise_continuous,formula")
    );
    let row = |name: &str| {
        text.lines()
            .find(|l| l.starts_with(&format!("{name},")))
            .unwrap_or_else(|| panic!("no row for {name}"))
            .to_string()
    };
    for name in ["const", "wiener", "sin-of-w", "exp-w-squared"] {
        row(name);
    }
    assert_eq!(row("exp-w-squared").split(',').nth(2), Some("false"));
    assert_eq!(row("const").split(',').nth(2), Some("true"));
}

#[test]
fn zero_integrand_run_passes_with_zero_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = write_config(
        dir.path(),
        "paths = 50\nlevels = [2, 6]\nchecks = [\"continuity\"]\n[integrand]\nkind = \"const\"\nparams = [0.0]\n",
    );
    let out = stochint(&[
        "run",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(out_dir.join("continuity.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("level,mean_max_increment,se"));
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(&fields[1..], ["0", "0"]);
    }
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(
        summary,
        "name,statistic,tolerance,passed\ncontinuity,0,0,true\n"
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["integrand"], "const(0)");
    assert!(manifest["version"].is_string());
}

#[test]
fn invalid_level_range_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = stochint(&["run", "--levels", "8:4", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!out_dir.exists());
}

#[test]
fn inapplicable_isometry_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = write_config(
        dir.path(),
        "checks = [\"isometry\"]\n[integrand]\nkind = \"exp-w-squared\"\n",
    );
    let out = stochint(&[
        "run",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn failing_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    // a zero threshold cannot be met by a random integrand
    let config = write_config(
        dir.path(),
        "paths = 200\nlevels = [3, 6]\nchecks = [\"uniqueness\"]\n[thresholds]\nuniqueness = 0.0\n",
    );
    let out = stochint(&[
        "run",
        "--config",
        &config,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let summary = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().ends_with(",false"));
}

#[test]
fn flag_overrides_and_hex_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (seed, out) in [("0x2a", &a), ("42", &b)] {
        let status = stochint(&[
            "run",
            "--seed",
            seed,
            "--paths",
            "40",
            "--levels",
            "3:5",
            "--check",
            "convergence,continuity",
            "--out",
            out.to_str().unwrap(),
        ])
        .status;
        assert!(status.code() == Some(0) || status.code() == Some(1));
    }
    for file in [
        "convergence.csv",
        "continuity.csv",
        "summary.csv",
        "manifest.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let conv = std::fs::read_to_string(a.join("convergence.csv")).unwrap();
    assert!(conv.starts_with("level,eps,p_hat,se,ky_fan\n"));
    assert_eq!(conv.lines().count(), 1 + 3 * 4);
}

#[test]
fn dump_paths_writes_one_csv_per_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochint(&[
        "dump-paths",
        "--seed",
        "7",
        "--paths",
        "3",
        "--levels",
        "1:4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for i in 0..3 {
        let csv = std::fs::read_to_string(dir.path().join(format!("path_{i}.csv"))).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,w");
        assert_eq!(lines.len(), 1 + 17);
        assert_eq!(lines[1], "0,0");
    }
}

#[test]
fn unknown_check_is_a_usage_error() {
    let out = stochint(&["run", "--check", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}
