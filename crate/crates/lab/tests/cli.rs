use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use csl_lab::error::exit;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csl-lab"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn ordering_fixture_reports_inverted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&["ordering", "--config", fixture("ordering.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let j: Value = serde_json::from_slice(&fs::read(out.join("ordering.json")).unwrap()).unwrap();
    assert_eq!(j["ordering"], "Inverted");
    let v_ab = j["v_AB"].as_f64().unwrap();
    assert!((v_ab / 299_792_458.0 - 2.0).abs() < 1e-15);
    assert!(j["delta_t_boosted"].as_f64().unwrap() < 0.0);
}

#[test]
fn collapse_ten_thousand_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    let o = run(&[
        "collapse",
        "--config",
        fixture("born.toml").to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let s: Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["n_traj"], 10_000);
    assert_eq!(s["seed"], 11);
    let f0 = s["frequencies"][0].as_f64().unwrap();
    assert!((f0 - 0.3).abs() <= 0.0183, "{f0}");
    let rows = fs::read_to_string(out.join("outcomes.csv")).unwrap().lines().count();
    assert_eq!(rows, 10_001);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed: 11"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        "subcommand = \"collapse\"\nseed = 5\n[collapse]\ntrajectories = 200\ntraces = 2\n",
    );
    let dirs: Vec<PathBuf> = ["a", "b"].iter().map(|d| tmp.path().join(d)).collect();
    for (d, extra) in dirs.iter().zip([&[][..], &["--sequential"][..]]) {
        let mut args = vec!["collapse", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap(), "--quiet"];
        args.extend_from_slice(extra);
        assert_eq!(code(&run(&args)), exit::OK);
    }
    let mut names: Vec<String> =
        fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["config.toml", "manifest.txt", "outcomes.csv", "summary.json", "trace_0.csv", "trace_1.csv"]);
    for n in names.iter().filter(|n| *n != "manifest.txt") {
        assert_eq!(fs::read(dirs[0].join(n)).unwrap(), fs::read(dirs[1].join(n)).unwrap(), "{n}");
    }
    let strip = |p: &Path| -> Vec<String> {
        fs::read_to_string(p.join("manifest.txt"))
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("created_unix"))
            .map(String::from)
            .collect()
    };
    assert_eq!(strip(&dirs[0]), strip(&dirs[1]));
}

#[test]
fn written_config_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(code(&run(&["epr", "--seed", "3", "--trajectories", "50", "--out", a.to_str().unwrap(), "--quiet"])), 0);
    let cfg = a.join("config.toml");
    assert_eq!(code(&run(&["epr", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--quiet"])), 0);
    for n in ["epr.csv", "summary.json", "config.toml"] {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n}");
    }
}

#[test]
fn exit_codes_per_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();

    // Usage and config errors.
    assert_eq!(code(&run(&["teleport", "--seed", "1"])), exit::CONFIG);
    assert_eq!(code(&run(&["collapse", "--out", out])), exit::CONFIG);
    let bare = write(tmp.path(), "bare.toml", "subcommand = \"collapse\"\nseed = 1\n[collapse]\ndt = 0.001\n");
    let o = run(&["collapse", "--config", bare.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), exit::CONFIG);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("dt") && err.contains("unit"), "{err}");
    let other = write(tmp.path(), "other.toml", "subcommand = \"epr\"\nseed = 1\n");
    assert_eq!(code(&run(&["collapse", "--config", other.to_str().unwrap(), "--out", out])), exit::CONFIG);
    assert_eq!(code(&run(&["mott", "--seed", "1", "--trajectories", "4", "--out", out])), exit::CONFIG);

    // Rejected by the numerical core.
    let small_gap = write(tmp.path(), "gap.toml", "subcommand = \"epr\"\nseed = 1\n[epr]\napparatus_mass_gap = 5.0\n");
    assert_eq!(code(&run(&["epr", "--config", small_gap.to_str().unwrap(), "--out", out])), exit::INPUT);
    let unresolved =
        write(tmp.path(), "nz.toml", "subcommand = \"noise\"\nseed = 1\n[noise]\nt_c = \"1 ms\"\ndt = \"1 ms\"\n");
    assert_eq!(code(&run(&["noise", "--config", unresolved.to_str().unwrap(), "--out", out])), exit::INPUT);

    // Step too large for the integrator.
    let stiff = write(
        tmp.path(),
        "stiff.toml",
        "subcommand = \"collapse\"\nseed = 1\n[collapse]\ngamma = \"1e4 1/s\"\ndt = \"1 ms\"\ntrajectories = 2\n",
    );
    assert_eq!(code(&run(&["collapse", "--config", stiff.to_str().unwrap(), "--out", out])), exit::NUMERICAL);

    // I/O.
    assert_eq!(code(&run(&["collapse", "--config", "/nonexistent/x.toml", "--out", out])), exit::IO);
    let blocker = write(tmp.path(), "file", "");
    let under_file = blocker.join("sub");
    assert_eq!(code(&run(&["ordering", "--seed", "1", "--out", under_file.to_str().unwrap()])), exit::IO);
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}
