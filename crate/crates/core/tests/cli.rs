use std::fs;
use std::path::{Path, PathBuf};

use vbdist::cli::{self, cmd_check, cmd_coords, cmd_regularize, RunConfig, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use vbdist::scene::SceneSpec;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn config(out: &Path, scene: Option<&str>) -> RunConfig {
    RunConfig {
        out: out.to_path_buf(),
        scene: scene.map(|s| SceneSpec::from_json(s).unwrap()),
        ..RunConfig::default()
    }
}

fn run(args: &[&str]) -> i32 {
    cli::run(std::iter::once("vbdist").chain(args.iter().copied()))
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["check", "--out", out]), EXIT_OK);
    assert!(dir.path().join("report.json").exists());
    assert_eq!(run(&["check", "--out", out, "--tol", "*=1e-20"]), EXIT_FAILED);
    assert_eq!(run(&["check", "--out", out, "--tol", "vdist.round_trip=1e-20", "--only", "vdist.round_trip"]), EXIT_FAILED);
    assert_eq!(run(&["check", "--out", out, "--only", "no.such.invariant"]), EXIT_USAGE);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"manifold\": ").unwrap();
    assert_eq!(run(&["check", "--out", out, "--scene", bad.to_str().unwrap()]), EXIT_USAGE);
    assert_eq!(run(&["check", "--out", out, "--scene", "/no/such/scene.json"]), EXIT_USAGE);
    assert_eq!(run(&["check", "--out", out, "--seed", "banana"]), EXIT_USAGE);
}

#[test]
fn forced_failures_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), None);
    cfg.tolerances = vec![("smoothing.oracle".into(), 1e-20)];
    let report = cmd_check(&cfg, &["smoothing.oracle".into(), "geometry.deriv_constants".into()]).unwrap();
    assert!(!report.passed);
    let failed: Vec<_> = report.failures().map(|o| o.name.as_str()).collect();
    assert_eq!(failed, vec!["smoothing.oracle"]);
    let json = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(json.contains("\"smoothing.oracle\""));
    assert!(json.contains("\"max_deviation\""));
}

#[test]
fn check_with_scene_adds_scene_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), None);
    cfg.scene = Some(SceneSpec::load(&data("mobius.json")).unwrap());
    let report = cmd_check(&cfg, &["scene.round_trip".into()]).unwrap();
    assert!(report.passed);
    assert!(report.outcome("scene.round_trip").unwrap().max_deviation.unwrap() <= 1e-8);
}

#[test]
fn coords_of_a_line_bundle_delta_is_a_spike() {
    let dir = tempfile::tempdir().unwrap();
    let scene = r#"{"manifold":{"kind":"circle","n":16},"bundle":{"kind":"trivial","rank":1},
        "terms":[{"section":{"generator":0},"coefficient":{"atoms":[{"kind":"delta","node":5}]}}]}"#;
    cmd_coords(&config(dir.path(), Some(scene))).unwrap();
    let csv = fs::read_to_string(dir.path().join("coord_0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("node,x,pairing"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 16);
    for row in rows {
        let value: f64 = row[2].parse().unwrap();
        if row[0] == "5" {
            assert_eq!(value, 1.0);
        } else {
            assert_eq!(value, 0.0);
        }
    }
}

#[test]
fn coords_of_zero_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let scene = r#"{"manifold":{"kind":"circle","n":16},"bundle":{"kind":"mobius"}}"#;
    cmd_coords(&config(dir.path(), Some(scene))).unwrap();
    for i in 0..2 {
        let csv = fs::read_to_string(dir.path().join(format!("coord_{i}.csv"))).unwrap();
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",0.0000000000000000e0")));
    }
}

#[test]
fn mobius_coords_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["coords", "--scene", data("mobius.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    for i in 0..2 {
        let got = fs::read(dir.path().join(format!("coord_{i}.csv"))).unwrap();
        let want = fs::read(data(&format!("golden/mobius_coord_{i}.csv"))).unwrap();
        assert!(got == want, "coord_{i}.csv differs from the golden file");
    }
}

#[test]
fn regularize_smooth_input_converges() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), None);
    cfg.scene = Some(SceneSpec::load(&data("sine_line.json")).unwrap());
    let result = cmd_regularize(&cfg, &[0.4, 0.2, 0.1], "gaussian", false).unwrap();
    let errors = result.errors.unwrap();
    assert!(errors.windows(2).all(|w| w[1] < w[0]));
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("eps,sup_error"));
    assert_eq!(csv.lines().count(), 4);
    for e in ["0.4", "0.2", "0.1"] {
        assert!(dir.path().join(format!("smoothed_eps_{e}.csv")).exists());
    }
}

#[test]
fn regularize_delta_has_no_error_column() {
    let dir = tempfile::tempdir().unwrap();
    let scene = r#"{"manifold":{"kind":"circle","n":128},"bundle":{"kind":"mobius"},
        "terms":[{"section":{"generator":1},"coefficient":{"atoms":[{"kind":"delta","node":40,"order":1}]}}]}"#;
    let result = cmd_regularize(&config(dir.path(), Some(scene)), &[0.5, 0.25], "von-mises", true).unwrap();
    assert!(result.errors.is_none());
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv, "eps\n5.0000000000000000e-1\n2.5000000000000000e-1\n");
    assert!(dir.path().join("smoothed_eps_0.25.csv").exists());
    assert!(dir.path().join("kernel_eps_0.5.csv").exists());
}

#[test]
fn regularize_empty_eps_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = run(&["regularize", "--scene", data("sine_line.json").to_str().unwrap(), "--out", out, "--eps", ""]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(fs::read_to_string(dir.path().join("convergence.csv")).unwrap(), "eps,sup_error\n");
}

#[test]
fn regularize_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let scene = data("sine_line.json");
    let scene = scene.to_str().unwrap();
    assert_eq!(run(&["regularize", "--scene", scene, "--out", out, "--kernel", "bump"]), EXIT_USAGE);
    assert_eq!(run(&["regularize", "--scene", scene, "--out", out, "--eps", "0.001"]), EXIT_USAGE);
    assert_eq!(run(&["regularize", "--scene", scene, "--out", out, "--eps", "-1"]), EXIT_USAGE);
    assert_eq!(run(&["regularize", "--out", out]), EXIT_USAGE);
}

#[test]
fn identical_runs_write_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let scene = data("sine_line.json");
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(&["check", "--out", out, "--seed", "7", "--resolution", "64"]), EXIT_OK);
        assert_eq!(run(&["regularize", "--scene", scene.to_str().unwrap(), "--out", out]), EXIT_OK);
    }
    for name in ["report.json", "convergence.csv", "smoothed_eps_0.1.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
