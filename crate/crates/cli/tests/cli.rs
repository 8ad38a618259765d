use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sticky(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sticky"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small interval model so the oracle stages stay fast.
fn small_interval(dir: &Path) -> PathBuf {
    let path = dir.join("small.json");
    let body = r#"{
        "domain": { "kind": "interval", "a": 0.0, "b": 1.0 },
        "V": { "form": "Zero" },
        "W": { "form": "Zero" },
        "gamma": 0.5,
        "delta": 0.0,
        "collar_s0": 0.25,
        "grid": { "n_interior": 40 }
    }"#;
    std::fs::write(&path, body).unwrap();
    path
}

const FAST: [&str; 6] = ["--r-grid", "1e-2:10:5", "--trials", "100", "--restarts", "8"];

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_interval(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = [&["verify-sp", "--svg"][..], &FAST[..]].concat();
    let ra = sticky(&args, &cfg, &a);
    let rb = sticky(&args, &cfg, &b);
    assert_eq!(ra.status.code(), Some(0), "{}", stderr(&ra));
    assert_eq!(rb.status.code(), Some(0));
    for name in ["verify_sp.csv", "verify_sp.json", "verify_sp.svg"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn halved_rate_is_refuted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_interval(dir.path());
    let args = [&["verify-sp", "--rate-scale", "0.5"][..], &FAST[..]].concat();
    let o = sticky(&args, &cfg, dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("verification failed"));
}

#[test]
fn weak_poincare_passes_on_small_interval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_interval(dir.path());
    let args = [&["verify-wp"][..], &FAST[..]].concat();
    let o = sticky(&args, &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn bad_grids_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_interval(dir.path());
    for grid in ["1e-2:1:0", "1:1e-2:4", "abc", "1e-2:1", "0:1:3"] {
        let o = sticky(&["bounds", "--r-grid", grid], &cfg, dir.path());
        assert_eq!(o.status.code(), Some(2), "{grid}: {}", stderr(&o));
    }
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("broken.json", "{ \"domain\": "),
        (
            "unknown.json",
            r#"{ "domain": { "kind": "torus" }, "V": { "form": "Zero" }, "W": { "form": "Zero" }, "gamma": 1, "delta": 1 }"#,
        ),
        (
            "negative.json",
            r#"{ "domain": { "kind": "interval", "a": 0, "b": 1 }, "V": { "form": "Zero" }, "W": { "form": "Zero" }, "gamma": -1, "delta": 1 }"#,
        ),
    ] {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        let o = sticky(&["model-info"], &path, dir.path());
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
    }
    let o = sticky(&["model-info"], &dir.path().join("missing.json"), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interval_without_boundary_energy_uses_b1() {
    let dir = tempfile::tempdir().unwrap();
    let o = sticky(&["bounds"], &configs().join("interval.json"), dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("beta path B1, alpha path B2"), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn strip_uses_boundary_compositions() {
    let dir = tempfile::tempdir().unwrap();
    let o = sticky(&["bounds"], &configs().join("strip.json"), dir.path());
    assert!(stderr(&o).contains("beta path E1, alpha path E2'"), "{}", stderr(&o));
}

#[test]
fn quadratic_potential_is_hyperbounded() {
    let dir = tempfile::tempdir().unwrap();
    let o = sticky(&["bounds"], &configs().join("half_line_tau2.json"), dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("hyperbounded"), "{}", stderr(&o));
    let rates: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rates.json")).unwrap()).unwrap();
    assert!(rates["beta"].is_object());
}

#[test]
fn model_info_reports_theta() {
    let dir = tempfile::tempdir().unwrap();
    let o = sticky(&["model-info"], &configs().join("interval.json"), dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((doc["theta"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn mc_matches_theta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_interval(dir.path());
    let o = sticky(&["mc", "--seed", "3"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("mc.csv")).unwrap();
    assert_eq!(csv.lines().count(), 33);
}
