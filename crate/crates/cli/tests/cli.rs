//! End-to-end checks of the `capflow` binary: exit codes, artifacts and
//! determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn capflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capflow")).args(args).current_dir(dir).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) {
    fs::write(dir.join("exp.toml"), format!("schema = 1\n{body}")).unwrap();
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

const PERTURBED: &str = r#"
[flow]
k = 1
theta = "pi/3"
integrator = "rosenbrock"
[preset]
name = "perturbed-cap"
amplitude = 0.05
"#;

#[test]
fn cap_is_a_fixed_point() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(
        tmp.path(),
        "[flow]\nk = 2\ntheta = \"pi/3\"\nintegrator = \"rosenbrock\"\n[preset]\nname = \"cap\"\nr = 1.0\n",
    );
    let out = capflow(&["run", "-c", "exp.toml", "--out", "cap"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&tmp.path().join("cap"));
    assert_eq!(s["status"], "converged");
    assert!((s["r0"].as_f64().unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn volume_preserving_run() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), PERTURBED);
    let out = capflow(&["run", "-c", "exp.toml", "--out", "k1"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(&tmp.path().join("k1"));
    assert!(s["volume_drift"].as_f64().unwrap() < 1e-6);
    assert!(s["cap_residual"].as_f64().unwrap() < 1e-4);
}

#[test]
fn invalid_contact_angle_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), PERTURBED);
    let out = capflow(&["run", "-c", "exp.toml", "--theta", "2.0"], tmp.path());
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theta"));
    assert!(!tmp.path().join("capflow-out").exists());

    write_config(tmp.path(), &PERTURBED.replace("amplitude", "amplitud"));
    let out = capflow(&["run", "-c", "exp.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn early_stop_is_a_timeout() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), PERTURBED);
    let out = capflow(&["run", "-c", "exp.toml", "--t-max", "0.01"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(summary(&tmp.path().join("capflow-out"))["status"], "timeout");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(
        tmp.path(),
        "[grid]\nm_beta = 120\n[flow]\nk = 2\ntheta = 0.9\nintegrator = \"rosenbrock\"\n\
         [preset]\nname = \"random\"\namplitude = 0.1\nseed = 11\n[output]\nsnapshot_every = 50\n",
    );
    for dir in ["a", "b"] {
        let out = capflow(&["run", "-c", "exp.toml", "--out", dir], tmp.path());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    // config.toml records the output directory and differs between the two.
    for file in ["monitors.csv", "functionals.csv", "summary.json"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
    let snaps = fs::read_dir(tmp.path().join("a/snapshots")).unwrap().count();
    assert!(snaps >= 2);
}

#[test]
fn analyze_reproduces_the_functionals_rows() {
    let tmp = tempfile::tempdir().unwrap();
    write_config(tmp.path(), &format!("{PERTURBED}\n[output]\nsnapshot_every = 100\n"));
    assert_eq!(capflow(&["run", "-c", "exp.toml", "--out", "r"], tmp.path()).status.code(), Some(0));
    let mut snaps: Vec<_> = fs::read_dir(tmp.path().join("r/snapshots"))
        .unwrap()
        .map(|e| e.unwrap().path().display().to_string())
        .collect();
    snaps.sort();
    let mut args = vec!["analyze"];
    args.extend(snaps.iter().map(String::as_str));
    let out = capflow(&args, tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let analyzed = String::from_utf8(out.stdout).unwrap();
    let recorded = fs::read_to_string(tmp.path().join("r/functionals.csv")).unwrap();
    let first = |s: &str| s.lines().nth(2).unwrap().to_string();
    assert_eq!(first(&analyzed), first(&recorded));
    assert_eq!(analyzed.lines().count(), snaps.len() + 2);
}

#[test]
fn presets_list_and_gate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = capflow(&["presets"], tmp.path());
    let listing = String::from_utf8(out.stdout).unwrap();
    for name in ["cap", "perturbed-cap", "blend", "random"] {
        assert!(listing.contains(name));
    }
    let ok = capflow(&["presets", "--check", "blend:theta_a=0.6,theta_b=1.2,weight=0.5", "--theta", "pi/4"], tmp.path());
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = capflow(&["presets", "--check", "perturbed-cap:amplitude=-0.6"], tmp.path());
    assert_eq!(bad.status.code(), Some(64));
}
