//! Artifacts written by `run_experiment`.

use std::fs;

use capflow::capgeom::export::read_snapshot;
use capflow::config::ExperimentConfig;
use capflow::experiment::run_experiment;
use capflow::flow::{RunStatus, MONITORS_SCHEMA};
use capflow::functionals::FUNCTIONALS_SCHEMA;

fn config(dir: &std::path::Path, extra: &[&str]) -> ExperimentConfig {
    let text = r#"
schema = 1
[grid]
m_beta = 80
[flow]
k = 2
theta = "pi/4"
integrator = "rosenbrock"
[preset]
name = "perturbed-cap"
amplitude = 0.08
[output]
snapshot_every = 40
functionals_every = 10
obj = true
obj_segments = 16
"#;
    let mut overrides = vec![format!("output.dir={:?}", dir.display().to_string())];
    overrides.extend(extra.iter().map(|s| s.to_string()));
    ExperimentConfig::from_toml(text, &overrides).unwrap()
}

#[test]
fn artifacts_are_complete_and_consistent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_experiment(&config(tmp.path(), &[])).unwrap();
    assert_eq!(out.summary.status, RunStatus::Converged);
    assert_eq!(out.exit_code(), 0);

    let monitors = fs::read_to_string(tmp.path().join("monitors.csv")).unwrap();
    assert_eq!(monitors.lines().next(), Some(MONITORS_SCHEMA));
    assert_eq!(monitors.lines().count() as u64, out.summary.steps + 3);

    let functionals = fs::read_to_string(tmp.path().join("functionals.csv")).unwrap();
    assert_eq!(functionals.lines().next(), Some(FUNCTIONALS_SCHEMA));
    let rows = functionals.lines().count() - 2;
    let steps = out.summary.steps as usize;
    assert_eq!(rows, steps / 10 + 1 + usize::from(steps % 10 != 0));

    let last = format!("step_{:08}", out.summary.steps);
    let snap = tmp.path().join("snapshots").join(format!("{last}.txt"));
    let back = read_snapshot(std::io::BufReader::new(fs::File::open(snap).unwrap())).unwrap();
    assert_eq!(back.field, out.run.state.field);
    assert!(tmp.path().join("snapshots").join(format!("{last}.obj")).exists());
    assert!(tmp.path().join("snapshots/step_00000000.obj").exists());

    let resolved = ExperimentConfig::from_file(&tmp.path().join("config.toml"), &[]).unwrap();
    assert_eq!(resolved, config(tmp.path(), &[]));
}

#[test]
fn timeout_is_reported_with_its_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_experiment(&config(tmp.path(), &["flow.t_max=0.001"])).unwrap();
    assert_eq!(out.summary.status, RunStatus::Timeout);
    assert_eq!(out.exit_code(), 2);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["exit_code"], 2);
}
