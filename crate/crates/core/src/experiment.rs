//! One configured run with its artifacts on disk:
//!
//! * `config.toml`, the resolved configuration
//! * `monitors.csv`, one row per accepted step
//! * `functionals.csv`, one [`FunctionalReport`] row per
//!   `output.functionals_every` steps and at the end
//! * `snapshots/step_<n>.txt` (and `.obj` meshes when enabled)
//! * `summary.json`
//!
//! Everything written is a deterministic function of the configuration;
//! wall-clock time is returned but not written.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::capgeom::export::{write_obj, write_snapshot};
use crate::capgeom::{sample_geometry, HalfSphereGrid, RadialField};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::flow::{run_observed, FlowState, MonitorLog, MonitorStats, RunStatus, RunSummary};
use crate::functionals::{report, FunctionalReport, FUNCTIONALS_SCHEMA};

/// Process exit code for configuration errors.
pub const EXIT_CONFIG: i32 = 64;

/// Machine-readable run summary, written as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub status: RunStatus,
    pub exit_code: i32,
    pub preset: String,
    pub k: usize,
    pub theta: f64,
    pub steps: u64,
    pub time: f64,
    /// Cap radius with the final volume.
    pub r0: f64,
    /// `‖φ_final − φ_cap(r_0)‖_∞`.
    pub cap_residual: f64,
    pub final_speed: f64,
    pub final_f_stddev: f64,
    pub volume_drift: f64,
    pub tainted: bool,
    pub decay_rate: Option<f64>,
    pub abort: Option<String>,
    pub stats: MonitorStats,
}

/// What a finished experiment hands back besides its files.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub run: RunSummary,
    pub dir: PathBuf,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }
}

/// Runs the experiment and writes its artifacts under `config.output.dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let grid = config.grid()?;
    let flow = config.flow_config();
    let initial = config.preset.generate(&grid)?;
    let dir = config.output.dir.clone();
    fs::create_dir_all(dir.join("snapshots"))?;
    fs::write(dir.join("config.toml"), config.to_toml())?;

    let monitors = BufWriter::new(File::create(dir.join("monitors.csv"))?);
    let log = MonitorLog::new(flow.keep_every).with_sink(Box::new(monitors))?;
    let mut functionals = BufWriter::new(File::create(dir.join("functionals.csv"))?);
    writeln!(functionals, "{FUNCTIONALS_SCHEMA}")?;
    writeln!(functionals, "{}", FunctionalReport::csv_header(grid.n()))?;

    let out = &config.output;
    let mut last_written = None;
    let run = run_observed(initial, &grid, &flow, log, |state: &FlowState| {
        let step = state.step_count;
        if step % out.functionals_every == 0 {
            write_functionals(&mut functionals, &grid, &state.field, flow.k)?;
        }
        if step == 0 || (out.snapshot_every > 0 && step % out.snapshot_every == 0) {
            snapshot(&dir, &grid, &state.field, flow.k, step, config)?;
            last_written = Some(step);
        }
        Ok(())
    })?;
    let end = &run.state;
    if end.step_count % out.functionals_every != 0 {
        write_functionals(&mut functionals, &grid, &end.field, flow.k)?;
    }
    if last_written != Some(end.step_count) {
        snapshot(&dir, &grid, &end.field, flow.k, end.step_count, config)?;
    }
    functionals.flush()?;

    let stats = run.stats().clone();
    let last = run.final_row();
    let summary = Summary {
        status: run.status,
        exit_code: run.status.exit_code(),
        preset: config.preset.name().to_string(),
        k: flow.k,
        theta: flow.theta,
        steps: end.step_count,
        time: end.field.time,
        r0: run.r0,
        cap_residual: run.cap_residual,
        final_speed: last.speed_inf,
        final_f_stddev: last.f_stddev,
        volume_drift: stats.volume_drift,
        tainted: end.tainted,
        decay_rate: run.decay_rate,
        abort: run.abort.clone(),
        stats,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Geometry(e.to_string()))?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(Outcome { summary, run, dir })
}

/// Writes a functionals row; slices outside `Γ_n` get a row of `NaN`s with
/// the time so the file stays rectangular.
fn write_functionals(out: &mut impl Write, grid: &HalfSphereGrid, field: &RadialField, k: usize) -> Result<()> {
    let samples = sample_geometry(grid, field, k)?;
    match report(&samples, field.time) {
        Ok(r) => writeln!(out, "{}", r.csv_row())?,
        Err(Error::ConeViolation { .. }) => {
            let cols = FunctionalReport::csv_header(grid.n()).split(',').count();
            let mut row = format!("{:e}", field.time);
            row.push_str(&",NaN".repeat(cols - 1));
            writeln!(out, "{row}")?;
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn snapshot(
    dir: &Path,
    grid: &HalfSphereGrid,
    field: &RadialField,
    k: usize,
    step: u64,
    config: &ExperimentConfig,
) -> Result<()> {
    let stem = dir.join("snapshots").join(format!("step_{step:08}"));
    let mut w = BufWriter::new(File::create(stem.with_extension("txt"))?);
    write_snapshot(&mut w, grid, field, k)?;
    w.flush()?;
    if config.output.obj {
        let mut w = BufWriter::new(File::create(stem.with_extension("obj"))?);
        write_obj(&mut w, grid, field, config.output.obj_segments)?;
        w.flush()?;
    }
    Ok(())
}

/// Maps a library error to the documented process exit code.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Config { .. } | Error::Parse { .. } => EXIT_CONFIG,
        // Presets failing their validity gate are invalid input as well.
        Error::ConeViolation { .. } | Error::Boundary(_) => EXIT_CONFIG,
        _ => 1,
    }
}

