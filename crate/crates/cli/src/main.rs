//! `capflow`: run flows from TOML configs, run the acceptance matrix, list
//! initial-data presets and recompute functionals from snapshots.
//!
//! Exit codes: 0 converged (or success), 2 timeout, 3 cone abort, 64 bad
//! configuration or input, 1 anything else.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use capflow::acceptance::{acceptance_suite, table_csv, table_json, AcceptanceOptions};
use capflow::capgeom::export::{read_snapshot, resample};
use capflow::capgeom::HalfSphereGrid;
use capflow::config::{parse_angle, ExperimentConfig};
use capflow::experiment::{exit_code_for, run_experiment, EXIT_CONFIG};
use capflow::functionals::{report, FunctionalReport, FUNCTIONALS_SCHEMA};
use capflow::presets::CATALOG;
use capflow::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "capflow", version, about = "Capillary curvature flow simulator and audit harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run(RunArgs),
    /// Run the acceptance matrix and print one row per criterion.
    Accept {
        /// Polar nodes of the finest grid.
        #[arg(long, default_value_t = AcceptanceOptions::default().m_beta)]
        m_beta: usize,
        /// Double the polar spacing.
        #[arg(long)]
        degraded: bool,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
    },
    /// List the initial-data presets, or check one against its validity gate.
    Presets {
        /// Generate and validate this preset (`name` or `name:key=value,...`).
        #[arg(long)]
        check: Option<String>,
        #[arg(long, default_value = "pi/3")]
        theta: String,
        #[arg(long, default_value_t = 400)]
        m_beta: usize,
    },
    /// Recompute functionals from stored snapshots and print them as CSV.
    Analyze {
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Override a config value, e.g. `--set flow.k=2`. Repeatable; applied
    /// after the file and before the flags below.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Contact angle: radians or `pi/3`-style.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    m_beta: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    /// `rk2` or `rosenbrock`.
    #[arg(long)]
    integrator: Option<String>,
    /// Seed of the `random` preset.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
    Json,
}

impl RunArgs {
    fn overrides(&self) -> Vec<String> {
        let mut o = self.overrides.clone();
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                o.push(format!("{key}={v}"));
            }
        };
        push("flow.k", self.k.map(|x| x.to_string()));
        push("flow.theta", self.theta.clone().map(|t| format!("\"{t}\"")));
        push("grid.m_beta", self.m_beta.map(|x| x.to_string()));
        push("flow.t_max", self.t_max.map(|x| format!("{x:?}")));
        push("flow.integrator", self.integrator.clone().map(|s| format!("\"{s}\"")));
        push("preset.seed", self.seed.map(|x| x.to_string()));
        push("output.dir", self.out.as_ref().map(|p| format!("{:?}", p.display().to_string())));
        o
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run(&args),
        Command::Accept { m_beta, degraded, format } => accept(m_beta, degraded, format),
        Command::Presets { check, theta, m_beta } => presets(check.as_deref(), &theta, m_beta),
        Command::Analyze { snapshots } => analyze(&snapshots),
    };
    ExitCode::from(code as u8)
}

fn report_error(e: &Error) -> i32 {
    eprintln!("capflow: {e}");
    exit_code_for(e)
}

fn run(args: &RunArgs) -> i32 {
    let config = match ExperimentConfig::from_file(&args.config, &args.overrides()) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    match run_experiment(&config) {
        Ok(outcome) => {
            let s = &outcome.summary;
            println!(
                "{:?} after {} steps, t = {:.6}: r0 = {:.8}, cap residual {:.2e}, ‖f‖∞ {:.2e}",
                s.status, s.steps, s.time, s.r0, s.cap_residual, s.final_speed
            );
            if let Some(why) = &s.abort {
                println!("abort: {why}");
            }
            println!("artifacts in {}", outcome.dir.display());
            outcome.exit_code()
        }
        Err(e) => report_error(&e),
    }
}

fn accept(m_beta: usize, degraded: bool, format: TableFormat) -> i32 {
    let mut opts = AcceptanceOptions { m_beta };
    if degraded {
        opts = opts.degraded();
    }
    let rows = acceptance_suite(opts);
    match format {
        TableFormat::Text => rows.iter().for_each(|r| println!("{}", r.line())),
        TableFormat::Csv => print!("{}", table_csv(&rows)),
        TableFormat::Json => println!("{}", table_json(&rows)),
    }
    if rows.iter().all(|r| r.passed) {
        0
    } else {
        1
    }
}

/// Parses `name` or `name:key=value,key=value` into a preset.
fn preset_from_spec(spec: &str) -> Result<capflow::presets::Preset> {
    let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
    let mut doc = format!("schema = 1\n[flow]\nk = 1\ntheta = 1.0\n[preset]\nname = \"{name}\"\n");
    for kv in params.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::config(kv, "expected key=value"))?;
        doc.push_str(&format!("{} = {}\n", k.trim(), v.trim()));
    }
    Ok(ExperimentConfig::from_toml(&doc, &[])?.preset)
}

fn presets(check: Option<&str>, theta: &str, m_beta: usize) -> i32 {
    let Some(spec) = check else {
        for (name, params) in CATALOG {
            println!("{name:<14} {params}");
        }
        return 0;
    };
    let result = (|| {
        let theta = parse_angle(theta).map_err(|m| Error::config("theta", m))?;
        let preset = preset_from_spec(spec)?;
        let grid = HalfSphereGrid::axisymmetric(2, m_beta, theta)?;
        preset.generate(&grid)?;
        Ok::<_, Error>(preset)
    })();
    match result {
        Ok(p) => {
            println!("{} passes its validity gate at θ = {theta}, m_beta = {m_beta}", p.name());
            0
        }
        Err(e) => report_error(&e),
    }
}

fn analyze(paths: &[PathBuf]) -> i32 {
    let mut out = io::stdout().lock();
    let mut header_n = None;
    for path in paths {
        let row = (|| {
            let file = File::open(path).map_err(|e| Error::Config {
                field: None,
                message: format!("{}: {e}", path.display()),
            })?;
            let snap = read_snapshot(BufReader::new(file))?;
            let rep = report(&resample(&snap, snap.k)?, snap.field.time)?;
            Ok::<_, Error>(rep)
        })();
        match row {
            Ok(rep) => {
                if header_n.is_none() {
                    let _ = writeln!(out, "{FUNCTIONALS_SCHEMA}");
                    let _ = writeln!(out, "{}", FunctionalReport::csv_header(rep.n));
                    header_n = Some(rep.n);
                } else if header_n != Some(rep.n) {
                    eprintln!("capflow: {}: dimension differs from the first snapshot", path.display());
                    return EXIT_CONFIG;
                }
                let _ = writeln!(out, "{}", rep.csv_row());
            }
            Err(e) => {
                eprintln!("capflow: {}: {e}", path.display());
                return exit_code_for(&e);
            }
        }
    }
    0
}
