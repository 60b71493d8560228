//! Experiment configuration: a TOML document with a versioned schema.
//!
//! Precedence, lowest first: built-in defaults, the config file, then
//! `key=value` overrides (dotted paths such as `flow.k=2`), which is how the
//! CLI applies its flags.
//!
//! ```toml
//! schema = 1
//!
//! [grid]
//! n = 2
//! mode = "axisymmetric"   # or "full2d" (n = 2 only)
//! m_beta = 400
//! m_xi = 0                # azimuths, full2d only
//!
//! [flow]
//! k = 2
//! theta = "pi/3"          # radians, or "pi/<d>" / "<a>pi/<b>"
//! integrator = "rosenbrock"
//! t_max = 20.0
//!
//! [preset]
//! name = "perturbed-cap"
//! amplitude = 0.05
//!
//! [output]
//! dir = "runs/demo"
//! snapshot_every = 500
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::capgeom::{GridMode, HalfSphereGrid};
use crate::error::{Error, Result};
use crate::flow::{ConePolicy, FlowConfig, Integrator};
use crate::presets::Preset;

/// The schema version this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub grid: GridSection,
    pub flow: FlowSection,
    pub preset: Preset,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    pub mode: GridMode,
    pub m_beta: usize,
    pub m_xi: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 2, mode: GridMode::Axisymmetric, m_beta: 400, m_xi: 0 }
    }
}

/// Flow parameters; omitted fields take the [`FlowConfig::new`] defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub k: usize,
    #[serde(deserialize_with = "angle")]
    pub theta: f64,
    pub dt_safety: Option<f64>,
    pub t_max: Option<f64>,
    pub speed_tol: Option<f64>,
    pub f_stddev_tol: Option<f64>,
    pub cone_policy: Option<ConePolicy>,
    pub dt_floor: Option<f64>,
    pub keep_every: Option<u64>,
    pub integrator: Option<Integrator>,
    pub step_tol: Option<f64>,
    pub dt_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Snapshot every this many steps; 0 writes only the first and last.
    pub snapshot_every: u64,
    /// Functionals row every this many steps.
    pub functionals_every: u64,
    /// Also write OBJ meshes next to the snapshots (`n = 2` only).
    pub obj: bool,
    /// Azimuths used to revolve axisymmetric meshes.
    pub obj_segments: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("capflow-out"),
            snapshot_every: 0,
            functionals_every: 1,
            obj: false,
            obj_segments: 64,
        }
    }
}

/// Radians as a number, or `"pi/<d>"`, `"<a>pi/<b>"`, `"<a>pi"`.
fn angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Text(s) => parse_angle(&s).map_err(serde::de::Error::custom),
    }
}

/// Parses an angle written as radians or as a rational multiple of `pi`.
/// `"pi/2"` maps to exactly [`std::f64::consts::FRAC_PI_2`].
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let bad = || format!("cannot read `{s}` as an angle; use radians or forms like pi/3, 2pi/5");
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let coeff = match num.strip_suffix("pi").ok_or_else(bad)? {
        "" => 1.0,
        c => c.trim_end_matches('*').parse::<f64>().map_err(|_| bad())?,
    };
    if coeff == 1.0 && den == 2.0 {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    Ok(coeff * std::f64::consts::PI / den)
}

impl ExperimentConfig {
    /// Parses `text`, applies `overrides` (`"section.key=value"`, values in
    /// TOML syntax with bare strings allowed) and validates the result.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_error(e))?;
        let cfg: Self = if overrides.is_empty() {
            toml::from_str(text).map_err(config_error)?
        } else {
            for o in overrides {
                apply_override(&mut table, o)?;
            }
            toml::Value::Table(table).try_into().map_err(config_error)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { field: None, message: format!("{}: {e}", path.display()) })?;
        Self::from_toml(&text, overrides)
    }

    /// The resolved configuration as TOML, for the run directory.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::config(
                "schema",
                format!("schema version {} is not supported (expected {SCHEMA_VERSION})", self.schema),
            ));
        }
        let grid = self.grid()?;
        let flow = self.flow_config();
        flow.validate()?;
        if flow.k > grid.n() {
            return Err(Error::config("flow.k", format!("k = {} exceeds n = {}", flow.k, grid.n())));
        }
        if flow.integrator == Integrator::Rosenbrock && grid.mode() != GridMode::Axisymmetric {
            return Err(Error::config("flow.integrator", "rosenbrock needs an axisymmetric grid"));
        }
        if self.output.functionals_every == 0 {
            return Err(Error::config("output.functionals_every", "must be at least 1"));
        }
        if self.output.obj && grid.n() != 2 {
            return Err(Error::config("output.obj", "mesh export needs n = 2"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<HalfSphereGrid> {
        let g = &self.grid;
        HalfSphereGrid::new(g.n, g.mode, g.m_beta, g.m_xi, self.flow.theta)
    }

    pub fn flow_config(&self) -> FlowConfig {
        let f = &self.flow;
        let mut c = FlowConfig::new(f.k, f.theta);
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(x) = f.$field { c.$field = x; } )* };
        }
        set!(dt_safety, t_max, speed_tol, f_stddev_tol, cone_policy, dt_floor, keep_every, integrator, step_tol, dt_max);
        c
    }
}

fn config_error(e: toml::de::Error) -> Error {
    Error::Config { field: None, message: e.to_string().trim_end().to_string() }
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::config(item, "override must look like section.key=value"))?;
    let path = path.trim();
    let raw = raw.trim();
    // Bare words (`rosenbrock`, `pi/3`) are taken as strings.
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::config(path, "empty key"))?;
    let mut cur = table;
    for k in keys {
        cur = cur
            .entry(k)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::config(path, format!("`{k}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema = 1
[flow]
k = 1
theta = "pi/3"
[preset]
name = "cap"
"#;

    #[test]
    fn defaults_fill_missing_sections() {
        let c = ExperimentConfig::from_toml(BASE, &[]).unwrap();
        assert_eq!(c.grid, GridSection::default());
        assert_eq!(c.output, OutputSection::default());
        assert!((c.flow.theta - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert_eq!(c.flow_config().speed_tol, 1e-7);
    }

    #[test]
    fn overrides_beat_the_file() {
        let o = ["flow.k=2".to_string(), "flow.integrator=rosenbrock".into(), "grid.m_beta=50".into()];
        let c = ExperimentConfig::from_toml(BASE, &o).unwrap();
        assert_eq!(c.flow.k, 2);
        assert_eq!(c.flow_config().integrator, Integrator::Rosenbrock);
        assert_eq!(c.grid.m_beta, 50);
    }

    #[test]
    fn rejections_name_the_field() {
        let bad_theta = ExperimentConfig::from_toml(BASE, &["flow.theta=2.0".into()]).unwrap_err();
        assert!(bad_theta.to_string().contains("theta"), "{bad_theta}");
        let typo = ExperimentConfig::from_toml(&BASE.replace("k = 1", "kk = 1"), &[]).unwrap_err();
        assert!(typo.to_string().contains("kk"), "{typo}");
        assert!(typo.to_string().contains("line"), "{typo}");
        let schema = ExperimentConfig::from_toml(&BASE.replace("schema = 1", "schema = 9"), &[]).unwrap_err();
        assert!(schema.to_string().contains("schema"));
    }

    #[test]
    fn angles_parse() {
        assert_eq!(parse_angle("pi/2").unwrap(), std::f64::consts::FRAC_PI_2);
        assert!((parse_angle("2pi/5").unwrap() - 0.4 * std::f64::consts::PI).abs() < 1e-15);
        assert!((parse_angle("0.3").unwrap() - 0.3).abs() < 1e-15);
        assert!(parse_angle("half").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = ExperimentConfig::from_toml(BASE, &["preset.name=random".into(), "preset.amplitude=0.1".into()]).unwrap();
        let back = ExperimentConfig::from_toml(&c.to_toml(), &[]).unwrap();
        assert_eq!(back, c);
    }
}
