//! Plain-text snapshots of one time slice, and triangulated OBJ meshes.
//!
//! A snapshot starts with `# key = value` header lines, then one
//! whitespace-separated column header, then one row per grid node:
//!
//! ```text
//! # capflow-snapshot v1
//! # n = 2
//! # mode = axisymmetric
//! # m_beta = 400
//! # m_xi = 0
//! # theta = 1.0471975511965976
//! # k = 1
//! # time = 0
//! node beta xi phi rho x0 x1 x2 nu0 nu1 nu2 kappa0 kappa1 u u_bar F
//! 0 0e0 0e0 ...
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a snapshot back
//! recovers `φ` bit for bit. `F` is `NaN` at nodes outside `Γ_k`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::grid::{GridMode, HalfSphereGrid, RadialField};
use super::sample::{sample_geometry, SurfaceSamples};
use crate::error::{Error, Result};

pub const SNAPSHOT_SCHEMA: &str = "# capflow-snapshot v1";

/// A time slice read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: HalfSphereGrid,
    pub field: RadialField,
    /// Curvature index the derived columns were computed with.
    pub k: usize,
}

/// Writes the snapshot of `field`, with derived geometry for `F = H_k^{1/k}`.
pub fn write_snapshot(
    out: &mut impl Write,
    grid: &HalfSphereGrid,
    field: &RadialField,
    k: usize,
) -> Result<()> {
    let samples = sample_geometry(grid, field, k)?;
    let n = grid.n();
    writeln!(out, "{SNAPSHOT_SCHEMA}")?;
    writeln!(out, "# n = {n}")?;
    writeln!(out, "# mode = {}", grid.mode())?;
    writeln!(out, "# m_beta = {}", grid.m_beta())?;
    writeln!(out, "# m_xi = {}", grid.m_xi())?;
    writeln!(out, "# theta = {:?}", grid.theta())?;
    writeln!(out, "# k = {k}")?;
    writeln!(out, "# time = {:?}", field.time)?;
    let mut cols = vec!["node".to_string(), "beta".into(), "xi".into(), "phi".into(), "rho".into()];
    cols.extend((0..=n).map(|i| format!("x{i}")));
    cols.extend((0..=n).map(|i| format!("nu{i}")));
    cols.extend((0..n).map(|i| format!("kappa{i}")));
    cols.extend(["u".into(), "u_bar".into(), "F".into()]);
    writeln!(out, "{}", cols.join(" "))?;
    for (s, phi) in samples.nodes.iter().zip(&field.phi) {
        let mut row = vec![s.node.to_string()];
        let mut push = |x: f64| row.push(format!("{x:e}"));
        push(s.beta);
        push(s.xi);
        push(*phi);
        push(s.rho);
        s.position.iter().for_each(|&x| push(x));
        s.normal.iter().for_each(|&x| push(x));
        s.kappa.as_slice().iter().for_each(|&x| push(x));
        push(s.u);
        push(s.u_bar);
        push(s.f.unwrap_or(f64::NAN));
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`]. Only the header and the
/// `phi` column are used; derived columns are recomputed on demand.
pub fn read_snapshot(input: impl BufRead) -> Result<Snapshot> {
    let mut header = BTreeMap::new();
    let mut phi_col = None;
    let mut phi = Vec::new();
    let mut seen_schema = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let err = |message: String| Error::Parse { line: lineno, message };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if trimmed == SNAPSHOT_SCHEMA {
                seen_schema = true;
            } else if let Some((key, value)) = rest.split_once('=') {
                header.insert(key.trim().to_string(), value.trim().to_string());
            }
            continue;
        }
        if !seen_schema {
            return Err(err(format!("expected `{SNAPSHOT_SCHEMA}` before data")));
        }
        match phi_col {
            None => {
                phi_col = Some(
                    trimmed
                        .split_whitespace()
                        .position(|c| c == "phi")
                        .ok_or_else(|| err("column header lacks `phi`".into()))?,
                );
            }
            Some(c) => {
                let field = trimmed
                    .split_whitespace()
                    .nth(c)
                    .ok_or_else(|| err(format!("row has no column {c}")))?;
                phi.push(field.parse::<f64>().map_err(|e| err(format!("bad phi `{field}`: {e}")))?);
            }
        }
    }
    let get = |key: &str| {
        header
            .get(key)
            .ok_or_else(|| Error::Parse { line: 0, message: format!("missing header `{key}`") })
    };
    let num = |key: &str| -> Result<f64> {
        get(key)?
            .parse::<f64>()
            .map_err(|e| Error::Parse { line: 0, message: format!("header `{key}`: {e}") })
    };
    let int = |key: &str| -> Result<usize> {
        get(key)?
            .parse::<usize>()
            .map_err(|e| Error::Parse { line: 0, message: format!("header `{key}`: {e}") })
    };
    let mode: GridMode = get("mode")?.parse()?;
    let grid = HalfSphereGrid::new(int("n")?, mode, int("m_beta")?, int("m_xi")?, num("theta")?)?;
    if phi.len() != grid.node_count() {
        return Err(Error::Parse {
            line: 0,
            message: format!("{} rows for a grid of {} nodes", phi.len(), grid.node_count()),
        });
    }
    let field = RadialField::new(phi, num("time")?);
    Ok(Snapshot { grid, field, k: int("k")? })
}

/// Writes the surface as a triangulated Wavefront OBJ mesh with outward
/// winding. Axisymmetric `n = 2` profiles are revolved through `segments`
/// azimuths; full2d grids use their own azimuths and ignore `segments`.
pub fn write_obj(
    out: &mut impl Write,
    grid: &HalfSphereGrid,
    field: &RadialField,
    segments: usize,
) -> Result<()> {
    field.check(grid)?;
    if grid.n() != 2 {
        return Err(Error::Domain("mesh export needs a surface in R^3 (n = 2)".into()));
    }
    let cols = match grid.mode() {
        GridMode::Full2d => grid.m_xi(),
        GridMode::Axisymmetric => segments,
    };
    if cols < 3 {
        return Err(Error::Domain("mesh export needs at least 3 azimuths".into()));
    }
    let rho = |j: usize, l: usize| match grid.mode() {
        GridMode::Full2d => field.rho(grid.index(j, l)),
        GridMode::Axisymmetric => field.rho(j),
    };
    writeln!(out, "# capflow surface, time {:?}", field.time)?;
    writeln!(out, "v 0 0 {:e}", rho(0, 0))?;
    for j in 1..grid.rows() {
        let (sb, cb) = grid.beta(j).sin_cos();
        for l in 0..cols {
            let (sa, ca) = (2.0 * std::f64::consts::PI * l as f64 / cols as f64).sin_cos();
            let r = rho(j, l);
            writeln!(out, "v {:e} {:e} {:e}", r * sb * ca, r * sb * sa, r * cb)?;
        }
    }
    // OBJ indices are 1-based; the pole is vertex 1.
    let vid = |j: usize, l: usize| if j == 0 { 1 } else { 2 + (j - 1) * cols + l % cols };
    for l in 0..cols {
        writeln!(out, "f {} {} {}", vid(0, 0), vid(1, l), vid(1, l + 1))?;
    }
    for j in 1..grid.boundary_row() {
        for l in 0..cols {
            let (a, b, c, d) = (vid(j, l), vid(j + 1, l), vid(j + 1, l + 1), vid(j, l + 1));
            writeln!(out, "f {a} {b} {c}")?;
            writeln!(out, "f {a} {c} {d}")?;
        }
    }
    Ok(())
}

/// Derived geometry of a snapshot, for `analyze`.
pub fn resample(snapshot: &Snapshot, k: usize) -> Result<SurfaceSamples> {
    sample_geometry(&snapshot.grid, &snapshot.field, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capgeom::{cap_field, CapSpec};

    #[test]
    fn snapshot_round_trips_phi_exactly() {
        let grid = HalfSphereGrid::full2d(6, 8, 1.1).unwrap();
        let mut field = cap_field(&CapSpec::new(1.1, 0.8).unwrap(), &grid).unwrap();
        field.phi.iter_mut().enumerate().for_each(|(i, p)| *p += 1e-3 * (i as f64).sin());
        field.time = 0.125;
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &grid, &field, 2).unwrap();
        let back = read_snapshot(&buf[..]).unwrap();
        assert_eq!(back.grid, grid);
        assert_eq!(back.field, field);
        assert_eq!(back.k, 2);
    }

    #[test]
    fn truncated_snapshot_is_rejected() {
        let grid = HalfSphereGrid::axisymmetric(2, 5, 0.9).unwrap();
        let field = cap_field(&CapSpec::new(0.9, 1.0).unwrap(), &grid).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &grid, &field, 1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: Vec<&str> = text.lines().take(text.lines().count() - 1).collect();
        assert!(matches!(read_snapshot(cut.join("\n").as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn obj_counts_and_outward_winding() {
        let grid = HalfSphereGrid::axisymmetric(2, 4, 1.2).unwrap();
        let field = cap_field(&CapSpec::new(1.2, 1.0).unwrap(), &grid).unwrap();
        let mut buf = Vec::new();
        write_obj(&mut buf, &grid, &field, 12).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let verts: Vec<[f64; 3]> = text
            .lines()
            .filter_map(|l| l.strip_prefix("v "))
            .map(|l| {
                let v: Vec<f64> = l.split(' ').map(|x| x.parse().unwrap()).collect();
                [v[0], v[1], v[2]]
            })
            .collect();
        let faces: Vec<[usize; 3]> = text
            .lines()
            .filter_map(|l| l.strip_prefix("f "))
            .map(|l| {
                let f: Vec<usize> = l.split(' ').map(|x| x.parse().unwrap()).collect();
                [f[0] - 1, f[1] - 1, f[2] - 1]
            })
            .collect();
        assert_eq!(verts.len(), 1 + 5 * 12);
        assert_eq!(faces.len(), 12 + 2 * 4 * 12);
        // The cap center sits at r cos θ e, below the origin.
        let center = [0.0, 0.0, -1.2f64.cos()];
        for f in faces {
            let [a, b, c] = f.map(|i| verts[i]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let nrm = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
            let out: f64 = (0..3).map(|i| nrm[i] * (a[i] - center[i])).sum();
            assert!(out > 0.0);
        }
    }
}
