//! Initial data: caps, perturbed caps, blends and seeded random convex
//! fields, each projected onto the contact-angle condition and checked for
//! strict convexity before a run may start.
//!
//! Perturbations are built from `cos²β · P_ℓ(cos β)`, which has zero
//! `β`-derivative on the wall, so the projection only removes discretization
//! error. Full2d grids add `sin^m β cos(m α)` azimuthal factors, smooth at
//! the pole.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capgeom::{cap_field, sample_geometry, unit_cap_rho, CapSpec, GridMode, HalfSphereGrid, RadialField};
use crate::error::{Error, Result};

/// One-sided wall-slope residual accepted by the validity gate.
pub const BC_TOL: f64 = 1e-3;

/// A named initial-data generator with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Preset {
    /// The cap `C_{θ,r}`.
    Cap {
        #[serde(default = "one")]
        r: f64,
    },
    /// `log ρ_cap + a cos²β P_ℓ(cos β) [sin^m β cos(m α)]`.
    PerturbedCap {
        #[serde(default = "one")]
        r: f64,
        amplitude: f64,
        #[serde(default)]
        legendre: usize,
        /// Azimuthal mode, full2d only.
        #[serde(default)]
        azimuthal: usize,
    },
    /// Radial blend `(1 − w) ρ_{θ_a} + w ρ_{θ_b}` of two unit caps scaled by
    /// `r`, then projected onto the grid's contact angle.
    Blend {
        #[serde(default = "one")]
        r: f64,
        theta_a: f64,
        theta_b: f64,
        weight: f64,
    },
    /// A cap plus random low modes with coefficients uniform in
    /// `±amplitude/(ℓ+1)²`, redrawn until the body is strictly convex.
    Random {
        #[serde(default = "one")]
        r: f64,
        amplitude: f64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_modes() -> usize {
    4
}

/// Name and parameter summary of every preset, for `capflow presets`.
pub const CATALOG: &[(&str, &str)] = &[
    ("cap", "r = 1"),
    ("perturbed-cap", "r = 1, amplitude, legendre = 0, azimuthal = 0 (full2d)"),
    ("blend", "r = 1, theta_a, theta_b, weight in [0, 1]"),
    ("random", "r = 1, amplitude, modes = 4, seed = 0"),
];

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Cap { .. } => "cap",
            Preset::PerturbedCap { .. } => "perturbed-cap",
            Preset::Blend { .. } => "blend",
            Preset::Random { .. } => "random",
        }
    }

    /// Samples the preset on `grid`, projects it onto the boundary condition
    /// and runs the validity gate.
    pub fn generate(&self, grid: &HalfSphereGrid) -> Result<RadialField> {
        let theta = grid.theta();
        let field = match *self {
            Preset::Cap { r } => return cap_field(&CapSpec::new(theta, r)?, grid),
            Preset::PerturbedCap { r, amplitude, legendre, azimuthal } => {
                CapSpec::new(theta, r)?;
                if azimuthal > 0 && grid.mode() != GridMode::Full2d {
                    return Err(Error::config("azimuthal", "azimuthal modes need a full2d grid"));
                }
                let mut f = RadialField::from_fn(grid, |b, a| {
                    (r * unit_cap_rho(theta, b)).ln() + amplitude * mode_shape(legendre, azimuthal, b, a)
                });
                project_to_bc(grid, &mut f);
                f
            }
            Preset::Blend { r, theta_a, theta_b, weight } => {
                CapSpec::new(theta_a, r)?;
                CapSpec::new(theta_b, r)?;
                if !(0.0..=1.0).contains(&weight) {
                    return Err(Error::config("weight", "blend weight must lie in [0, 1]"));
                }
                let mut f = RadialField::from_fn(grid, |b, _| {
                    (r * ((1.0 - weight) * unit_cap_rho(theta_a, b) + weight * unit_cap_rho(theta_b, b))).ln()
                });
                project_to_bc(grid, &mut f);
                f
            }
            Preset::Random { r, amplitude, modes, seed } => {
                CapSpec::new(theta, r)?;
                return random_field(grid, r, amplitude, modes, seed);
            }
        };
        validate(grid, &field)?;
        Ok(field)
    }
}

fn random_field(grid: &HalfSphereGrid, r: f64, amplitude: f64, modes: usize, seed: u64) -> Result<RadialField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = grid.theta();
    let azimuthal = if grid.mode() == GridMode::Full2d { modes.min(3) } else { 0 };
    let mut last = None;
    for _ in 0..64 {
        let coeffs: Vec<(usize, usize, f64)> = (0..=modes)
            .flat_map(|l| (0..=azimuthal).map(move |m| (l, m)))
            .map(|(l, m)| {
                let scale = amplitude / ((l + m + 1) * (l + m + 1)) as f64;
                (l, m, rng.gen_range(-scale..=scale))
            })
            .collect();
        let mut f = RadialField::from_fn(grid, |b, a| {
            (r * unit_cap_rho(theta, b)).ln()
                + coeffs.iter().map(|&(l, m, c)| c * mode_shape(l, m, b, a)).sum::<f64>()
        });
        project_to_bc(grid, &mut f);
        match validate(grid, &f) {
            Ok(()) => return Ok(f),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one draw"))
}

/// `cos²β P_ℓ(cos β)`, times `sin^m β cos(m α)` for `m > 0`.
pub fn mode_shape(legendre: usize, azimuthal: usize, beta: f64, alpha: f64) -> f64 {
    let (s, c) = beta.sin_cos();
    let radial = c * c * legendre_p(legendre, c);
    if azimuthal == 0 {
        radial
    } else {
        radial * s.powi(azimuthal as i32) * (azimuthal as f64 * alpha).cos()
    }
}

/// Legendre polynomial `P_ℓ(x)` by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for j in 1..l {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Target wall slope `cot θ √(1 + φ_α²)` per wall column.
fn wall_targets(grid: &HalfSphereGrid, phi: &[f64]) -> Vec<f64> {
    let jb = grid.boundary_row();
    let cot = grid.cot_theta();
    match grid.mode() {
        GridMode::Axisymmetric => vec![cot],
        GridMode::Full2d => {
            let m = grid.m_xi();
            let ha = grid.azimuth_spacing();
            (0..m)
                .map(|l| {
                    let da = (phi[grid.index(jb, l + 1)] - phi[grid.index(jb, l + m - 1)]) / (2.0 * ha);
                    cot * (1.0 + da * da).sqrt()
                })
                .collect()
        }
    }
}

/// Fourth-order one-sided `β`-slope at the wall, per column. A lower order
/// would let the projection move exact caps by the stencil error, which the
/// wall curvature stencil amplifies by `1/h`.
fn one_sided_slopes(grid: &HalfSphereGrid, phi: &[f64]) -> Vec<f64> {
    let jb = grid.boundary_row();
    let h = grid.spacing();
    let cols = grid.m_xi().max(1);
    (0..cols)
        .map(|l| {
            let at = |j: usize| phi[grid.index(j, l)];
            one_sided(at(jb), at(jb - 1), at(jb - 2), at(jb - 3), at(jb - 4), h)
        })
        .collect()
}

fn one_sided(f0: f64, f1: f64, f2: f64, f3: f64, f4: f64, h: f64) -> f64 {
    (25.0 * f0 - 48.0 * f1 + 36.0 * f2 - 16.0 * f3 + 3.0 * f4) / (12.0 * h)
}

/// `max |∂_β φ − cot θ √(1 + φ_α²)|` on the wall with one-sided slopes.
pub fn bc_residual(grid: &HalfSphereGrid, field: &RadialField) -> f64 {
    let targets = wall_targets(grid, &field.phi);
    one_sided_slopes(grid, &field.phi)
        .iter()
        .zip(&targets)
        .map(|(s, t)| (s - t).abs())
        .fold(0.0, f64::max)
}

/// Corrects the wall slope with `δ · w(β)`, `w = −cos β`: zero on the wall
/// with unit slope, even across the pole, and of bounded curvature, so an
/// `O(δ)` slope mismatch costs only `O(δ)` in curvature. The discrete slope
/// of `w` is used, so one pass zeroes the one-sided residual. Wall values,
/// and with them the tangential derivatives entering the target, are
/// untouched.
pub fn project_to_bc(grid: &HalfSphereGrid, field: &mut RadialField) {
    let h = grid.spacing();
    let w = |b: f64| if b == std::f64::consts::FRAC_PI_2 { 0.0 } else { -b.cos() };
    let jb = grid.boundary_row();
    let wb = |i: usize| w(grid.beta(jb - i));
    let w_slope = one_sided(wb(0), wb(1), wb(2), wb(3), wb(4), h);
    let targets = wall_targets(grid, &field.phi);
    let slopes = one_sided_slopes(grid, &field.phi);
    for idx in 0..grid.node_count() {
        let (j, l) = grid.row_col(idx);
        let col = if grid.mode() == GridMode::Full2d { l } else { 0 };
        let delta = (targets[col] - slopes[col]) / w_slope;
        field.phi[idx] += delta * w(grid.beta(j));
    }
}

/// The validity gate: strict convexity (`κ ∈ Γ_n`) at every node and a wall
/// slope within [`BC_TOL`] of the contact-angle condition.
pub fn validate(grid: &HalfSphereGrid, field: &RadialField) -> Result<()> {
    let samples = sample_geometry(grid, field, grid.n())?;
    if let Some((node, class)) = samples.first_cone_violation(grid.n()) {
        return Err(Error::ConeViolation { required: grid.n(), class, node: Some(node) });
    }
    let res = bc_residual(grid, field);
    if !(res < BC_TOL) {
        return Err(Error::Boundary(format!("wall slope residual {res:.3e} exceeds {BC_TOL:e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_matches_closed_forms() {
        for x in [-0.9, -0.2, 0.0, 0.4, 1.0] {
            assert_eq!(legendre_p(0, x), 1.0);
            assert_eq!(legendre_p(1, x), x);
            assert!((legendre_p(2, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
            assert!((legendre_p(3, x) - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn projection_zeroes_the_one_sided_residual() {
        let grid = HalfSphereGrid::axisymmetric(2, 60, 0.8).unwrap();
        let mut f = RadialField::from_fn(&grid, |b, _| (unit_cap_rho(0.8, b)).ln() + 0.1 * b);
        assert!(bc_residual(&grid, &f) > 0.05);
        project_to_bc(&grid, &mut f);
        assert!(bc_residual(&grid, &f) < 1e-12);
    }

    #[test]
    fn presets_pass_their_gate() {
        let grid = HalfSphereGrid::axisymmetric(2, 80, std::f64::consts::FRAC_PI_4).unwrap();
        let presets = [
            Preset::Cap { r: 1.3 },
            Preset::PerturbedCap { r: 1.0, amplitude: 0.05, legendre: 1, azimuthal: 0 },
            Preset::Blend { r: 1.0, theta_a: 0.6, theta_b: 1.2, weight: 0.5 },
            Preset::Random { r: 0.8, amplitude: 0.1, modes: 4, seed: 7 },
        ];
        for p in presets {
            let f = p.generate(&grid).unwrap_or_else(|e| panic!("{p:?}: {e}"));
            validate(&grid, &f).unwrap();
        }
        let full = HalfSphereGrid::full2d(24, 16, 1.0).unwrap();
        Preset::PerturbedCap { r: 1.0, amplitude: 0.05, legendre: 0, azimuthal: 2 }.generate(&full).unwrap();
        Preset::Random { r: 1.0, amplitude: 0.05, modes: 2, seed: 1 }.generate(&full).unwrap();
    }

    #[test]
    fn non_convex_input_is_rejected() {
        let grid = HalfSphereGrid::axisymmetric(2, 80, std::f64::consts::FRAC_PI_4).unwrap();
        let p = Preset::PerturbedCap { r: 1.0, amplitude: -0.6, legendre: 0, azimuthal: 0 };
        assert!(matches!(p.generate(&grid), Err(Error::ConeViolation { .. })));
    }

    #[test]
    fn random_preset_is_deterministic_per_seed() {
        let grid = HalfSphereGrid::axisymmetric(2, 40, 1.0).unwrap();
        let p = |seed| Preset::Random { r: 1.0, amplitude: 0.1, modes: 3, seed };
        assert_eq!(p(3).generate(&grid).unwrap(), p(3).generate(&grid).unwrap());
        assert_ne!(p(3).generate(&grid).unwrap(), p(4).generate(&grid).unwrap());
    }
}
