use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, sphere_measure};

/// How the upper half-sphere is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMode {
    /// Fields depend on the polar angle `β` only; any `n ≥ 2`.
    Axisymmetric,
    /// Tensor grid in `(β, α)` over `S^2_+`; `n = 2` only.
    Full2d,
}

impl std::fmt::Display for GridMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridMode::Axisymmetric => f.write_str("axisymmetric"),
            GridMode::Full2d => f.write_str("full2d"),
        }
    }
}

impl std::str::FromStr for GridMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "axisymmetric" | "axisym" => Ok(GridMode::Axisymmetric),
            "full2d" => Ok(GridMode::Full2d),
            other => Err(Error::config("mode", format!("unknown grid mode `{other}`"))),
        }
    }
}

/// Polar-coordinate discretization `X = (β, ξ)` of the closed upper
/// half-sphere.
///
/// The `β` rows are uniform, `β_0 = 0` at the pole and `β_{m+1} = π/2` on
/// the wall. In `Full2d` mode the pole is a single node and every other row
/// carries `m_xi` equally spaced azimuths.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSphereGrid {
    n: usize,
    mode: GridMode,
    m_beta: usize,
    m_xi: usize,
    theta: f64,
    h: f64,
    beta: Vec<f64>,
    sin_b: Vec<f64>,
    cos_b: Vec<f64>,
    /// Measure on `S^n_+` of each row's cell `[β_j − h/2, β_j + h/2]`
    /// (clipped at the pole and wall), per node.
    row_weight: Vec<f64>,
    quad_weight: Vec<f64>,
}

impl HalfSphereGrid {
    pub fn axisymmetric(n: usize, m_beta: usize, theta: f64) -> Result<Self> {
        Self::new(n, GridMode::Axisymmetric, m_beta, 0, theta)
    }

    pub fn full2d(m_beta: usize, m_xi: usize, theta: f64) -> Result<Self> {
        Self::new(2, GridMode::Full2d, m_beta, m_xi, theta)
    }

    pub fn new(n: usize, mode: GridMode, m_beta: usize, m_xi: usize, theta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::config("n", format!("dimension must be >= 2, got {n}")));
        }
        if m_beta < 4 {
            return Err(Error::config("m_beta", "need at least 4 interior polar nodes"));
        }
        if !(theta > 0.0 && theta <= FRAC_PI_2) {
            return Err(Error::config(
                "theta",
                format!("contact angle {theta} outside (0, π/2]"),
            ));
        }
        if mode == GridMode::Full2d {
            if n != 2 {
                return Err(Error::config("mode", "full2d requires n = 2"));
            }
            if m_xi < 6 || m_xi % 2 != 0 {
                return Err(Error::config("m_xi", "full2d needs an even azimuthal count >= 6"));
            }
        }
        let m_xi = if mode == GridMode::Axisymmetric { 0 } else { m_xi };
        let rows = m_beta + 2;
        let h = FRAC_PI_2 / (m_beta + 1) as f64;
        let beta: Vec<f64> = (0..rows)
            .map(|j| if j == rows - 1 { FRAC_PI_2 } else { j as f64 * h })
            .collect();
        let sin_b: Vec<f64> = beta.iter().map(|b| if *b == FRAC_PI_2 { 1.0 } else { b.sin() }).collect();
        let cos_b: Vec<f64> = beta.iter().map(|b| if *b == FRAC_PI_2 { 0.0 } else { b.cos() }).collect();
        let azimuth = match mode {
            GridMode::Axisymmetric => sphere_measure(n - 1),
            GridMode::Full2d => 2.0 * PI / m_xi as f64,
        };
        // Exact measure of each node's β-cell, so that volume, area and the
        // conservative flux balance share one quadrature.
        let row_weight = (0..rows)
            .map(|j| {
                let a = (beta[j] - 0.5 * h).max(0.0);
                let b = (beta[j] + 0.5 * h).min(FRAC_PI_2);
                let cell = gauss_legendre(|x| x.sin().powi(n as i32 - 1), a, b, 1);
                match (mode, j) {
                    (GridMode::Full2d, 0) => cell * 2.0 * PI,
                    _ => cell * azimuth,
                }
            })
            .collect();
        // Fourth-order Gregory weights for `∫ g sin^{n-1}β dβ`. The integrand
        // is smooth on the closed interval, so only the end corrections
        // matter. The pole gets zero weight.
        let gregory = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
        let quad_weight = (0..rows)
            .map(|j| {
                let end = j.min(rows - 1 - j);
                let c = gregory.get(end).copied().unwrap_or(1.0);
                c * h * sin_b[j].powi(n as i32 - 1) * azimuth
            })
            .collect();
        Ok(Self { n, mode, m_beta, m_xi, theta, h, beta, sin_b, cos_b, row_weight, quad_weight })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn m_beta(&self) -> usize {
        self.m_beta
    }

    pub fn m_xi(&self) -> usize {
        self.m_xi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Same grid with a different contact angle.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.n, self.mode, self.m_beta, self.m_xi, theta)
    }

    /// Polar spacing `h`.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn azimuth_spacing(&self) -> f64 {
        match self.mode {
            GridMode::Axisymmetric => 0.0,
            GridMode::Full2d => 2.0 * PI / self.m_xi as f64,
        }
    }

    /// Number of `β` rows, pole and wall included.
    pub fn rows(&self) -> usize {
        self.m_beta + 2
    }

    /// Index of the wall row.
    pub fn boundary_row(&self) -> usize {
        self.m_beta + 1
    }

    pub fn node_count(&self) -> usize {
        match self.mode {
            GridMode::Axisymmetric => self.rows(),
            GridMode::Full2d => 1 + (self.m_beta + 1) * self.m_xi,
        }
    }

    /// Flat node index of row `j`, azimuth `l`. The pole ignores `l`.
    #[inline]
    pub fn index(&self, j: usize, l: usize) -> usize {
        match self.mode {
            GridMode::Axisymmetric => j,
            GridMode::Full2d => {
                if j == 0 {
                    0
                } else {
                    1 + (j - 1) * self.m_xi + l % self.m_xi
                }
            }
        }
    }

    /// `(row, azimuth)` of a flat node index.
    #[inline]
    pub fn row_col(&self, idx: usize) -> (usize, usize) {
        match self.mode {
            GridMode::Axisymmetric => (idx, 0),
            GridMode::Full2d => {
                if idx == 0 {
                    (0, 0)
                } else {
                    (1 + (idx - 1) / self.m_xi, (idx - 1) % self.m_xi)
                }
            }
        }
    }

    pub fn beta(&self, j: usize) -> f64 {
        self.beta[j]
    }

    pub(crate) fn sin_beta(&self, j: usize) -> f64 {
        self.sin_b[j]
    }

    pub(crate) fn cos_beta(&self, j: usize) -> f64 {
        self.cos_b[j]
    }

    /// Azimuth of column `l`; zero in axisymmetric mode.
    pub fn xi(&self, l: usize) -> f64 {
        match self.mode {
            GridMode::Axisymmetric => 0.0,
            GridMode::Full2d => l as f64 * self.azimuth_spacing(),
        }
    }

    /// Quadrature weight of `dσ` (round metric) at node `idx`.
    pub fn sphere_weight(&self, idx: usize) -> f64 {
        self.row_weight[self.row_col(idx).0]
    }

    /// Fourth-order quadrature weight of `dσ` at node `idx`, for integrating
    /// smooth node values. [`Self::sphere_weight`] is the conservative
    /// counterpart used by the flow.
    pub fn quadrature_weight(&self, idx: usize) -> f64 {
        self.quad_weight[self.row_col(idx).0]
    }

    /// Flat indices of the wall nodes.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let j = self.boundary_row();
        match self.mode {
            GridMode::Axisymmetric => vec![j],
            GridMode::Full2d => (0..self.m_xi).map(|l| self.index(j, l)).collect(),
        }
    }

    /// `cot θ`, exactly zero at `θ = π/2`.
    pub fn cot_theta(&self) -> f64 {
        cot_angle(self.theta)
    }

    pub(crate) fn cos_theta(&self) -> f64 {
        cos_angle(self.theta)
    }
}

pub(crate) fn cos_angle(theta: f64) -> f64 {
    if theta == FRAC_PI_2 {
        0.0
    } else {
        theta.cos()
    }
}

pub(crate) fn cot_angle(theta: f64) -> f64 {
    if theta == FRAC_PI_2 {
        0.0
    } else {
        theta.cos() / theta.sin()
    }
}

/// The unknown `φ = log ρ` on every grid node at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub phi: Vec<f64>,
    pub time: f64,
}

impl RadialField {
    pub fn new(phi: Vec<f64>, time: f64) -> Self {
        Self { phi, time }
    }

    /// Field with `φ(X) = g(β, ξ)` sampled on the grid.
    pub fn from_fn(grid: &HalfSphereGrid, g: impl Fn(f64, f64) -> f64) -> Self {
        let phi = (0..grid.node_count())
            .map(|i| {
                let (j, l) = grid.row_col(i);
                g(grid.beta(j), grid.xi(l))
            })
            .collect();
        Self { phi, time: 0.0 }
    }

    pub fn rho(&self, idx: usize) -> f64 {
        self.phi[idx].exp()
    }

    /// Exact dilation `x ↦ s·x`, i.e. `φ ↦ φ + log s`.
    pub fn dilated(&self, s: f64) -> Self {
        let shift = s.ln();
        Self { phi: self.phi.iter().map(|p| p + shift).collect(), time: self.time }
    }

    pub fn max_abs_diff(&self, other: &RadialField) -> f64 {
        self.phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check(&self, grid: &HalfSphereGrid) -> Result<()> {
        if self.phi.len() != grid.node_count() {
            return Err(Error::Geometry(format!(
                "field has {} values for a grid of {} nodes",
                self.phi.len(),
                grid.node_count()
            )));
        }
        if let Some(i) = self.phi.iter().position(|p| !p.is_finite()) {
            return Err(Error::Geometry(format!("non-finite log-radius at node {i}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_uniform_and_closed() {
        let g = HalfSphereGrid::axisymmetric(2, 9, 1.0).unwrap();
        assert_eq!(g.rows(), 11);
        assert_eq!(g.beta(0), 0.0);
        assert_eq!(g.beta(10), FRAC_PI_2);
        for j in 1..11 {
            assert!((g.beta(j) - g.beta(j - 1) - g.spacing()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_invalid_configurations() {
        assert!(HalfSphereGrid::axisymmetric(1, 10, 1.0).is_err());
        assert!(HalfSphereGrid::axisymmetric(2, 10, 0.0).is_err());
        assert!(HalfSphereGrid::axisymmetric(2, 10, 2.0).is_err());
        assert!(HalfSphereGrid::new(3, GridMode::Full2d, 10, 8, 1.0).is_err());
        assert!(HalfSphereGrid::full2d(10, 7, 1.0).is_err());
        assert!(HalfSphereGrid::axisymmetric(2, 10, FRAC_PI_2).is_ok());
    }

    #[test]
    fn full2d_indexing_roundtrip() {
        let g = HalfSphereGrid::full2d(5, 8, 1.0).unwrap();
        assert_eq!(g.node_count(), 1 + 6 * 8);
        for i in 0..g.node_count() {
            let (j, l) = g.row_col(i);
            assert_eq!(g.index(j, l), i);
        }
        assert_eq!(g.index(3, 9), g.index(3, 1));
    }

    #[test]
    fn hemisphere_measure() {
        // Cell measures tile the half-sphere exactly.
        for (g, expected) in [
            (HalfSphereGrid::axisymmetric(2, 200, 1.0).unwrap(), 2.0 * PI),
            (HalfSphereGrid::full2d(37, 16, 1.0).unwrap(), 2.0 * PI),
            (HalfSphereGrid::axisymmetric(3, 50, 1.0).unwrap(), PI * PI),
        ] {
            let total: f64 = (0..g.node_count()).map(|i| g.sphere_weight(i)).sum();
            assert!((total - expected).abs() < 1e-12, "{total}");
        }
    }
}
