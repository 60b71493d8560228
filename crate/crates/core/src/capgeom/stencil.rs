//! Ghost layers and centered finite differences on the half-sphere grid.
//!
//! Derivatives are expressed in the orthonormal frame of the round metric:
//! `e_β = ∂_β` and, in `Full2d` mode, the unit azimuthal vector
//! `∂_α / sin β`. The covariant Hessian is returned in the same frame; in
//! axisymmetric mode its second diagonal entry is the (repeated) rotational
//! entry `cot β · ∂_β φ`, which tends to `∂²_β φ` at the pole.

use smallvec::smallvec;

use super::grid::{GridMode, HalfSphereGrid};
use crate::symm::Scalars;

/// Local 2-jet of `φ` at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet {
    pub phi: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

impl Jet {
    #[inline]
    pub fn grad_sq(&self) -> f64 {
        self.grad[0] * self.grad[0] + self.grad[1] * self.grad[1]
    }
}

/// Ghost values one row beyond the wall, chosen so that the centered
/// `β`-difference satisfies `∂_β φ = cos θ · √(1 + |∇̄φ|²)` exactly.
///
/// On the wall `sin β = 1`, so the relation reads
/// `s = cos θ · √(1 + s² + φ_α²)` for the slope `s`, whose positive root is
/// `s = cot θ · √(1 + φ_α²)`. The azimuthal slope uses only wall values,
/// so the ghost is explicit.
pub(crate) fn wall_ghosts(grid: &HalfSphereGrid, phi: &[f64]) -> Scalars {
    let h = grid.spacing();
    let cot = grid.cot_theta();
    let jb = grid.boundary_row();
    match grid.mode() {
        GridMode::Axisymmetric => smallvec![phi[jb - 1] + 2.0 * h * cot],
        GridMode::Full2d => {
            let m = grid.m_xi();
            let ha = grid.azimuth_spacing();
            (0..m)
                .map(|l| {
                    let d_alpha =
                        (phi[grid.index(jb, l + 1)] - phi[grid.index(jb, l + m - 1)]) / (2.0 * ha);
                    let slope = cot * (1.0 + d_alpha * d_alpha).sqrt();
                    phi[grid.index(jb - 1, l)] + 2.0 * h * slope
                })
                .collect()
        }
    }
}

/// Value at row `j` (possibly the ghost row), azimuth `l`.
#[inline]
fn value(grid: &HalfSphereGrid, phi: &[f64], ghosts: &[f64], j: usize, l: usize) -> f64 {
    if j > grid.boundary_row() {
        ghosts[l % ghosts.len()]
    } else {
        phi[grid.index(j, l)]
    }
}

pub(crate) fn jet(grid: &HalfSphereGrid, phi: &[f64], ghosts: &[f64], idx: usize) -> Jet {
    let h = grid.spacing();
    let (j, l) = grid.row_col(idx);
    let c = phi[idx];
    match grid.mode() {
        GridMode::Axisymmetric => {
            // Pole regularity: reflect across β = 0.
            let up = value(grid, phi, ghosts, j + 1, 0);
            let down = if j == 0 { up } else { phi[j - 1] };
            let d1 = (up - down) / (2.0 * h);
            let d2 = if j == grid.boundary_row() {
                wall_second_difference(c, down, phi[j - 2], d1, h)
            } else {
                (up - 2.0 * c + down) / (h * h)
            };
            let rot = if j == 0 { d2 } else { grid.cos_beta(j) / grid.sin_beta(j) * d1 };
            Jet { phi: c, grad: [d1, 0.0], hess: [[d2, 0.0], [0.0, rot]] }
        }
        GridMode::Full2d => {
            if j == 0 {
                pole_jet(grid, phi)
            } else {
                ring_jet(grid, phi, ghosts, j, l)
            }
        }
    }
}

/// `∂²_β φ` on the wall from the cubic through the wall value, the two rows
/// below it and the imposed slope `s`. The plain second difference through
/// the reflection ghost is only first-order accurate there.
#[inline]
pub(crate) fn wall_second_difference(wall: f64, below: f64, below2: f64, s: f64, h: f64) -> f64 {
    let a = below - wall + h * s;
    let b = below2 - wall + 2.0 * h * s;
    (8.0 * a - b) / (2.0 * h * h)
}

fn ring_jet(grid: &HalfSphereGrid, phi: &[f64], ghosts: &[f64], j: usize, l: usize) -> Jet {
    let h = grid.spacing();
    let ha = grid.azimuth_spacing();
    let m = grid.m_xi();
    let (lp, lm) = (l + 1, l + m - 1);
    let at = |jj: usize, ll: usize| value(grid, phi, ghosts, jj, ll);
    let c = at(j, l);
    let (n_up, n_dn) = (at(j + 1, l), at(j - 1, l));
    let d_b = (n_up - n_dn) / (2.0 * h);
    let d_bb = if j == grid.boundary_row() {
        wall_second_difference(c, n_dn, at(j - 2, l), d_b, h)
    } else {
        (n_up - 2.0 * c + n_dn) / (h * h)
    };
    let d_a = (at(j, lp) - at(j, lm)) / (2.0 * ha);
    let d_aa = (at(j, lp) - 2.0 * c + at(j, lm)) / (ha * ha);
    let d_ba = (at(j + 1, lp) - at(j + 1, lm) - at(j - 1, lp) + at(j - 1, lm)) / (4.0 * h * ha);
    let (s, co) = (grid.sin_beta(j), grid.cos_beta(j));
    let cot = co / s;
    let h12 = (d_ba - cot * d_a) / s;
    let h22 = (d_aa + s * co * d_b) / (s * s);
    Jet { phi: c, grad: [d_b, d_a / s], hess: [[d_bb, h12], [h12, h22]] }
}

/// Gradient and Hessian at the pole in geodesic normal coordinates, fitted
/// from the first ring through opposite-azimuth pairs. The frame is the
/// `α = 0` direction followed by the `α = π/2` direction.
fn pole_jet(grid: &HalfSphereGrid, phi: &[f64]) -> Jet {
    let h = grid.spacing();
    let m = grid.m_xi();
    let half = m / 2;
    let p0 = phi[0];
    let (mut gx, mut gy, mut mean, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for l in 0..half {
        let a = grid.xi(l);
        let fwd = phi[grid.index(1, l)];
        let back = phi[grid.index(1, l + half)];
        let d1 = (fwd - back) / (2.0 * h);
        let d2 = (fwd + back - 2.0 * p0) / (h * h);
        gx += d1 * a.cos();
        gy += d1 * a.sin();
        mean += d2;
        c2 += d2 * (2.0 * a).cos();
        s2 += d2 * (2.0 * a).sin();
    }
    let k = half as f64;
    let (gx, gy) = (2.0 * gx / k, 2.0 * gy / k);
    let (mean, c2, s2) = (mean / k, 2.0 * c2 / k, 2.0 * s2 / k);
    Jet { phi: p0, grad: [gx, gy], hess: [[mean + c2, s2], [s2, mean - c2]] }
}

/// Principal curvatures of the radial graph `ρ X` with `ρ = e^φ` from the
/// local jet: `W = (1/(ρ v)) (I − A H A)` with `A² = I − ∇̄φ ∇̄φᵀ / v²`.
pub(crate) fn principal_curvatures(grid: &HalfSphereGrid, jet: &Jet) -> Scalars {
    let rho = jet.phi.exp();
    let v2 = 1.0 + jet.grad_sq();
    let v = v2.sqrt();
    match grid.mode() {
        GridMode::Axisymmetric => {
            let n = grid.n();
            let k_m = (v2 - jet.hess[0][0]) / (rho * v2 * v);
            let k_rot = (1.0 - jet.hess[1][1]) / (rho * v);
            let mut out: Scalars = smallvec![k_rot; n];
            out[0] = k_m;
            out
        }
        GridMode::Full2d => {
            let g = jet.grad;
            let p2 = jet.grad_sq();
            // A = I + (1/v − 1) p̂ p̂ᵀ
            let a = if p2 > 0.0 {
                let c = (1.0 / v - 1.0) / p2;
                [[1.0 + c * g[0] * g[0], c * g[0] * g[1]], [c * g[0] * g[1], 1.0 + c * g[1] * g[1]]]
            } else {
                [[1.0, 0.0], [0.0, 1.0]]
            };
            let hm = jet.hess;
            let ah = mul2(&a, &hm);
            let aha = mul2(&ah, &a);
            let scale = 1.0 / (rho * v);
            let s11 = scale * (1.0 - aha[0][0]);
            let s22 = scale * (1.0 - aha[1][1]);
            let s12 = -scale * 0.5 * (aha[0][1] + aha[1][0]);
            let mid = 0.5 * (s11 + s22);
            let rad = (0.25 * (s11 - s22) * (s11 - s22) + s12 * s12).sqrt();
            smallvec![mid - rad, mid + rad]
        }
    }
}

#[inline]
fn mul2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Orthonormal frame at a node in `R^{n+1}`: the radial direction `X`, the
/// polar direction `e_β`, and (full2d) the unit azimuthal direction.
pub(crate) fn frame(grid: &HalfSphereGrid, idx: usize) -> [Scalars; 3] {
    let n1 = grid.n() + 1;
    let (j, l) = grid.row_col(idx);
    let (s, c) = (grid.sin_beta(j), grid.cos_beta(j));
    let mut x: Scalars = smallvec![0.0; n1];
    let mut eb: Scalars = smallvec![0.0; n1];
    let mut ea: Scalars = smallvec![0.0; n1];
    match grid.mode() {
        GridMode::Axisymmetric => {
            x[0] = s;
            x[n1 - 1] = c;
            eb[0] = c;
            eb[n1 - 1] = -s;
            if n1 > 2 {
                ea[1] = 1.0;
            }
        }
        GridMode::Full2d => {
            if j == 0 {
                x[2] = 1.0;
                eb[0] = 1.0;
                ea[1] = 1.0;
            } else {
                let (sa, ca) = grid.xi(l).sin_cos();
                x[0] = s * ca;
                x[1] = s * sa;
                x[2] = c;
                eb[0] = c * ca;
                eb[1] = c * sa;
                eb[2] = -s;
                ea[0] = -sa;
                ea[1] = ca;
            }
        }
    }
    [x, eb, ea]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capgeom::grid::RadialField;

    #[test]
    fn pole_fit_recovers_quadratic() {
        // φ = a + b·y1 + c·y2 + q(y) in normal coordinates y = β (cos α, sin α).
        let g = HalfSphereGrid::full2d(40, 12, 1.0).unwrap();
        let f = RadialField::from_fn(&g, |b, a| {
            let (y1, y2) = (b * a.cos(), b * a.sin());
            0.3 + 0.2 * y1 - 0.1 * y2 + 0.5 * y1 * y1 + 0.25 * y1 * y2 - 0.4 * y2 * y2
        });
        let gh = wall_ghosts(&g, &f.phi);
        let jt = jet(&g, &f.phi, &gh, 0);
        assert!((jt.grad[0] - 0.2).abs() < 1e-12);
        assert!((jt.grad[1] + 0.1).abs() < 1e-12);
        assert!((jt.hess[0][0] - 1.0).abs() < 1e-12);
        assert!((jt.hess[0][1] - 0.25).abs() < 1e-12);
        assert!((jt.hess[1][1] + 0.8).abs() < 1e-12);
    }

    #[test]
    fn axisymmetric_ghost_has_wall_slope() {
        let g = HalfSphereGrid::axisymmetric(2, 20, 0.7).unwrap();
        let f = RadialField::from_fn(&g, |b, _| b.cos());
        let gh = wall_ghosts(&g, &f.phi);
        let jt = jet(&g, &f.phi, &gh, g.boundary_row());
        assert!((jt.grad[0] - g.cot_theta()).abs() < 1e-12);
    }

    #[test]
    fn sphere_curvatures_are_inverse_radius() {
        for g in [
            HalfSphereGrid::axisymmetric(3, 12, 1.2).unwrap(),
            HalfSphereGrid::full2d(12, 8, 1.2).unwrap(),
        ] {
            let jt = Jet { phi: 2f64.ln(), grad: [0.0; 2], hess: [[0.0; 2]; 2] };
            for k in principal_curvatures(&g, &jt) {
                assert!((k - 0.5).abs() < 1e-15);
            }
        }
    }
}
