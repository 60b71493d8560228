//! Spherical caps `C_{θ,r} = {x : |x − r cos θ e| = r}` in the closed upper
//! half-space, the equilibria of the flow.

use std::f64::consts::PI;

use serde::Serialize;

use super::grid::{cos_angle, HalfSphereGrid, RadialField};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, sphere_measure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapSpec {
    pub theta: f64,
    pub r: f64,
}

impl CapSpec {
    pub fn new(theta: f64, r: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::config("theta", format!("contact angle {theta} outside (0, π/2]")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::config("r", format!("cap radius must be positive, got {r}")));
        }
        Ok(Self { theta, r })
    }

    /// Height of the center along `e_{n+1}`; the center is `r cos θ e`.
    pub fn center_height(&self) -> f64 {
        -self.r * cos_angle(self.theta)
    }

    /// Radial function of the cap in direction `β`.
    pub fn rho(&self, beta: f64) -> f64 {
        self.r * unit_cap_rho(self.theta, beta)
    }
}

/// Radial function of `C_{θ,1}`: the positive root of
/// `ρ² + 2ρ cos θ cos β − sin² θ = 0`.
///
/// Written as `sin² θ / (cos θ cos β + √(1 − cos² θ sin² β))`, which avoids
/// cancellation for nearly flat caps.
pub fn unit_cap_rho(theta: f64, beta: f64) -> f64 {
    let c = cos_angle(theta);
    let s2 = 1.0 - c * c;
    let (sb, cb) = beta.sin_cos();
    s2 / (c * cb + (1.0 - c * c * sb * sb).sqrt())
}

/// Samples `φ = log ρ` of the cap on the grid.
pub fn cap_field(cap: &CapSpec, grid: &HalfSphereGrid) -> Result<RadialField> {
    if (cap.theta - grid.theta()).abs() > 1e-14 {
        return Err(Error::Domain(format!(
            "cap angle {} does not match grid angle {}",
            cap.theta,
            grid.theta()
        )));
    }
    Ok(RadialField::from_fn(grid, |b, _| cap.rho(b).ln()))
}

/// Closed-form (or profile-quadrature) measures of a cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapAnalytics {
    /// `|Σ|`.
    pub area: f64,
    /// `|∂̂Σ|`, the wetted ball of radius `r sin θ`.
    pub wetted: f64,
    /// Enclosed volume `|Σ̂|`.
    pub volume: f64,
    /// `b_θ = V_{1,θ}(C_{θ,1})`.
    pub b_theta: f64,
}

const PANELS: usize = 64;

/// Measures of `C_{θ,r}` in `R^{n+1}_+`. Closed forms for `n = 2`; for other
/// `n` the cap area and volume come from 1-d quadrature of the profile.
pub fn cap_analytics(cap: &CapSpec, n: usize) -> Result<CapAnalytics> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {n}")));
    }
    let (theta, r) = (cap.theta, cap.r);
    let c = cos_angle(theta);
    if n == 2 {
        let area = 2.0 * PI * r * r * (1.0 - c);
        let wetted = PI * r * r * theta.sin().powi(2);
        let volume = r.powi(3) * PI / 3.0 * (1.0 - c).powi(2) * (2.0 + c);
        let b_theta = PI / 3.0 * (2.0 - 3.0 * c + c * c * c);
        return Ok(CapAnalytics { area, wetted, volume, b_theta });
    }
    let unit_area = unit_cap_area(theta, n);
    let unit_wetted = sphere_measure(n - 1) * theta.sin().powi(n as i32) / n as f64;
    let scale = r.powi(n as i32);
    Ok(CapAnalytics {
        area: scale * unit_area,
        wetted: scale * unit_wetted,
        volume: scale * r * unit_cap_volume(theta, n),
        b_theta: (unit_area - c * unit_wetted) / (n + 1) as f64,
    })
}

/// `|C_{θ,1}| = |S^{n−1}| ∫_0^θ sin^{n−1} ψ dψ`.
fn unit_cap_area(theta: f64, n: usize) -> f64 {
    sphere_measure(n - 1) * gauss_legendre(|p| p.sin().powi(n as i32 - 1), 0.0, theta, PANELS)
}

/// Volume of the unit cap as a cone integral over the half-sphere:
/// `|S^{n−1}|/(n+1) ∫_0^{π/2} ρ(β)^{n+1} sin^{n−1} β dβ`.
pub fn unit_cap_volume(theta: f64, n: usize) -> f64 {
    sphere_measure(n - 1) / (n + 1) as f64
        * gauss_legendre(
            |b| unit_cap_rho(theta, b).powi(n as i32 + 1) * b.sin().powi(n as i32 - 1),
            0.0,
            std::f64::consts::FRAC_PI_2,
            PANELS,
        )
}

/// `b_θ` computed as the volume of the unit cap by profile quadrature. Equal
/// to the capillary-area route because the unit cap is an equality case of
/// the Alexandrov–Fenchel chain.
pub fn b_theta_by_quadrature(theta: f64, n: usize) -> f64 {
    unit_cap_volume(theta, n)
}

/// `b_θ` for any `n`.
pub fn b_theta(theta: f64, n: usize) -> Result<f64> {
    Ok(cap_analytics(&CapSpec::new(theta, 1.0)?, n)?.b_theta)
}

/// Radius function `R(X) = ρ(X) / ρ_{C_{θ,1}}(β)`: the radius of the cap
/// through the surface point in direction `X`. The body lies between the
/// caps of radii `min R` and `max R`.
pub fn cap_radius_profile(grid: &HalfSphereGrid, field: &RadialField) -> Vec<f64> {
    (0..grid.node_count())
        .map(|i| {
            let (j, _) = grid.row_col(i);
            field.rho(i) / unit_cap_rho(grid.theta(), grid.beta(j))
        })
        .collect()
}

/// Barrier radii `(r_1, r_2)` with `Ĉ_{θ,r_1} ⊂ Σ̂ ⊂ Ĉ_{θ,r_2}`.
pub fn barrier_radii(grid: &HalfSphereGrid, field: &RadialField) -> (f64, f64) {
    cap_radius_profile(grid, field)
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn radial_function_landmarks() {
        let cap = CapSpec::new(0.8, 1.7).unwrap();
        assert_relative_eq!(cap.rho(0.0), 1.7 * (1.0 - 0.8f64.cos()), max_relative = 1e-14);
        assert_relative_eq!(cap.rho(FRAC_PI_2), 1.7 * 0.8f64.sin(), max_relative = 1e-14);
        let hemi = CapSpec::new(FRAC_PI_2, 2.0).unwrap();
        for b in [0.0, 0.3, 1.1, FRAC_PI_2] {
            assert_eq!(hemi.rho(b), 2.0);
        }
    }

    #[test]
    fn radial_function_solves_sphere_equation() {
        let cap = CapSpec::new(0.5, 0.9).unwrap();
        for i in 0..=20 {
            let b = FRAC_PI_2 * i as f64 / 20.0;
            let rho = cap.rho(b);
            let (x, z) = (rho * b.sin(), rho * b.cos());
            let d = x.hypot(z - cap.center_height());
            assert_relative_eq!(d, 0.9, max_relative = 1e-14);
        }
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        for &theta in &[0.2, 0.7, 1.2, FRAC_PI_2] {
            let a = cap_analytics(&CapSpec::new(theta, 1.0).unwrap(), 2).unwrap();
            assert_relative_eq!(a.volume, b_theta_by_quadrature(theta, 2), max_relative = 1e-12);
            assert_relative_eq!(a.b_theta, a.volume, max_relative = 1e-12);
            assert_relative_eq!(unit_cap_area(theta, 2), a.area, max_relative = 1e-12);
        }
        let hemi = cap_analytics(&CapSpec::new(FRAC_PI_2, 1.0).unwrap(), 2).unwrap();
        assert_relative_eq!(hemi.b_theta, 2.0 * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn higher_dimensional_equality_case() {
        // V_1 and V_0 of the unit cap coincide in every dimension.
        for n in 3..6 {
            for &theta in &[0.4, 1.0, FRAC_PI_2] {
                let a = cap_analytics(&CapSpec::new(theta, 1.0).unwrap(), n).unwrap();
                assert_relative_eq!(a.b_theta, a.volume, max_relative = 1e-11);
            }
        }
        // Half of the unit 4-ball.
        let a = cap_analytics(&CapSpec::new(FRAC_PI_2, 1.0).unwrap(), 3).unwrap();
        assert_relative_eq!(a.volume, PI * PI / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn volume_scales_cubically() {
        let a1 = cap_analytics(&CapSpec::new(0.9, 1.0).unwrap(), 2).unwrap();
        let a2 = cap_analytics(&CapSpec::new(0.9, 1.6).unwrap(), 2).unwrap();
        assert_relative_eq!(a2.volume, 1.6f64.powi(3) * a1.volume, max_relative = 1e-14);
    }
}
