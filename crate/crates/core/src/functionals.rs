//! Capillary quermassintegrals and the inequalities built on them, evaluated
//! by quadrature over a [`SurfaceSamples`] slice.
//!
//! With `c = cos θ`, `s = sin θ`:
//!
//! * `V_0 = |Σ̂| = (1/(n+1)) ∫_Σ ⟨x, ν⟩ dA`
//! * `V_1 = (|Σ| − c |∂̂Σ|) / (n+1)`
//! * `V_k = (∫_Σ H_{k−1} dA − (c s^{k−1} / n) ∫_{∂Σ} H^{∂Σ}_{k−2} ds) / (n+1)` for `2 ≤ k ≤ n+1`
//!
//! All sums are pairwise over nodes in index order, so results are
//! reproducible bit for bit.

use std::fmt::Write as _;

use serde::Serialize;

use crate::capgeom::{b_theta, cos_angle, SurfaceSamples};
use crate::error::{Error, Result};
use crate::quad::pairwise_sum_by;

/// CSV schema tag written as the first line of `functionals.csv`.
pub const FUNCTIONALS_SCHEMA: &str = "# capflow-functionals v1";

/// All functionals of one time slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub time: f64,
    pub n: usize,
    /// `V_{0,θ} … V_{n,θ}`.
    pub v: Vec<f64>,
    /// `V_{n+1,θ}` when the body is in `Γ_n`.
    pub v_top: Option<f64>,
    /// `I_{k,θ}` for `k = 2 … n+1`, stored at `k − 2`.
    pub isoperimetric: Vec<f64>,
    /// Relative Minkowski residual for `k = 1 … n`, stored at `k − 1`.
    pub minkowski: Vec<f64>,
    /// Alexandrov–Fenchel gap for `k = 1 … n`, stored at `k − 1`.
    pub af_gap: Vec<f64>,
    pub b_theta: f64,
}

impl FunctionalReport {
    pub fn isoperimetric_ratio(&self, k: usize) -> Option<f64> {
        k.checked_sub(2).and_then(|i| self.isoperimetric.get(i).copied())
    }

    pub fn minkowski_residual(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.minkowski.get(i).copied())
    }

    pub fn af(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.af_gap.get(i).copied())
    }

    /// CSV header for dimension `n`.
    pub fn csv_header(n: usize) -> String {
        let mut cols = vec!["time".to_string()];
        cols.extend((0..=n + 1).map(|k| format!("V{k}")));
        cols.extend((2..=n + 1).map(|k| format!("I{k}")));
        cols.extend((1..=n).map(|k| format!("minkowski{k}")));
        cols.extend((1..=n).map(|k| format!("af_gap{k}")));
        cols.push("b_theta".into());
        cols.join(",")
    }

    /// One CSV row matching [`FunctionalReport::csv_header`]. A missing
    /// `V_{n+1}` is written as an empty field.
    pub fn csv_row(&self) -> String {
        let mut row = String::new();
        write!(row, "{:e}", self.time).unwrap();
        for x in &self.v {
            write!(row, ",{x:e}").unwrap();
        }
        match self.v_top {
            Some(x) => write!(row, ",{x:e}").unwrap(),
            None => row.push(','),
        }
        for x in self.isoperimetric.iter().chain(&self.minkowski).chain(&self.af_gap) {
            write!(row, ",{x:e}").unwrap();
        }
        write!(row, ",{:e}", self.b_theta).unwrap();
        row
    }
}

fn require_cone(samples: &SurfaceSamples, k: usize) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    match samples.first_cone_violation(k) {
        Some((node, class)) => Err(Error::ConeViolation { required: k, class, node: Some(node) }),
        None => Ok(()),
    }
}

/// `∫_Σ g dA` over the sampled nodes.
pub fn integrate(samples: &SurfaceSamples, g: impl Fn(&crate::capgeom::GeometrySample) -> f64) -> f64 {
    let nodes = &samples.nodes;
    pairwise_sum_by(nodes.len(), |i| g(&nodes[i]) * nodes[i].area_weight)
}

/// `|Σ|`.
pub fn area(samples: &SurfaceSamples) -> f64 {
    integrate(samples, |_| 1.0)
}

/// Enclosed volume `(1/(n+1)) ∫_Σ ⟨x, ν⟩ dA`; the wall contributes nothing
/// because `⟨x, e⟩ = 0` there.
pub fn volume(samples: &SurfaceSamples) -> f64 {
    integrate(samples, |s| s.u) / (samples.n + 1) as f64
}

/// `V_{k,θ}` for `0 ≤ k ≤ n+1`. Needs `Γ_{k−1}` at every node.
pub fn quermass(samples: &SurfaceSamples, k: usize) -> Result<f64> {
    let n = samples.n;
    if k > n + 1 {
        return Err(Error::Domain(format!("quermassintegral index {k} exceeds n + 1 = {}", n + 1)));
    }
    let c = cos_angle(samples.theta);
    let s = samples.theta.sin();
    let n1 = (n + 1) as f64;
    match k {
        0 => Ok(volume(samples)),
        1 => Ok((area(samples) - c * samples.boundary.wetted) / n1),
        _ => {
            require_cone(samples, k - 1)?;
            let bulk = integrate(samples, |x| x.h[k - 1]);
            let edge = samples.boundary.curvature_integrals[k - 2];
            Ok((bulk - c * s.powi(k as i32 - 1) / n as f64 * edge) / n1)
        }
    }
}

/// `(A − B) / ((|A| + |B|)/2)` with `A = ∫ H_{k−1}(1 + cos θ ⟨ν,e⟩) dA` and
/// `B = ∫ H_k ⟨x,ν⟩ dA`, for `1 ≤ k ≤ n`.
pub fn minkowski_residual(samples: &SurfaceSamples, k: usize) -> Result<f64> {
    if k == 0 || k > samples.n {
        return Err(Error::Domain(format!("Minkowski index {k} out of range 1..={}", samples.n)));
    }
    require_cone(samples, k)?;
    let c = cos_angle(samples.theta);
    let a = integrate(samples, |x| x.h[k - 1] * (1.0 + c * x.nu_dot_e));
    let b = integrate(samples, |x| x.h[k] * x.u);
    Ok((a - b) / (0.5 * (a.abs() + b.abs())))
}

/// `I_{k,θ} = V_{k−1,θ} / V_{0,θ}^{(n+2−k)/(n+1)}` from precomputed values.
pub fn isoperimetric_from(v0: f64, vk1: f64, k: usize, n: usize) -> f64 {
    vk1 / v0.powf((n + 2 - k) as f64 / (n + 1) as f64)
}

/// `(V_k/b_θ)^{1/(n+1−k)} − (V_0/b_θ)^{1/(n+1)}` for `1 ≤ k ≤ n`.
pub fn af_gap_from(v0: f64, vk: f64, k: usize, n: usize, b: f64) -> f64 {
    (vk / b).powf(1.0 / (n + 1 - k) as f64) - (v0 / b).powf(1.0 / (n + 1) as f64)
}

/// Every functional of the slice. Needs a convex body (`Γ_n` everywhere).
pub fn report(samples: &SurfaceSamples, time: f64) -> Result<FunctionalReport> {
    let n = samples.n;
    let b = b_theta(samples.theta, n)?;
    let v = (0..=n).map(|k| quermass(samples, k)).collect::<Result<Vec<_>>>()?;
    let v_top = quermass(samples, n + 1).ok();
    let isoperimetric = (2..=n + 1).map(|k| isoperimetric_from(v[0], v[k - 1], k, n)).collect();
    let minkowski = (1..=n).map(|k| minkowski_residual(samples, k)).collect::<Result<Vec<_>>>()?;
    let af_gap = (1..=n).map(|k| af_gap_from(v[0], v[k], k, n, b)).collect();
    Ok(FunctionalReport { time, n, v, v_top, isoperimetric, minkowski, af_gap, b_theta: b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capgeom::{cap_field, sample_geometry, CapSpec, HalfSphereGrid, RadialField};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cap_samples(theta: f64, r: f64, m: usize) -> SurfaceSamples {
        let g = HalfSphereGrid::axisymmetric(2, m, theta).unwrap();
        let f = cap_field(&CapSpec::new(theta, r).unwrap(), &g).unwrap();
        sample_geometry(&g, &f, 2).unwrap()
    }

    #[test]
    fn hemisphere_values() {
        let s = cap_samples(FRAC_PI_2, 1.0, 400);
        assert_relative_eq!(volume(&s), 2.0 * PI / 3.0, max_relative = 1e-4);
        assert_relative_eq!(quermass(&s, 1).unwrap(), 2.0 * PI / 3.0, max_relative = 1e-4);
        let m = minkowski_residual(&s, 1).unwrap();
        assert!(m.abs() < 1e-12, "{m}");
    }

    #[test]
    fn unit_cap_quermassintegrals_coincide() {
        let theta = 1.0;
        let b = b_theta(theta, 2).unwrap();
        let s = cap_samples(theta, 1.0, 400);
        for k in 0..=3 {
            assert_relative_eq!(quermass(&s, k).unwrap(), b, max_relative = 1e-4);
        }
        let r = report(&s, 0.0).unwrap();
        for g in &r.af_gap {
            assert!(g.abs() < 1e-5);
        }
    }

    #[test]
    fn dilation_homogeneity() {
        let g = HalfSphereGrid::axisymmetric(3, 60, 0.8).unwrap();
        let f = RadialField::from_fn(&g, |b, _| {
            crate::capgeom::unit_cap_rho(0.8, b).ln() + 0.05 * b.cos().powi(2)
        });
        let s1 = sample_geometry(&g, &f, 1).unwrap();
        let s2 = sample_geometry(&g, &f.dilated(1.7), 1).unwrap();
        for k in 0..=3 {
            let ratio = quermass(&s2, k).unwrap() / quermass(&s1, k).unwrap();
            assert_relative_eq!(ratio, 1.7f64.powi(4 - k as i32), max_relative = 1e-12);
        }
    }

    #[test]
    fn csv_row_matches_header() {
        let s = cap_samples(0.7, 1.0, 40);
        let r = report(&s, 0.25).unwrap();
        let header = FunctionalReport::csv_header(2);
        assert_eq!(header.split(',').count(), r.csv_row().split(',').count());
        assert!(header.starts_with("time,V0,V1,V2,V3,I2,I3,"));
    }
}
