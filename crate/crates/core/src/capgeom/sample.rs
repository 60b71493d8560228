use smallvec::smallvec;

use super::grid::{GridMode, HalfSphereGrid, RadialField};
use super::stencil::{frame, jet, principal_curvatures, wall_ghosts, Jet};
use crate::error::{Error, Result};
use crate::quad::sphere_measure;
use crate::symm::{binomial, hk_root, ConeClass, CurvatureVector, Scalars};

/// Pointwise extrinsic data of the radial graph at one grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySample {
    pub node: usize,
    pub beta: f64,
    pub xi: f64,
    pub rho: f64,
    /// `ρ(X) X ∈ R^{n+1}`.
    pub position: Scalars,
    /// Outward unit normal `ν = (X − ∇̄φ)/v`.
    pub normal: Scalars,
    /// `√(1 + |∇̄φ|²)`.
    pub v: f64,
    /// `∇̄_{∂β} φ`.
    pub d_beta: f64,
    /// `⟨ν, e⟩` from the polar closed form `−(cos β + sin β ∂_β φ)/v`.
    pub nu_dot_e: f64,
    /// Support function `⟨x, ν⟩`.
    pub u: f64,
    /// Capillary support `u / (1 + cos θ ⟨ν, e⟩)`.
    pub u_bar: f64,
    pub kappa: CurvatureVector,
    /// Normalized `H_0, …, H_n`.
    pub h: Scalars,
    pub cone: ConeClass,
    /// Index of the curvature function `F = H_k^{1/k}`.
    pub k: usize,
    /// `F = H_k^{1/k}`; `None` outside `Γ_k`.
    pub f: Option<f64>,
    /// `dA` quadrature weight at this node.
    pub area_weight: f64,
}

impl GeometrySample {
    /// `⟨ν, e⟩` from the assembled normal vector, `e = −e_{n+1}`.
    pub fn nu_dot_e_from_normal(&self) -> f64 {
        -self.normal[self.normal.len() - 1]
    }

    /// `⟨x, ν⟩` from the assembled vectors.
    pub fn support_from_vectors(&self) -> f64 {
        self.position.iter().zip(&self.normal).map(|(a, b)| a * b).sum()
    }

    pub fn harmonic_curvature(&self) -> f64 {
        self.kappa.harmonic()
    }

    pub fn in_cone(&self, k: usize) -> bool {
        self.cone.contains(k)
    }
}

/// Sampled geometry of one time slice together with its wall trace.
#[derive(Debug, Clone)]
pub struct SurfaceSamples {
    pub n: usize,
    pub theta: f64,
    pub k: usize,
    pub nodes: Vec<GeometrySample>,
    pub boundary: BoundaryTrace,
}

impl SurfaceSamples {
    /// First node (if any) outside `Γ_k`, with its cone class.
    pub fn first_cone_violation(&self, k: usize) -> Option<(usize, ConeClass)> {
        self.nodes.iter().find(|s| !s.in_cone(k)).map(|s| (s.node, s.cone))
    }
}

/// The boundary `∂Σ` as a hypersurface of the wall `∂R^{n+1}_+ ≅ R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub n: usize,
    /// Trace radius (axisymmetric bodies: `∂Σ` is a round `(n−1)`-sphere).
    pub radius: Option<f64>,
    /// Trace polygon in the wall (full2d).
    pub points: Vec<[f64; 2]>,
    /// `|∂̂Σ|`, the measure of the wetted region.
    pub wetted: f64,
    /// `∫_{∂Σ} H^{∂Σ}_j ds` for `j = 0, …, n−1`.
    pub curvature_integrals: Vec<f64>,
}

impl BoundaryTrace {
    pub fn length(&self) -> f64 {
        self.curvature_integrals[0]
    }

    fn axisymmetric(n: usize, radius: f64) -> Self {
        let sphere = sphere_measure(n - 1);
        let measure = sphere * radius.powi(n as i32 - 1);
        let curvature_integrals = (0..n).map(|j| measure * radius.powi(-(j as i32))).collect();
        Self {
            n,
            radius: Some(radius),
            points: Vec::new(),
            wetted: sphere * radius.powi(n as i32) / n as f64,
            curvature_integrals,
        }
    }

    fn polygon(points: Vec<[f64; 2]>) -> Self {
        let m = points.len();
        let mut area = 0.0;
        let mut length = 0.0;
        let mut turning = 0.0;
        for i in 0..m {
            let p = points[i];
            let q = points[(i + 1) % m];
            let r = points[(i + 2) % m];
            area += p[0] * q[1] - q[0] * p[1];
            length += (q[0] - p[0]).hypot(q[1] - p[1]);
            let (a, b) = ([q[0] - p[0], q[1] - p[1]], [r[0] - q[0], r[1] - q[1]]);
            turning += (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1]);
        }
        Self {
            n: 2,
            radius: None,
            points,
            wetted: 0.5 * area.abs(),
            curvature_integrals: vec![length, turning],
        }
    }
}

pub(crate) struct LocalGeometry {
    pub rho: f64,
    pub v: f64,
    pub d_beta: f64,
    pub kappa: Scalars,
}

#[inline]
pub(crate) fn local_geometry(grid: &HalfSphereGrid, jt: &Jet) -> LocalGeometry {
    LocalGeometry {
        rho: jt.phi.exp(),
        v: (1.0 + jt.grad_sq()).sqrt(),
        d_beta: jt.grad[0],
        kappa: principal_curvatures(grid, jt),
    }
}

/// Normalized `H_0..H_n` of `kappa` into a fixed buffer.
#[inline]
pub(crate) fn normalized_into(kappa: &[f64]) -> Scalars {
    let n = kappa.len();
    let mut e: Scalars = smallvec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &x) in kappa.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    for (j, v) in e.iter_mut().enumerate() {
        *v /= binomial(n, j);
    }
    e
}

#[inline]
pub(crate) fn cone_of(h: &[f64]) -> ConeClass {
    ConeClass { max_k: h[1..].iter().take_while(|&&x| x > 0.0).count() }
}

/// Evaluates positions, normals, support functions, principal curvatures
/// and area weights at every node.
///
/// `k` selects the curvature function `F = H_k^{1/k}`; nodes outside `Γ_k`
/// get `f = None` and are reported, not rejected.
pub fn sample_geometry(grid: &HalfSphereGrid, field: &RadialField, k: usize) -> Result<SurfaceSamples> {
    field.check(grid)?;
    if k == 0 || k > grid.n() {
        return Err(Error::Domain(format!("curvature index k = {k} out of range 1..={}", grid.n())));
    }
    let ghosts = wall_ghosts(grid, &field.phi);
    let cos_t = grid.cos_theta();
    let mut nodes = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let jt = jet(grid, &field.phi, &ghosts, idx);
        nodes.push(assemble(grid, idx, &jt, cos_t, k));
    }
    let boundary = boundary_trace(grid, field);
    Ok(SurfaceSamples { n: grid.n(), theta: grid.theta(), k, nodes, boundary })
}

fn assemble(grid: &HalfSphereGrid, idx: usize, jt: &Jet, cos_t: f64, k: usize) -> GeometrySample {
    let (j, l) = grid.row_col(idx);
    let geo = local_geometry(grid, jt);
    let [x, eb, ea] = frame(grid, idx);
    let rho = geo.rho;
    let v = geo.v;
    let position: Scalars = x.iter().map(|c| rho * c).collect();
    let normal: Scalars = (0..x.len())
        .map(|i| (x[i] - jt.grad[0] * eb[i] - jt.grad[1] * ea[i]) / v)
        .collect();
    let (s, c) = (grid.sin_beta(j), grid.cos_beta(j));
    let nu_dot_e = -(c + s * geo.d_beta) / v;
    let u = rho / v;
    let u_bar = u / (1.0 + cos_t * nu_dot_e);
    let h = normalized_into(&geo.kappa);
    let cone = cone_of(&h);
    let f = cone.contains(k).then(|| hk_root(h[k], k));
    let area_weight = rho.powi(grid.n() as i32) * v * grid.quadrature_weight(idx);
    GeometrySample {
        node: idx,
        beta: grid.beta(j),
        xi: grid.xi(l),
        rho,
        position,
        normal,
        v,
        d_beta: geo.d_beta,
        nu_dot_e,
        u,
        u_bar,
        kappa: CurvatureVector::from_scalars(geo.kappa),
        h,
        cone,
        k,
        f,
        area_weight,
    }
}

/// Wall trace of the graph: `ρ(π/2, ξ) ξ`.
pub fn boundary_trace(grid: &HalfSphereGrid, field: &RadialField) -> BoundaryTrace {
    trace_of(grid, &field.phi)
}

pub(crate) fn trace_of(grid: &HalfSphereGrid, phi: &[f64]) -> BoundaryTrace {
    let jb = grid.boundary_row();
    match grid.mode() {
        GridMode::Axisymmetric => BoundaryTrace::axisymmetric(grid.n(), phi[jb].exp()),
        GridMode::Full2d => {
            let pts = (0..grid.m_xi())
                .map(|l| {
                    let r = phi[grid.index(jb, l)].exp();
                    let (sa, ca) = grid.xi(l).sin_cos();
                    [r * ca, r * sa]
                })
                .collect();
            BoundaryTrace::polygon(pts)
        }
    }
}

/// Left side of the static equation, `1 + cos θ ⟨ν, e⟩ − F ⟨x, ν⟩`. This is
/// also the normal speed of the flow.
pub fn static_residual(sample: &GeometrySample, theta: f64) -> Result<f64> {
    let f = sample.f.ok_or(Error::ConeViolation {
        required: sample.k,
        class: sample.cone,
        node: Some(sample.node),
    })?;
    Ok(1.0 + super::grid::cos_angle(theta) * sample.nu_dot_e - f * sample.u)
}

/// Contact-angle diagnostics at one wall node.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFrameReport {
    pub node: usize,
    /// `⟨ν, e⟩ + cos θ`.
    pub angle_residual: f64,
    /// `|e − (sin θ μ − cos θ ν)|`.
    pub frame_residual: f64,
    /// `|ν̄ − (cos θ μ + sin θ ν)|` with `ν̄` the outward unit normal of
    /// `∂Σ` inside the wall.
    pub wall_normal_residual: f64,
}

/// Checks the capillary frame relations along the wall row.
pub fn boundary_frame_check(grid: &HalfSphereGrid, field: &RadialField) -> Result<Vec<BoundaryFrameReport>> {
    field.check(grid)?;
    let ghosts = wall_ghosts(grid, &field.phi);
    let (st, ct) = (grid.theta().sin(), grid.cos_theta());
    let n1 = grid.n() + 1;
    let mut e: Scalars = smallvec![0.0; n1];
    e[n1 - 1] = -1.0;
    let jb = grid.boundary_row();
    let mut out = Vec::new();
    for idx in grid.boundary_nodes() {
        let jt = jet(grid, &field.phi, &ghosts, idx);
        let v = (1.0 + jt.grad_sq()).sqrt();
        let [x, eb, ea] = frame(grid, idx);
        let nu: Scalars = (0..n1).map(|i| (x[i] - jt.grad[0] * eb[i] - jt.grad[1] * ea[i]) / v).collect();
        // Tangents ∂_β x and (unit-azimuth) ∂_ξ x, up to the common factor ρ.
        let tb: Scalars = (0..n1).map(|i| jt.grad[0] * x[i] + eb[i]).collect();
        let ta: Scalars = (0..n1).map(|i| jt.grad[1] * x[i] + ea[i]).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        // Co-normal: the part of ∂_β x orthogonal to the boundary tangent.
        let mut mu: Scalars = tb.clone();
        if grid.mode() == GridMode::Full2d {
            let proj = dot(&tb, &ta) / dot(&ta, &ta);
            for i in 0..n1 {
                mu[i] -= proj * ta[i];
            }
        }
        let norm = dot(&mu, &mu).sqrt();
        mu.iter_mut().for_each(|m| *m /= norm);
        let frame_residual = (0..n1)
            .map(|i| (e[i] - (st * mu[i] - ct * nu[i])).powi(2))
            .sum::<f64>()
            .sqrt();
        let wall_normal = wall_outward_normal(grid, field, idx, jb);
        let wall_normal_residual = (0..n1)
            .map(|i| (wall_normal[i] - (ct * mu[i] + st * nu[i])).powi(2))
            .sum::<f64>()
            .sqrt();
        out.push(BoundaryFrameReport {
            node: idx,
            angle_residual: dot(&nu, &e) + ct,
            frame_residual,
            wall_normal_residual,
        });
    }
    Ok(out)
}

/// Outward unit normal of the trace inside the wall, reconstructed from the
/// discrete trace curve.
fn wall_outward_normal(grid: &HalfSphereGrid, field: &RadialField, idx: usize, jb: usize) -> Scalars {
    let n1 = grid.n() + 1;
    let mut out: Scalars = smallvec![0.0; n1];
    match grid.mode() {
        GridMode::Axisymmetric => out[0] = 1.0,
        GridMode::Full2d => {
            let (_, l) = grid.row_col(idx);
            let m = grid.m_xi();
            let ha = grid.azimuth_spacing();
            let r = |ll: usize| field.rho(grid.index(jb, ll));
            let r0 = r(l);
            let dr = (r(l + 1) - r(l + m - 1)) / (2.0 * ha);
            let a = grid.xi(l);
            // Tangent of α ↦ r(α)(cos α, sin α); outward normal is its
            // clockwise rotation for a counter-clockwise curve.
            let t = [dr * a.cos() - r0 * a.sin(), dr * a.sin() + r0 * a.cos()];
            let nt = t[0].hypot(t[1]);
            out[0] = t[1] / nt;
            out[1] = -t[0] / nt;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capgeom::cap::{cap_field, CapSpec};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn hemisphere_meets_wall_orthogonally() {
        let g = HalfSphereGrid::axisymmetric(2, 50, FRAC_PI_2).unwrap();
        let f = RadialField::from_fn(&g, |_, _| 0.0);
        let s = sample_geometry(&g, &f, 2).unwrap();
        let b = &s.nodes[g.boundary_row()];
        assert_eq!(b.nu_dot_e, 0.0);
        for node in &s.nodes {
            assert!((node.kappa.as_slice()[0] - 1.0).abs() < 1e-14);
            assert!((static_residual(node, FRAC_PI_2).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn normal_is_unit_and_consistent() {
        for g in [
            HalfSphereGrid::axisymmetric(3, 40, 0.9).unwrap(),
            HalfSphereGrid::full2d(20, 12, 0.9).unwrap(),
        ] {
            let f = RadialField::from_fn(&g, |b, a| 0.2 * b.cos().powi(2) + 0.05 * b.sin() * a.cos());
            let s = sample_geometry(&g, &f, 1).unwrap();
            for node in &s.nodes {
                let norm: f64 = node.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-14);
                assert!(node.v >= 1.0);
                assert!((node.nu_dot_e - node.nu_dot_e_from_normal()).abs() < 1e-14);
                assert!((node.u - node.support_from_vectors()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn trace_of_cap_is_round() {
        let g = HalfSphereGrid::full2d(20, 64, 1.0).unwrap();
        let cap = CapSpec::new(1.0, 1.3).unwrap();
        let f = cap_field(&cap, &g).unwrap();
        let t = boundary_trace(&g, &f);
        let r = 1.3 * 1.0f64.sin();
        assert!((t.curvature_integrals[1] - 2.0 * PI).abs() < 1e-12);
        assert!((t.length() - 2.0 * PI * r).abs() < 1e-2);
        assert!((t.wetted - PI * r * r).abs() < 1e-2);
    }
}
