//! Per-node evaluation of the scalar flow `∂_t φ = (v/ρ) f̂`.
//!
//! The kernel owns its scratch buffers so that a time step allocates
//! nothing once the first evaluation has run.

use smallvec::smallvec;

use super::ConePolicy;
use super::meridian::{three_point, two_point, P2};
use crate::capgeom::stencil::{frame, jet, wall_ghosts};
use crate::capgeom::{cone_of, local_geometry, normalized_into, GridMode, HalfSphereGrid};
use crate::error::{Error, Result};
use crate::quad::{pairwise_sum_by, sphere_measure};
use crate::symm::{hk_root, ConeClass, Scalars};

/// Margin above the cone boundary used by the clamp policy.
pub(crate) const CLAMP_EPS: f64 = 1e-8;

/// Stage-1 data kept per node for monitors and functionals.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NodeEval {
    pub rho: f64,
    pub u: f64,
    pub u_bar: f64,
    pub nu_dot_e: f64,
    pub f_curv: f64,
    /// Normal speed `1 + cos θ ⟨ν,e⟩ − u F`, less the `k = 1` mean shift.
    pub speed: f64,
    pub kappa_min: f64,
    pub harmonic: f64,
    /// `H_{k−2}, H_{k−1}, H_k` (`H_{−1}` is stored as zero).
    pub hk: [f64; 3],
    /// `dA` weight.
    pub area_weight: f64,
    /// `|x^T|² = |x|² − u²`.
    pub tangential_sq: f64,
    /// `f` from independently assembled `x` and `ν` vectors.
    pub speed_vec: f64,
    /// `|e^φ/v · rhs − f|` against `speed_vec`.
    pub gauge: f64,
}

/// Per-row scratch of the axisymmetric path.
#[derive(Debug, Clone, Default)]
struct AxialNode {
    rho: f64,
    v: f64,
    d_beta: f64,
    kappa: Scalars,
    h: Scalars,
    f_curv: f64,
    /// `f` before the `k = 1` mean shift.
    speed: f64,
    area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct EvalStats {
    /// Explicit stability limit `1 / max_j (D_j Λ_j)`.
    pub dt_limit: f64,
    /// Nodes whose curvatures were shifted into the cone.
    pub clamped: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    pub grid: HalfSphereGrid,
    pub k: usize,
    cos_t: f64,
    cone_policy: ConePolicy,
    ghosts: Scalars,
    /// `Λ_j`, the inverse squared mesh scale of row `j`.
    lambda: Vec<f64>,
    /// `∫ sin^{n−1}` over each row's cell.
    cell: Vec<f64>,
    points: Vec<P2>,
    axial: Vec<AxialNode>,
    pub nodes: Vec<NodeEval>,
}

impl Kernel {
    pub fn new(grid: &HalfSphereGrid, k: usize, cone_policy: ConePolicy) -> Result<Self> {
        if k == 0 || k > grid.n() {
            return Err(Error::config("k", format!("k = {k} out of range 1..={}", grid.n())));
        }
        let h = grid.spacing();
        let lambda = (0..grid.rows())
            .map(|j| match grid.mode() {
                GridMode::Axisymmetric => 1.0 / (h * h),
                GridMode::Full2d if j == 0 => 2.0 / (h * h),
                GridMode::Full2d => {
                    let sa = grid.sin_beta(j) * grid.azimuth_spacing();
                    1.0 / (h * h) + 1.0 / (sa * sa)
                }
            })
            .collect();
        let omega = sphere_measure(grid.n() - 1);
        let cell = (0..grid.rows()).map(|j| grid.sphere_weight(grid.index(j, 0)) / omega).collect();
        let axial_rows = if grid.mode() == GridMode::Axisymmetric { grid.rows() } else { 0 };
        Ok(Self {
            grid: grid.clone(),
            k,
            cos_t: grid.cos_theta(),
            cone_policy,
            ghosts: Scalars::new(),
            lambda,
            cell,
            points: vec![[0.0; 2]; axial_rows],
            axial: vec![AxialNode::default(); axial_rows],
            nodes: vec![NodeEval::default(); grid.node_count()],
        })
    }

    /// Writes `∂_t φ` into `rhs`. With `record`, also fills [`Kernel::nodes`]
    /// with monitor data and the gauge cross-check.
    pub fn eval(&mut self, phi: &[f64], rhs: &mut [f64], record: bool) -> Result<EvalStats> {
        match self.grid.mode() {
            GridMode::Axisymmetric => self.eval_axisymmetric(phi, rhs, record),
            GridMode::Full2d => self.eval_general(phi, rhs, record),
        }
    }

    /// Row-by-row evaluation on the meridian curve `(ρ sin β, ρ cos β)`.
    ///
    /// The meridional curvature and the normal come from the circle through
    /// each node and its two neighbours (the pole mirrors its neighbour
    /// across the axis). On the wall the normal is the one fixed by the
    /// contact angle and the circle passes through the next row. The
    /// rotational curvature is `ν_r / r`. Spheres centered on the axis are
    /// reproduced exactly, so every cap is a discrete equilibrium.
    ///
    /// For `k = 1` the area-weighted mean of `f` is subtracted. It vanishes
    /// on caps and makes the enclosed volume a discrete invariant.
    fn eval_axisymmetric(&mut self, phi: &[f64], rhs: &mut [f64], record: bool) -> Result<EvalStats> {
        let grid = &self.grid;
        let n = grid.n();
        let (k, c) = (self.k, self.cos_t);
        let jb = grid.boundary_row();
        for (j, p) in self.points.iter_mut().enumerate() {
            let rho = phi[j].exp();
            *p = [rho * grid.sin_beta(j), rho * grid.cos_beta(j)];
        }
        let wall_normal = [grid.theta().sin(), c];
        let mut stats = EvalStats { dt_limit: f64::INFINITY, clamped: 0 };
        let mut worst: Option<(usize, ConeClass)> = None;
        let mut hv: Scalars = smallvec![0.0; n + 1];
        for j in 0..=jb {
            let pts = &self.points;
            let at = pts[j];
            let (normal, k_m) = if j == jb {
                (wall_normal, two_point(pts[j - 1], at, wall_normal))
            } else {
                let next = pts[j + 1];
                let prev = if j == 0 { [-next[0], next[1]] } else { pts[j - 1] };
                three_point(prev, at, next)
            };
            let rho = phi[j].exp();
            let (sb, cb) = (grid.sin_beta(j), grid.cos_beta(j));
            // ⟨X, ν⟩ = 1/v and ⟨e_β, ν⟩ = −∂_β φ / v.
            let v = 1.0 / (normal[0] * sb + normal[1] * cb);
            let d = -(normal[0] * cb - normal[1] * sb) * v;
            let k_rot = if j == 0 { k_m } else { normal[0] / at[0] };
            let node = &mut self.axial[j];
            node.kappa.clear();
            node.kappa.push(k_m);
            node.kappa.extend(std::iter::repeat(k_rot).take(n - 1));
            axial_normalized(k_m, k_rot, &mut hv);
            let cone = cone_of(&hv);
            if !cone.contains(k) {
                match self.cone_policy {
                    ConePolicy::Abort => {
                        if worst.map_or(true, |(_, w)| cone.max_k < w.max_k) {
                            worst = Some((j, cone));
                        }
                        continue;
                    }
                    ConePolicy::ClampReport => {
                        node.kappa = shift_into_cone(&node.kappa, k);
                        hv = normalized_into(&node.kappa);
                        stats.clamped += 1;
                    }
                }
            }
            let f_curv = hk_root(hv[k], k);
            let u = rho / v;
            node.rho = rho;
            node.v = v;
            node.d_beta = d;
            node.f_curv = f_curv;
            node.h.clone_from(&hv);
            // f̂ = 1 − (cos θ / v)(cos β + sin β ∂_β φ) − (e^φ / v) F
            node.speed = 1.0 - c / v * (cb + sb * d) - u * f_curv;
            node.area = rho.powi(n as i32) * v * self.cell[j];
            let trace = hv[k - 1] * f_curv / hv[k];
            stats.dt_limit = stats.dt_limit.min(1.0 / (trace / (rho * v) * self.lambda[j]));
        }
        if let Some((node, class)) = worst {
            return Err(Error::ConeViolation { required: k, class, node: Some(node) });
        }
        let shift = if k == 1 {
            let total = pairwise_sum_by(jb + 1, |j| self.axial[j].area);
            pairwise_sum_by(jb + 1, |j| self.axial[j].speed * self.axial[j].area) / total
        } else {
            0.0
        };
        for j in 0..=jb {
            let a = &self.axial[j];
            rhs[j] = a.v / a.rho * (a.speed - shift);
            if record {
                self.nodes[j] = record_node(
                    grid,
                    j,
                    [a.d_beta, 0.0],
                    a.rho,
                    a.v,
                    &a.kappa,
                    &a.h,
                    k,
                    c,
                    a.f_curv,
                    rhs[j],
                    shift,
                );
            }
        }
        Ok(stats)
    }

    fn eval_general(&mut self, phi: &[f64], rhs: &mut [f64], record: bool) -> Result<EvalStats> {
        self.ghosts = wall_ghosts(&self.grid, phi);
        let grid = &self.grid;
        let k = self.k;
        let c = self.cos_t;
        let mut stats = EvalStats { dt_limit: f64::INFINITY, clamped: 0 };
        let mut worst: Option<(usize, ConeClass)> = None;
        for idx in 0..grid.node_count() {
            let jt = jet(grid, phi, &self.ghosts, idx);
            let geo = local_geometry(grid, &jt);
            let (j, _) = grid.row_col(idx);
            let (sb, cb) = (grid.sin_beta(j), grid.cos_beta(j));
            let mut kappa = geo.kappa;
            let mut h = normalized_into(&kappa);
            let cone = cone_of(&h);
            if !cone.contains(k) {
                match self.cone_policy {
                    ConePolicy::Abort => {
                        if worst.map_or(true, |(_, w)| cone.max_k < w.max_k) {
                            worst = Some((idx, cone));
                        }
                        continue;
                    }
                    ConePolicy::ClampReport => {
                        kappa = shift_into_cone(&kappa, k);
                        h = normalized_into(&kappa);
                        stats.clamped += 1;
                    }
                }
            }
            let rho = geo.rho;
            let v = geo.v;
            let f_curv = hk_root(h[k], k);
            // f̂ = (1 − (cos θ / v)(cos β + sin β ∂_β φ)) − (e^φ / v) F
            let f_hat = (1.0 - c / v * (cb + sb * geo.d_beta)) - rho / v * f_curv;
            let speed = v / rho * f_hat;
            rhs[idx] = speed;
            // Σ F^{ii} = H_{k−1} F / H_k.
            let trace = h[k - 1] * f_curv / h[k];
            let diffusivity = trace / (rho * v);
            stats.dt_limit = stats.dt_limit.min(1.0 / (diffusivity * self.lambda[j]));
            if record {
                self.nodes[idx] = record_node(grid, idx, jt.grad, rho, v, &kappa, &h, k, c, f_curv, speed, 0.0);
            }
        }
        if let Some((node, class)) = worst {
            return Err(Error::ConeViolation { required: k, class, node: Some(node) });
        }
        Ok(stats)
    }
}

#[allow(clippy::too_many_arguments)]
fn record_node(
    grid: &HalfSphereGrid,
    idx: usize,
    grad: [f64; 2],
    rho: f64,
    v: f64,
    kappa: &[f64],
    h: &[f64],
    k: usize,
    c: f64,
    f_curv: f64,
    scalar_speed: f64,
    shift: f64,
) -> NodeEval {
    let (j, _) = grid.row_col(idx);
    let nu_dot_e = -(grid.cos_beta(j) + grid.sin_beta(j) * grad[0]) / v;
    let u = rho / v;
    // Geometric path: assemble x and ν as vectors in R^{n+1}.
    let [x, eb, ea] = frame(grid, idx);
    let mut u_vec = 0.0;
    let mut x_sq = 0.0;
    for i in 0..x.len() {
        let nu_i = (x[i] - grad[0] * eb[i] - grad[1] * ea[i]) / v;
        u_vec += rho * x[i] * nu_i;
        x_sq += rho * rho * x[i] * x[i];
    }
    let nu_last = (x[x.len() - 1] - grad[0] * eb[x.len() - 1] - grad[1] * ea[x.len() - 1]) / v;
    let geometric = 1.0 + c * (-nu_last) - u_vec * f_curv - shift;
    let gauge = (rho / v * scalar_speed - geometric).abs();
    let (mut kmin, mut harmonic) = (f64::INFINITY, 0.0);
    for &x in kappa {
        kmin = kmin.min(x);
        harmonic += 1.0 / x;
    }
    NodeEval {
        rho,
        u,
        u_bar: u / (1.0 + c * nu_dot_e),
        nu_dot_e,
        f_curv,
        speed: 1.0 + c * nu_dot_e - u * f_curv - shift,
        kappa_min: kmin,
        harmonic,
        hk: [if k >= 2 { h[k - 2] } else { 0.0 }, h[k - 1], h[k]],
        area_weight: rho.powi(grid.n() as i32) * v * grid.sphere_weight(idx),
        tangential_sq: (x_sq - u * u).max(0.0),
        speed_vec: geometric,
        gauge,
    }
}

/// `H_0 … H_n` of `(κ_m, κ_rot, …, κ_rot)`:
/// `H_j = ((n−j)/n) κ_rot^j + (j/n) κ_m κ_rot^{j−1}`.
fn axial_normalized(k_m: f64, k_rot: f64, out: &mut [f64]) {
    let n = out.len() - 1;
    let nf = n as f64;
    out[0] = 1.0;
    let mut pow = 1.0;
    for j in 1..=n {
        let jf = j as f64;
        out[j] = (nf - jf) / nf * pow * k_rot + jf / nf * k_m * pow;
        pow *= k_rot;
    }
}

/// Smallest uniform shift `κ + t(1,…,1)`, `t ≥ 0`, with `H_j ≥ ε` for all
/// `j ≤ k`, found by bisection.
pub(crate) fn shift_into_cone(kappa: &[f64], k: usize) -> Scalars {
    let ok = |t: f64| {
        let shifted: Scalars = kappa.iter().map(|x| x + t).collect();
        normalized_into(&shifted)[1..=k].iter().all(|&h| h >= CLAMP_EPS)
    };
    let min = kappa.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = (-min).max(0.0) + CLAMP_EPS.powf(1.0 / k as f64) + CLAMP_EPS;
    while !ok(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut out: Scalars = smallvec![0.0; kappa.len()];
    for (o, x) in out.iter_mut().zip(kappa) {
        *o = x + hi;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_lands_on_cone_boundary() {
        let kappa = [2.0, -3.0, 0.5];
        for k in 1..=3 {
            let s = shift_into_cone(&kappa, k);
            let h = normalized_into(&s);
            assert!(h[1..=k].iter().all(|&x| x >= CLAMP_EPS));
            let min_h = h[1..=k].iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min_h < 1e-6, "shift overshoots: {min_h}");
        }
        let inside = shift_into_cone(&[1.0, 2.0], 2);
        assert!((inside[0] - 1.0).abs() < 1e-12);
    }

    fn perturbed(grid: &HalfSphereGrid) -> Vec<f64> {
        let cap = crate::capgeom::cap_field(&crate::capgeom::CapSpec::new(grid.theta(), 1.0).unwrap(), grid).unwrap();
        (0..grid.rows()).map(|j| cap.phi[j] + 0.05 * grid.cos_beta(j).powi(2)).collect()
    }

    #[test]
    fn caps_are_discrete_equilibria() {
        for theta in [0.4, 1.0, std::f64::consts::FRAC_PI_2] {
            let grid = HalfSphereGrid::axisymmetric(2, 40, theta).unwrap();
            for r in [0.6, 1.7] {
                let cap = crate::capgeom::cap_field(&crate::capgeom::CapSpec::new(theta, r).unwrap(), &grid).unwrap();
                for k in [1, 2] {
                    let mut kernel = Kernel::new(&grid, k, ConePolicy::Abort).unwrap();
                    let mut rhs = vec![0.0; grid.node_count()];
                    kernel.eval(&cap.phi, &mut rhs, true).unwrap();
                    // The normal speed, not ∂_t φ, which scales it by v/ρ.
                    let worst = kernel.nodes.iter().fold(0.0f64, |a, x| a.max(x.speed.abs()));
                    assert!(worst < 1e-12, "θ={theta} r={r} k={k}: {worst}");
                }
            }
        }
    }

    #[test]
    fn mean_shift_makes_volume_rate_vanish() {
        let grid = HalfSphereGrid::axisymmetric(2, 60, 0.9).unwrap();
        let mut kernel = Kernel::new(&grid, 1, ConePolicy::Abort).unwrap();
        let mut rhs = vec![0.0; grid.node_count()];
        kernel.eval(&perturbed(&grid), &mut rhs, true).unwrap();
        let nodes = &kernel.nodes;
        let rate = pairwise_sum_by(nodes.len(), |i| nodes[i].speed * nodes[i].area_weight);
        let scale = pairwise_sum_by(nodes.len(), |i| nodes[i].speed.abs() * nodes[i].area_weight);
        assert!(scale > 1e-3 && rate.abs() < 1e-13 * scale, "{rate} vs {scale}");
    }

    #[test]
    fn recorded_gauge_is_at_rounding() {
        let grid = HalfSphereGrid::axisymmetric(2, 60, 1.2).unwrap();
        for k in [1, 2] {
            let mut kernel = Kernel::new(&grid, k, ConePolicy::Abort).unwrap();
            let mut rhs = vec![0.0; grid.node_count()];
            kernel.eval(&perturbed(&grid), &mut rhs, true).unwrap();
            let worst = kernel.nodes.iter().fold(0.0f64, |a, n| a.max(n.gauge));
            assert!(worst < 1e-13, "{worst}");
        }
    }

    #[test]
    fn axial_normalized_matches_general_path() {
        for (k_m, k_rot) in [(1.3, 0.4), (-0.2, 2.0), (0.0, 1.0)] {
            for n in 2..=5 {
                let mut out = vec![0.0; n + 1];
                axial_normalized(k_m, k_rot, &mut out);
                let mut kappa = vec![k_rot; n];
                kappa[0] = k_m;
                let general = normalized_into(&kappa);
                for (a, b) in out.iter().zip(general.iter()) {
                    assert!((a - b).abs() < 1e-14, "n={n}: {a} vs {b}");
                }
            }
        }
    }
}
