//! Time integration of the capillary curvature flow in the radial gauge
//!
//! ```text
//! ∂_t φ = (v/ρ) f̂,   f̂ = 1 − (cos θ/v)(cos β + sin β ∂_β φ) − (ρ/v) H_k^{1/k}
//! ∂_β φ = cos θ √(1 + |∇̄φ|²)   on β = π/2
//! ```
//!
//! with explicit midpoint RK2 steps under a parabolic CFL limit or
//! linearly implicit Rosenbrock steps, plus monitors for the maximum
//! principles and monotone quantities the flow is known to satisfy.
//!
//! Axisymmetric speeds come from circles fitted through neighbouring
//! meridian points, which makes every cap an exact discrete equilibrium;
//! full2d speeds use the finite-difference jet of `capgeom`.

mod banded;
mod kernel;
mod meridian;
mod monitor;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capgeom::stencil::{jet, wall_ghosts};
use crate::capgeom::{cap_field, trace_of, unit_cap_rho, CapSpec, GridMode, HalfSphereGrid, RadialField};
use banded::Banded;
use crate::error::{Error, Result};
use kernel::Kernel;
use crate::quad::pairwise_sum_by;
pub use monitor::{MonitorLog, MonitorRow, MonitorStats, MONITORS_SCHEMA};

/// What to do when a node leaves `Γ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ConePolicy {
    /// Stop with a structured error naming the worst node.
    #[default]
    Abort,
    /// Shift the node's curvatures into `Γ_k` and mark the run tainted.
    ClampReport,
}

impl FromStr for ConePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abort" => Ok(ConePolicy::Abort),
            "clamp-report" => Ok(ConePolicy::ClampReport),
            other => Err(Error::config("cone_policy", format!("unknown cone policy `{other}`"))),
        }
    }
}

impl std::fmt::Display for ConePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConePolicy::Abort => "abort",
            ConePolicy::ClampReport => "clamp-report",
        })
    }
}

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Explicit midpoint RK2 at `dt_safety` times the parabolic stability
    /// limit.
    #[default]
    Rk2,
    /// Two-stage L-stable linearly implicit Rosenbrock scheme (ROS2,
    /// `γ = 1 + 1/√2`) with a banded finite-difference Jacobian and
    /// embedded error control. Axisymmetric grids only.
    Rosenbrock,
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk2" => Ok(Integrator::Rk2),
            "rosenbrock" => Ok(Integrator::Rosenbrock),
            other => Err(Error::config("integrator", format!("unknown integrator `{other}`"))),
        }
    }
}

impl std::fmt::Display for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Integrator::Rk2 => "rk2",
            Integrator::Rosenbrock => "rosenbrock",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Curvature index, `F = H_k^{1/k}`.
    pub k: usize,
    pub theta: f64,
    /// Fraction of the explicit stability limit.
    pub dt_safety: f64,
    pub t_max: f64,
    /// Converged once `‖f‖_∞` drops below this ...
    pub speed_tol: f64,
    /// ... and the standard deviation of `F` drops below this.
    pub f_stddev_tol: f64,
    pub cone_policy: ConePolicy,
    /// Smallest admissible time step.
    pub dt_floor: f64,
    /// In-memory monitor decimation.
    pub keep_every: u64,
    pub integrator: Integrator,
    /// Local error target per Rosenbrock step, absolute in `φ`.
    pub step_tol: f64,
    /// Largest Rosenbrock step.
    pub dt_max: f64,
}

impl FlowConfig {
    pub fn new(k: usize, theta: f64) -> Self {
        Self {
            k,
            theta,
            dt_safety: 0.4,
            t_max: 10.0,
            speed_tol: 1e-7,
            f_stddev_tol: 1e-6,
            cone_policy: ConePolicy::Abort,
            dt_floor: 1e-13,
            keep_every: 100,
            integrator: Integrator::Rk2,
            step_tol: 1e-7,
            dt_max: 0.05,
        }
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k", "curvature index must be >= 1"));
        }
        if !(self.theta > 0.0 && self.theta <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::config(
                "theta",
                format!("contact angle {} outside (0, π/2]", self.theta),
            ));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety < 1.0) {
            return Err(Error::config("dt_safety", "must lie in (0, 1)"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::config("t_max", "must be positive and finite"));
        }
        if !(self.speed_tol > 0.0) {
            return Err(Error::config("speed_tol", "must be positive"));
        }
        if !(self.f_stddev_tol > 0.0) {
            return Err(Error::config("f_stddev_tol", "must be positive"));
        }
        if !(self.dt_floor > 0.0) {
            return Err(Error::config("dt_floor", "must be positive"));
        }
        if !(self.step_tol > 0.0) {
            return Err(Error::config("step_tol", "must be positive"));
        }
        if !(self.dt_max > self.dt_floor && self.dt_max.is_finite()) {
            return Err(Error::config("dt_max", "must be finite and above dt_floor"));
        }
        Ok(())
    }

    fn check_grid(&self, grid: &HalfSphereGrid) -> Result<()> {
        self.validate()?;
        if self.k > grid.n() {
            return Err(Error::config("k", format!("k = {} exceeds n = {}", self.k, grid.n())));
        }
        if self.theta != grid.theta() {
            return Err(Error::config("theta", "flow and grid contact angles differ"));
        }
        if self.integrator == Integrator::Rosenbrock && grid.mode() != GridMode::Axisymmetric {
            return Err(Error::config("integrator", "rosenbrock needs an axisymmetric grid"));
        }
        Ok(())
    }
}

/// Ghost layer beyond the wall and the discrete boundary residual.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostedField {
    /// One ghost per wall node, in azimuth order.
    pub ghosts: Vec<f64>,
    /// `max |∂_β φ − cos θ √(1 + |∇̄φ|²)|` over wall nodes, centered
    /// differences through the ghosts.
    pub residual: f64,
}

/// Sets the ghost layer so that the oblique boundary condition holds for the
/// centered `β`-difference. The slope solves `s = cos θ √(1 + s² + φ_α²)`,
/// whose unique positive root `cot θ √(1 + φ_α²)` is used directly.
pub fn apply_boundary(grid: &HalfSphereGrid, field: &RadialField) -> Result<GhostedField> {
    field.check(grid)?;
    let ghosts = wall_ghosts(grid, &field.phi);
    let c = grid.cos_theta();
    let mut residual: f64 = 0.0;
    for idx in grid.boundary_nodes() {
        let jt = jet(grid, &field.phi, &ghosts, idx);
        let r = jt.grad[0] - c * (1.0 + jt.grad_sq()).sqrt();
        if !r.is_finite() {
            return Err(Error::Boundary(format!("non-finite boundary slope at node {idx}")));
        }
        residual = residual.max(r.abs());
    }
    Ok(GhostedField { ghosts: ghosts.to_vec(), residual })
}

/// Both forms of the speed at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsEval {
    /// `∂_t φ = (v/ρ) f̂`.
    pub dphi_dt: Vec<f64>,
    /// `f = 1 + cos θ ⟨ν,e⟩ − ⟨x,ν⟩ F` from assembled position and normal
    /// vectors.
    pub normal_speed: Vec<f64>,
    /// `max |e^φ/v · ∂_t φ − f|`.
    pub gauge: f64,
}

/// Evaluates the flow speed. Outside `Γ_k` the configured cone policy
/// applies.
pub fn rhs(grid: &HalfSphereGrid, field: &RadialField, config: &FlowConfig) -> Result<RhsEval> {
    field.check(grid)?;
    config.check_grid(grid)?;
    let mut kernel = Kernel::new(grid, config.k, config.cone_policy)?;
    let mut dphi_dt = vec![0.0; grid.node_count()];
    kernel.eval(&field.phi, &mut dphi_dt, true)?;
    let normal_speed = kernel.nodes.iter().map(|e| e.speed_vec).collect();
    let gauge = kernel.nodes.iter().map(|e| e.gauge).fold(0.0, f64::max);
    Ok(RhsEval { dphi_dt, normal_speed, gauge })
}

/// The evolving field with its step counter and monitors.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub field: RadialField,
    pub step_count: u64,
    pub monitors: MonitorLog,
    /// Set once a clamp-report run has shifted any node into the cone.
    pub tainted: bool,
    pub clamped_nodes: u64,
}

impl FlowState {
    pub fn new(field: RadialField, keep_every: u64) -> Self {
        Self { field, step_count: 0, monitors: MonitorLog::new(keep_every), tainted: false, clamped_nodes: 0 }
    }
}

/// Outcome of one stage-1 evaluation plus step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Monitors of the state before the step.
    pub row: MonitorRow,
    /// Step taken (zero when the state had converged or reached `t_max`).
    pub dt: f64,
    pub converged: bool,
}

/// Reusable integrator: kernel, buffers and configuration.
#[derive(Debug, Clone)]
pub struct Flow {
    kernel: Kernel,
    config: FlowConfig,
    k1: Vec<f64>,
    /// Increment of the accepted step, `φ ← φ + dt · inc`.
    inc: Vec<f64>,
    mid: Vec<f64>,
    implicit: Option<RosenbrockScratch>,
}

#[derive(Debug, Clone)]
struct RosenbrockScratch {
    jac: Banded,
    lu: Banded,
    ka: Vec<f64>,
    kb: Vec<f64>,
    tmp: Vec<f64>,
    dt_next: Option<f64>,
}

/// `γ = 1 + 1/√2` makes ROS2 L-stable with a positive stability function.
const ROS2_GAMMA: f64 = 1.0 + std::f64::consts::FRAC_1_SQRT_2;

impl Flow {
    pub fn new(grid: &HalfSphereGrid, config: FlowConfig) -> Result<Self> {
        config.check_grid(grid)?;
        let m = grid.node_count();
        let implicit = (config.integrator == Integrator::Rosenbrock).then(|| RosenbrockScratch {
            jac: Banded::zeros(m, 1),
            lu: Banded::zeros(m, 1),
            ka: vec![0.0; m],
            kb: vec![0.0; m],
            tmp: vec![0.0; m],
            dt_next: None,
        });
        Ok(Self {
            kernel: Kernel::new(grid, config.k, config.cone_policy)?,
            config,
            k1: vec![0.0; m],
            inc: vec![0.0; m],
            mid: vec![0.0; m],
            implicit,
        })
    }

    pub fn grid(&self) -> &HalfSphereGrid {
        &self.kernel.grid
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    /// Evaluates and logs monitors at the current state, then (unless the
    /// state has converged or reached `t_max`) advances it by one step.
    ///
    /// With [`Integrator::Rk2`] the step is midpoint RK2 with
    /// `dt = dt_safety / max_j(D_j Λ_j)`, where `D_j = ⟨x,ν⟩ Σ F^{ii} / ρ²`
    /// and `Λ_j` is the inverse squared mesh width of row `j`. With
    /// [`Integrator::Rosenbrock`] the step size comes from the local error
    /// estimate instead.
    ///
    /// On error the state is left as it was before the call.
    pub fn step(&mut self, state: &mut FlowState) -> Result<StepInfo> {
        let t = state.field.time;
        let stats = self.kernel.eval(&state.field.phi, &mut self.k1, true)?;
        let boundary = trace_of(&self.kernel.grid, &state.field.phi);
        let mut row =
            monitor::reduce(&self.kernel.grid, &self.kernel.nodes, &boundary, self.config.k, state.step_count, t, 0.0);
        let converged = row.speed_inf < self.config.speed_tol && row.f_stddev < self.config.f_stddev_tol;
        let remaining = self.config.t_max - t;
        let mut clamped = stats.clamped as u64;
        let mut dt = 0.0;
        if !converged && remaining > 0.0 {
            let (taken, c) = match self.config.integrator {
                Integrator::Rk2 => self.midpoint(&state.field.phi, stats.dt_limit, remaining)?,
                Integrator::Rosenbrock => self.rosenbrock(&state.field.phi, stats.dt_limit, remaining)?,
            };
            dt = taken;
            clamped += c;
        }
        row.dt = dt;
        state.monitors.push(row)?;
        if dt > 0.0 {
            for (p, d) in state.field.phi.iter_mut().zip(&self.inc) {
                *p += dt * d;
            }
            // Land exactly on t_max when the step was truncated.
            state.field.time = if dt == remaining { self.config.t_max } else { t + dt };
            state.step_count += 1;
        }
        if clamped > 0 {
            state.tainted = true;
            state.clamped_nodes += clamped;
        }
        Ok(StepInfo { row, dt, converged })
    }

    fn midpoint(&mut self, phi: &[f64], dt_limit: f64, remaining: f64) -> Result<(f64, u64)> {
        let dt = (self.config.dt_safety * dt_limit).min(remaining);
        if dt < self.config.dt_floor && dt < remaining {
            return Err(Error::Stiffness { dt, floor: self.config.dt_floor });
        }
        for i in 0..phi.len() {
            self.mid[i] = phi[i] + 0.5 * dt * self.k1[i];
        }
        let s2 = self.kernel.eval(&self.mid, &mut self.inc, false)?;
        Ok((dt, s2.clamped as u64))
    }

    /// One accepted ROS2 step:
    ///
    /// ```text
    /// (I − γ dt J) k_a = R(φ)
    /// (I − γ dt J) k_b = R(φ + dt k_a) − 2 k_a
    /// φ ← φ + dt (3/2 k_a + 1/2 k_b)
    /// ```
    ///
    /// The difference to the embedded first-order solution `φ + dt k_a`
    /// drives the step size. A stage that leaves the cone rejects the step.
    fn rosenbrock(&mut self, phi: &[f64], dt_limit: f64, remaining: f64) -> Result<(f64, u64)> {
        let ros = self.implicit.as_mut().expect("rosenbrock scratch allocated with the integrator");
        banded_jacobian(&mut self.kernel, phi, &mut ros.jac, &mut self.mid, &mut ros.ka, &mut ros.kb)?;
        let cfg = &self.config;
        let first = (100.0 * cfg.dt_safety * dt_limit).min(cfg.dt_max);
        let mut dt = ros.dt_next.unwrap_or(first).min(cfg.dt_max).min(remaining);
        loop {
            if dt < cfg.dt_floor && dt < remaining {
                return Err(Error::Stiffness { dt, floor: cfg.dt_floor });
            }
            ros.jac.shifted_identity_into(ROS2_GAMMA * dt, &mut ros.lu);
            if !ros.lu.factor() {
                dt *= 0.5;
                continue;
            }
            ros.ka.copy_from_slice(&self.k1);
            ros.lu.solve(&mut ros.ka);
            for i in 0..phi.len() {
                self.mid[i] = phi[i] + dt * ros.ka[i];
            }
            let s2 = match self.kernel.eval(&self.mid, &mut ros.tmp, false) {
                Ok(s) => s,
                Err(Error::ConeViolation { .. }) => {
                    dt *= 0.25;
                    continue;
                }
                Err(e) => return Err(e),
            };
            for i in 0..phi.len() {
                ros.kb[i] = ros.tmp[i] - 2.0 * ros.ka[i];
            }
            ros.lu.solve(&mut ros.kb);
            let err = ros
                .ka
                .iter()
                .zip(&ros.kb)
                .map(|(a, b)| (0.5 * dt * (a + b)).abs())
                .fold(0.0, f64::max)
                / cfg.step_tol;
            if err <= 1.0 {
                for i in 0..phi.len() {
                    self.inc[i] = 1.5 * ros.ka[i] + 0.5 * ros.kb[i];
                }
                let grow = if err > 0.0 { (0.9 / err.sqrt()).clamp(0.2, 3.0) } else { 3.0 };
                // A step cut short by t_max says nothing about the next size.
                if dt < remaining || ros.dt_next.is_none() {
                    ros.dt_next = Some(dt * grow);
                }
                return Ok((dt, s2.clamped as u64));
            }
            // NaN errors land here too.
            dt *= if err.is_finite() { (0.9 / err.sqrt()).clamp(0.1, 0.5) } else { 0.1 };
        }
    }
}

/// Central-difference Jacobian of the kernel with `2b + 1` colored pairs of
/// evaluations for bandwidth `b`.
///
/// Curvatures respond to a nodal perturbation `δ` like `δ / h²`, so a one-sided
/// difference carries an `O(δ / h⁴)` bias that shifts the whole spectrum to
/// the right. The step `ε^{1/3} h^{4/3}` balances the central truncation
/// error against rounding in the `1 / h²` curvature terms.
fn banded_jacobian(
    kernel: &mut Kernel,
    phi: &[f64],
    jac: &mut Banded,
    pert: &mut [f64],
    plus: &mut [f64],
    minus: &mut [f64],
) -> Result<()> {
    let m = phi.len();
    let b = jac.bandwidth();
    let colors = 2 * b + 1;
    let base = f64::EPSILON.cbrt() * kernel.grid.spacing().powf(4.0 / 3.0);
    for color in 0..colors {
        for sign in [1.0, -1.0] {
            pert.copy_from_slice(phi);
            for j in (color..m).step_by(colors) {
                pert[j] += sign * base * phi[j].abs().max(1.0);
            }
            kernel.eval(pert, if sign > 0.0 { &mut *plus } else { &mut *minus }, false)?;
        }
        for j in (color..m).step_by(colors) {
            let e = 2.0 * base * phi[j].abs().max(1.0);
            for i in j.saturating_sub(b)..(j + b + 1).min(m) {
                jac.set(i, j, (plus[i] - minus[i]) / e);
            }
        }
    }
    Ok(())
}

/// One step with a freshly built integrator.
pub fn step(state: &FlowState, grid: &HalfSphereGrid, config: &FlowConfig) -> Result<FlowState> {
    let mut flow = Flow::new(grid, config.clone())?;
    let mut next = state.clone();
    flow.step(&mut next)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Converged,
    Timeout,
    ConeAbort,
}

impl RunStatus {
    /// Process exit code: 0 converged, 2 timeout, 3 cone abort.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Converged => 0,
            RunStatus::Timeout => 2,
            RunStatus::ConeAbort => 3,
        }
    }
}

/// Trajectory summary of [`run`].
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub status: RunStatus,
    /// Last good state.
    pub state: FlowState,
    /// Cap radius matching the final volume.
    pub r0: f64,
    /// `‖φ_final − φ_{C_{θ,r_0}}‖_∞`.
    pub cap_residual: f64,
    /// Exponential decay rate of `‖f‖_∞` fitted over the second half of
    /// the run; descriptive only.
    pub decay_rate: Option<f64>,
    /// Message of the error that stopped a cone abort.
    pub abort: Option<String>,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn stats(&self) -> &MonitorStats {
        self.state.monitors.stats().expect("a run logs at least one row")
    }

    pub fn final_row(&self) -> &MonitorRow {
        self.state.monitors.last().expect("a run logs at least one row")
    }
}

/// Steps until converged or `t ≥ t_max`. Timeout and cone aborts are
/// reported in the summary; only invalid input is an error.
pub fn run(initial: RadialField, grid: &HalfSphereGrid, config: &FlowConfig) -> Result<RunSummary> {
    run_with_log(initial, grid, config, MonitorLog::new(config.keep_every))
}

/// [`run`] with a caller-supplied monitor log (for example one streaming to
/// CSV).
pub fn run_with_log(
    initial: RadialField,
    grid: &HalfSphereGrid,
    config: &FlowConfig,
    log: MonitorLog,
) -> Result<RunSummary> {
    run_observed(initial, grid, config, log, |_| Ok(()))
}

/// [`run_with_log`] calling `observe` on the state before the first step
/// and after every accepted step.
pub fn run_observed(
    initial: RadialField,
    grid: &HalfSphereGrid,
    config: &FlowConfig,
    log: MonitorLog,
    mut observe: impl FnMut(&FlowState) -> Result<()>,
) -> Result<RunSummary> {
    initial.check(grid)?;
    let start = std::time::Instant::now();
    let mut flow = Flow::new(grid, config.clone())?;
    let mut state = FlowState::new(initial, config.keep_every);
    state.monitors = log;
    observe(&state)?;
    let (status, abort) = loop {
        match flow.step(&mut state) {
            Ok(info) if info.converged => break (RunStatus::Converged, None),
            Ok(info) if info.dt == 0.0 => break (RunStatus::Timeout, None),
            Ok(_) => observe(&state)?,
            Err(e @ Error::ConeViolation { .. }) => break (RunStatus::ConeAbort, Some(e.to_string())),
            Err(e) => return Err(e),
        }
    };
    state.monitors.finish()?;
    if state.monitors.last().is_none() {
        return Err(Error::Geometry(abort.unwrap_or_else(|| "initial data outside the cone".into())));
    }
    let (r0, cap_residual) = fit_cap(grid, &state);
    let decay_rate = decay_rate(&state.monitors.rows);
    Ok(RunSummary {
        status,
        state,
        r0,
        cap_residual,
        decay_rate,
        abort,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Radius of the cap with the same volume, and the sup-distance in `φ`.
///
/// The unit-cap volume comes from the same quadrature as the monitored
/// volume, so the quadrature error cancels in the ratio.
pub fn fit_cap(grid: &HalfSphereGrid, state: &FlowState) -> (f64, f64) {
    let n = grid.n();
    let v = state.monitors.last().map_or(f64::NAN, |r| r.v0);
    let unit = discrete_unit_cap_volume(grid).unwrap_or(f64::NAN);
    let r0 = (v / unit).powf(1.0 / (n + 1) as f64);
    let residual = (0..grid.node_count())
        .map(|i| {
            let (j, _) = grid.row_col(i);
            (state.field.phi[i] - (r0 * unit_cap_rho(grid.theta(), grid.beta(j))).ln()).abs()
        })
        .fold(0.0, f64::max);
    (r0, residual)
}

fn discrete_unit_cap_volume(grid: &HalfSphereGrid) -> Result<f64> {
    let field = cap_field(&CapSpec::new(grid.theta(), 1.0)?, grid)?;
    let mut kernel = Kernel::new(grid, 1, ConePolicy::Abort)?;
    let mut out = vec![0.0; grid.node_count()];
    kernel.eval(&field.phi, &mut out, true)?;
    let nodes = &kernel.nodes;
    Ok(pairwise_sum_by(nodes.len(), |i| nodes[i].u * nodes[i].area_weight) / (grid.n() + 1) as f64)
}

/// Least-squares slope of `−log ‖f‖_∞` against time over the second half of
/// the recorded rows.
fn decay_rate(rows: &[MonitorRow]) -> Option<f64> {
    let t_end = rows.last()?.time;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.time >= 0.5 * t_end && r.speed_inf > 0.0)
        .map(|r| (r.time, r.speed_inf.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mt, my) = (st / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mt) * (p.1 - my), b + (p.0 - mt).powi(2)));
    (den > 0.0).then(|| -num / den)
}
