//! Runtime monitors for the a priori estimates and monotonicity claims.
//!
//! Every accepted step produces a [`MonitorRow`] from the stage-1
//! evaluation. The [`MonitorLog`] keeps a decimated copy in memory, can
//! stream every row to a CSV sink, and folds each row into running
//! violation statistics ([`MonitorStats`]) so that nothing is lost to
//! decimation.

use std::io::Write;

use serde::Serialize;

use super::kernel::NodeEval;
use crate::capgeom::{cos_angle, unit_cap_rho, BoundaryTrace, HalfSphereGrid};
use crate::error::Result;
use crate::functionals::isoperimetric_from;
use crate::quad::pairwise_sum_by;

/// CSV schema tag written as the first line of `monitors.csv`.
pub const MONITORS_SCHEMA: &str = "# capflow-monitors v1";

/// Monitor values at one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorRow {
    pub step: u64,
    pub time: f64,
    pub dt: f64,
    pub min_u_bar: f64,
    pub max_f: f64,
    pub min_f: f64,
    /// `min (F ū)`.
    pub min_f_u_bar: f64,
    /// `max H̄`, `H̄ = Σ 1/κ_i`.
    pub max_harmonic: f64,
    pub min_kappa: f64,
    pub v0: f64,
    /// `V_{k−1,θ}`.
    pub v_km1: f64,
    /// `I_{k,θ}`; NaN for `k = 1`.
    pub iso: f64,
    /// `‖f‖_∞`.
    pub speed_inf: f64,
    /// Standard deviation of `F` over nodes.
    pub f_stddev: f64,
    /// Relative Minkowski residual at the flow index `k`.
    pub minkowski: f64,
    /// `max |e^φ/v · rhs − f|`.
    pub gauge: f64,
    /// `min` and `max` of `ρ / ρ_{C_{θ,1}}`.
    pub cap_radius_min: f64,
    pub cap_radius_max: f64,
    /// Pointwise bound on `H̄` at an interior maximum, maximized over nodes.
    pub harmonic_bound: f64,
}

impl MonitorRow {
    pub fn csv_header() -> &'static str {
        "step,time,dt,min_u_bar,max_F,min_F,min_F_u_bar,max_Hbar,min_kappa,V0,V_km1,I_k,\
         speed_inf,F_stddev,minkowski,gauge,cap_radius_min,cap_radius_max,Hbar_bound"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.step,
            self.time,
            self.dt,
            self.min_u_bar,
            self.max_f,
            self.min_f,
            self.min_f_u_bar,
            self.max_harmonic,
            self.min_kappa,
            self.v0,
            self.v_km1,
            self.iso,
            self.speed_inf,
            self.f_stddev,
            self.minkowski,
            self.gauge,
            self.cap_radius_min,
            self.cap_radius_max,
            self.harmonic_bound,
        )
    }
}

/// Reduces stage-1 node data to one monitor row.
pub(crate) fn reduce(
    grid: &HalfSphereGrid,
    nodes: &[NodeEval],
    boundary: &BoundaryTrace,
    k: usize,
    step: u64,
    time: f64,
    dt: f64,
) -> MonitorRow {
    let n = grid.n();
    let c = cos_angle(grid.theta());
    let s = grid.theta().sin();
    let len = nodes.len();
    let mut row = MonitorRow {
        step,
        time,
        dt,
        min_u_bar: f64::INFINITY,
        max_f: f64::NEG_INFINITY,
        min_f: f64::INFINITY,
        min_f_u_bar: f64::INFINITY,
        max_harmonic: f64::NEG_INFINITY,
        min_kappa: f64::INFINITY,
        v0: 0.0,
        v_km1: 0.0,
        iso: f64::NAN,
        speed_inf: 0.0,
        f_stddev: 0.0,
        minkowski: 0.0,
        gauge: 0.0,
        cap_radius_min: f64::INFINITY,
        cap_radius_max: f64::NEG_INFINITY,
        harmonic_bound: f64::NEG_INFINITY,
    };
    for (idx, e) in nodes.iter().enumerate() {
        row.min_u_bar = row.min_u_bar.min(e.u_bar);
        row.max_f = row.max_f.max(e.f_curv);
        row.min_f = row.min_f.min(e.f_curv);
        row.min_f_u_bar = row.min_f_u_bar.min(e.f_curv * e.u_bar);
        row.max_harmonic = row.max_harmonic.max(e.harmonic);
        row.min_kappa = row.min_kappa.min(e.kappa_min);
        row.speed_inf = row.speed_inf.max(e.speed.abs());
        row.gauge = row.gauge.max(e.gauge);
        let (j, _) = grid.row_col(idx);
        let ratio = e.rho / unit_cap_rho(grid.theta(), grid.beta(j));
        row.cap_radius_min = row.cap_radius_min.min(ratio);
        row.cap_radius_max = row.cap_radius_max.max(ratio);
        let fu = e.f_curv;
        let bound = (fu * e.tangential_sq / (2.0 * e.u) + n as f64 * e.u * fu + n as f64)
            / (e.u * fu * fu + fu);
        row.harmonic_bound = row.harmonic_bound.max(bound);
    }
    let mean_f = pairwise_sum_by(len, |i| nodes[i].f_curv) / len as f64;
    row.f_stddev =
        (pairwise_sum_by(len, |i| (nodes[i].f_curv - mean_f).powi(2)) / len as f64).sqrt();
    let n1 = (n + 1) as f64;
    row.v0 = pairwise_sum_by(len, |i| nodes[i].u * nodes[i].area_weight) / n1;
    row.v_km1 = match k {
        1 => row.v0,
        2 => (pairwise_sum_by(len, |i| nodes[i].area_weight) - c * boundary.wetted) / n1,
        _ => {
            let bulk = pairwise_sum_by(len, |i| nodes[i].hk[0] * nodes[i].area_weight);
            let edge = boundary.curvature_integrals[k - 3];
            (bulk - c * s.powi(k as i32 - 2) / n as f64 * edge) / n1
        }
    };
    if k >= 2 {
        row.iso = isoperimetric_from(row.v0, row.v_km1, k, n);
    }
    let a = pairwise_sum_by(len, |i| nodes[i].hk[1] * (1.0 + c * nodes[i].nu_dot_e) * nodes[i].area_weight);
    let b = pairwise_sum_by(len, |i| nodes[i].hk[2] * nodes[i].u * nodes[i].area_weight);
    row.minkowski = (a - b) / (0.5 * (a.abs() + b.abs()));
    row
}

/// Running violation statistics over every accepted step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorStats {
    pub steps: u64,
    /// Largest single-step increase of `max F`.
    pub max_f_increase: f64,
    /// Largest single-step decrease of `min ū`.
    pub min_u_bar_decrease: f64,
    /// Largest single-step increase of `I_{k,θ}` (`k ≥ 2`).
    pub iso_increase: f64,
    /// Largest single-step decrease of `V_{0,θ}`.
    pub v0_decrease: f64,
    /// Largest single-step increase of `V_{k−1,θ}` (`k ≥ 2`).
    pub v_km1_increase: f64,
    /// `max_t |V_0(t) − V_0(0)| / V_0(0)`.
    pub volume_drift: f64,
    /// `max_t (max H̄(t) / R(t))` with `R` the running bound.
    pub harmonic_ratio: f64,
    /// `min_t (min κ(t) · R(t))`; at least 1 when `H̄ ≤ R`.
    pub kappa_ratio: f64,
    /// Largest excursion of `ρ/ρ_{C_{θ,1}}` outside `[r_1, r_2]`.
    pub barrier_excursion: f64,
    pub barrier_r1: f64,
    pub barrier_r2: f64,
    /// `min_t min(Fū) / min(1, min(Fū)(0))`.
    pub f_u_bar_ratio: f64,
    pub gauge_max: f64,
    /// Largest Minkowski residual seen.
    pub minkowski_max: f64,
    /// Running bound `R(t)`.
    pub harmonic_running_bound: f64,
}

/// Monitor rows and statistics of one run.
#[derive(Default)]
pub struct MonitorLog {
    pub rows: Vec<MonitorRow>,
    keep_every: u64,
    first: Option<MonitorRow>,
    last: Option<MonitorRow>,
    stats: Option<MonitorStats>,
    sink: Option<Box<dyn Write + Send>>,
}

impl std::fmt::Debug for MonitorLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonitorLog")
            .field("rows", &self.rows.len())
            .field("keep_every", &self.keep_every)
            .field("last", &self.last)
            .field("stats", &self.stats)
            .field("streaming", &self.sink.is_some())
            .finish()
    }
}

impl Clone for MonitorLog {
    /// Clones rows and statistics; the CSV sink stays with the original.
    fn clone(&self) -> Self {
        Self {
            rows: self.rows.clone(),
            keep_every: self.keep_every,
            first: self.first,
            last: self.last,
            stats: self.stats.clone(),
            sink: None,
        }
    }
}

impl MonitorLog {
    /// Keeps every `keep_every`-th row in memory (and always the first and
    /// last).
    pub fn new(keep_every: u64) -> Self {
        Self { keep_every: keep_every.max(1), ..Self::default() }
    }

    /// Streams every row, header first, to `sink`.
    pub fn with_sink(mut self, mut sink: Box<dyn Write + Send>) -> Result<Self> {
        writeln!(sink, "{MONITORS_SCHEMA}")?;
        writeln!(sink, "{}", MonitorRow::csv_header())?;
        self.sink = Some(sink);
        Ok(self)
    }

    pub fn first(&self) -> Option<&MonitorRow> {
        self.first.as_ref()
    }

    pub fn last(&self) -> Option<&MonitorRow> {
        self.last.as_ref()
    }

    pub fn stats(&self) -> Option<&MonitorStats> {
        self.stats.as_ref()
    }

    pub fn push(&mut self, row: MonitorRow) -> Result<()> {
        if let Some(last) = self.last {
            debug_assert!(row.time >= last.time);
        }
        if let Some(sink) = self.sink.as_mut() {
            writeln!(sink, "{}", row.csv_row())?;
        }
        match (&self.first, self.last, self.stats.as_mut()) {
            (Some(first), Some(prev), Some(st)) => fold(st, first, &prev, &row),
            _ => {
                self.first = Some(row);
                self.stats = Some(initial_stats(&row));
            }
        }
        if row.step % self.keep_every == 0 {
            self.rows.push(row);
        }
        self.last = Some(row);
        Ok(())
    }

    /// Ensures the most recent row is retained and flushes the sink.
    pub fn finish(&mut self) -> Result<()> {
        if let Some(last) = self.last {
            if self.rows.last().map_or(true, |r| r.step != last.step) {
                self.rows.push(last);
            }
        }
        if let Some(sink) = self.sink.as_mut() {
            sink.flush()?;
        }
        Ok(())
    }
}

fn initial_stats(row: &MonitorRow) -> MonitorStats {
    let bound = row.max_harmonic.max(row.harmonic_bound);
    MonitorStats {
        steps: 0,
        max_f_increase: 0.0,
        min_u_bar_decrease: 0.0,
        iso_increase: 0.0,
        v0_decrease: 0.0,
        v_km1_increase: 0.0,
        volume_drift: 0.0,
        harmonic_ratio: row.max_harmonic / bound,
        kappa_ratio: row.min_kappa * bound,
        barrier_excursion: 0.0,
        barrier_r1: row.cap_radius_min,
        barrier_r2: row.cap_radius_max,
        f_u_bar_ratio: 1.0,
        gauge_max: row.gauge,
        minkowski_max: row.minkowski.abs(),
        harmonic_running_bound: bound,
    }
}

fn fold(st: &mut MonitorStats, first: &MonitorRow, prev: &MonitorRow, row: &MonitorRow) {
    st.steps += 1;
    st.max_f_increase = st.max_f_increase.max(row.max_f - prev.max_f);
    st.min_u_bar_decrease = st.min_u_bar_decrease.max(prev.min_u_bar - row.min_u_bar);
    if row.iso.is_finite() && prev.iso.is_finite() {
        st.iso_increase = st.iso_increase.max(row.iso - prev.iso);
        st.v_km1_increase = st.v_km1_increase.max(row.v_km1 - prev.v_km1);
    }
    st.v0_decrease = st.v0_decrease.max(prev.v0 - row.v0);
    st.volume_drift = st.volume_drift.max((row.v0 - first.v0).abs() / first.v0);
    st.harmonic_running_bound = st.harmonic_running_bound.max(row.harmonic_bound);
    let bound = st.harmonic_running_bound;
    st.harmonic_ratio = st.harmonic_ratio.max(row.max_harmonic / bound);
    st.kappa_ratio = st.kappa_ratio.min(row.min_kappa * bound);
    st.barrier_excursion = st
        .barrier_excursion
        .max(st.barrier_r1 - row.cap_radius_min)
        .max(row.cap_radius_max - st.barrier_r2);
    st.f_u_bar_ratio = st.f_u_bar_ratio.min(row.min_f_u_bar / first.min_f_u_bar.min(1.0));
    st.gauge_max = st.gauge_max.max(row.gauge);
    st.minkowski_max = st.minkowski_max.max(row.minkowski.abs());
}
