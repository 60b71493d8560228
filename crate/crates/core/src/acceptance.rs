//! The acceptance matrix: eight criteria at pinned resolutions and
//! tolerances, each reported as one pass/fail row.
//!
//! Oracles used here are deliberately independent of the library paths they
//! check: σ_k against a brute-force subset sum, `F^{ii}` against central
//! differences, `b_θ` against its closed form, caps against
//! [`unit_cap_rho`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capgeom::{
    b_theta_by_quadrature, cap_field, sample_geometry, static_residual, CapSpec, HalfSphereGrid, RadialField,
};
use crate::error::Result;
use crate::flow::{rhs, run_observed, ConePolicy, FlowConfig, Integrator, MonitorLog, RunStatus, RunSummary};
use crate::functionals::{minkowski_residual, report};
use crate::presets::Preset;
use crate::symm::{f_and_derivatives, lemma_checks, normalized_hk, sigma_k, CurvatureVector};

/// Resolution and scope of a suite run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceOptions {
    /// Interior polar nodes of the finest grid.
    pub m_beta: usize,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self { m_beta: 400 }
    }
}

impl AcceptanceOptions {
    /// The same matrix with the polar spacing doubled.
    pub fn degraded(self) -> Self {
        Self { m_beta: (self.m_beta + 1) / 2 - 1 }
    }
}

/// One row of the acceptance table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured values against their thresholds.
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    /// `PASS  3 monotonicity  (…)`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<22} {:>6.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

/// CSV rendering of the table.
pub fn table_csv(rows: &[CriterionResult]) -> String {
    let mut out = String::from("id,name,passed,seconds,detail\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{:.3},\"{}\"\n", r.id, r.name, r.passed, r.seconds, r.detail.replace('"', "'")));
    }
    out
}

/// JSON rendering of the table.
pub fn table_json(rows: &[CriterionResult]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

/// Runs all eight criteria.
pub fn acceptance_suite(opts: AcceptanceOptions) -> Vec<CriterionResult> {
    let mut rows = vec![static_caps(opts)];
    let t = Instant::now();
    let runs = convergence_runs(opts);
    let shared = t.elapsed().as_secs_f64();
    rows.push(convergence(&runs, shared));
    rows.push(monotonicity(&runs));
    rows.push(maximum_principles(&runs));
    rows.push(minkowski(opts));
    rows.push(alexandrov_fenchel(opts));
    rows.push(symmetric_functions(&|x, k| sigma_k(&CurvatureVector::new(x).unwrap(), k).unwrap()));
    rows.push(gauge(opts, &runs));
    rows
}

fn timed(id: u8, name: &'static str, body: impl FnOnce() -> (bool, String)) -> CriterionResult {
    let t = Instant::now();
    let (passed, detail) = body();
    CriterionResult { id, name, passed, detail, seconds: t.elapsed().as_secs_f64() }
}

fn failed(e: impl std::fmt::Display) -> (bool, String) {
    (false, format!("error: {e}"))
}

/// Grid sizes whose spacing is roughly `h, 2h, 4h` for the finest `m`.
fn levels(m: usize) -> [usize; 3] {
    let cells = m + 1;
    [cells.div_ceil(4) - 1, cells.div_ceil(2) - 1, m]
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(hs: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = hs.iter().zip(errs).map(|(h, e)| (h.ln(), e.ln())).collect();
    let m = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / m, a.1 + p.1 / m));
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn max_static_residual(grid: &HalfSphereGrid, field: &RadialField, k: usize) -> Result<f64> {
    let s = sample_geometry(grid, field, k)?;
    s.nodes.iter().try_fold(0.0f64, |m, node| Ok(m.max(static_residual(node, grid.theta())?.abs())))
}

fn pinned_flow(k: usize, theta: f64) -> FlowConfig {
    let mut c = FlowConfig::new(k, theta).with_integrator(Integrator::Rosenbrock);
    c.t_max = 60.0;
    c.keep_every = 1_000_000;
    c
}

/// Criterion 1: caps stay put and their static residual is second order.
pub fn static_caps(opts: AcceptanceOptions) -> CriterionResult {
    timed(1, "static caps", || {
        let run = || -> Result<(bool, String)> {
            let (mut drift, mut resid, mut ok) = (0.0f64, 0.0f64, true);
            for theta in [FRAC_PI_6, FRAC_PI_3, FRAC_PI_2] {
                let grid = HalfSphereGrid::axisymmetric(2, opts.m_beta, theta)?;
                for r in [0.7, 1.0, 1.6] {
                    let cap = cap_field(&CapSpec::new(theta, r)?, &grid)?;
                    for k in [1, 2] {
                        let (d, s, summary) = hold_cap(&grid, &cap, k)?;
                        ok &= summary.state.field.time == 1.0;
                        drift = drift.max(d);
                        resid = resid.max(s);
                    }
                }
            }
            let mut orders = Vec::new();
            for theta in [FRAC_PI_6, FRAC_PI_3] {
                for k in [1, 2] {
                    let (mut hs, mut es) = (Vec::new(), Vec::new());
                    for m in levels(opts.m_beta) {
                        let grid = HalfSphereGrid::axisymmetric(2, m, theta)?;
                        let cap = cap_field(&CapSpec::new(theta, 1.0)?, &grid)?;
                        let (_, s, _) = hold_cap(&grid, &cap, k)?;
                        hs.push(grid.spacing());
                        es.push(s);
                    }
                    orders.push(fitted_order(&hs, &es));
                }
            }
            let order_ok = orders.iter().all(|p| (p - 2.0).abs() <= 0.3);
            let pass = ok && drift < 1e-5 && resid < 5e-5 && order_ok;
            let orders: Vec<String> = orders.iter().map(|p| format!("{p:.2}")).collect();
            Ok((
                pass,
                format!(
                    "max|φ−φ_cap| {drift:.1e} (<1e-5), static residual {resid:.1e} (<5e-5), orders [{}] (2±0.3; θ=π/2 residual is at rounding)",
                    orders.join(", ")
                ),
            ))
        };
        run().unwrap_or_else(failed)
    })
}

/// Flows the cap to `t = 1` with convergence disabled; returns the largest
/// drift from the cap and the largest static residual seen.
fn hold_cap(grid: &HalfSphereGrid, cap: &RadialField, k: usize) -> Result<(f64, f64, RunSummary)> {
    let mut cfg = pinned_flow(k, grid.theta());
    cfg.t_max = 1.0;
    cfg.speed_tol = f64::MIN_POSITIVE;
    cfg.f_stddev_tol = f64::MIN_POSITIVE;
    let (mut drift, mut resid) = (0.0f64, 0.0f64);
    let summary = run_observed(cap.clone(), grid, &cfg, MonitorLog::new(cfg.keep_every), |s| {
        drift = drift.max(s.field.max_abs_diff(cap));
        resid = resid.max(max_static_residual(grid, &s.field, k)?);
        Ok(())
    })?;
    Ok((drift, resid, summary))
}

/// A perturbed-cap run shared by criteria 2–4 and 8.
#[derive(Debug, Clone)]
pub struct ConvergenceRun {
    pub k: usize,
    pub theta: f64,
    pub amplitude: f64,
    pub summary: std::result::Result<RunSummary, String>,
}

fn theta_label(theta: f64) -> String {
    let d = PI / theta;
    if (d - d.round()).abs() < 1e-12 {
        format!("π/{}", d.round())
    } else {
        format!("{theta:.4}")
    }
}

impl ConvergenceRun {
    fn label(&self) -> String {
        format!("k={} θ={} a={}", self.k, theta_label(self.theta), self.amplitude)
    }
}

/// Perturbed caps, `k ∈ {1, 2}`, `θ ∈ {π/4, π/2}`, amplitudes 0.05–0.15.
pub fn convergence_runs(opts: AcceptanceOptions) -> Vec<ConvergenceRun> {
    let mut runs = Vec::new();
    for k in [1, 2] {
        for theta in [FRAC_PI_4, FRAC_PI_2] {
            for amplitude in [0.05, 0.1, 0.15] {
                let summary = (|| {
                    let grid = HalfSphereGrid::axisymmetric(2, opts.m_beta, theta)?;
                    let p = Preset::PerturbedCap { r: 1.0, amplitude, legendre: 0, azimuthal: 0 };
                    let cfg = pinned_flow(k, theta);
                    run_observed(p.generate(&grid)?, &grid, &cfg, MonitorLog::new(cfg.keep_every), |_| Ok(()))
                })()
                .map_err(|e| e.to_string());
                runs.push(ConvergenceRun { k, theta, amplitude, summary });
            }
        }
    }
    runs
}

/// Criterion 2: every perturbed cap converges to a cap.
pub fn convergence(runs: &[ConvergenceRun], seconds: f64) -> CriterionResult {
    let mut row = timed(2, "convergence", || {
        let (mut speed, mut stddev, mut capres, mut bad) = (0.0f64, 0.0f64, 0.0f64, Vec::new());
        for r in runs {
            match &r.summary {
                Ok(s) if s.status == RunStatus::Converged => {
                    let last = s.final_row();
                    speed = speed.max(last.speed_inf);
                    stddev = stddev.max(last.f_stddev);
                    capres = capres.max(s.cap_residual);
                }
                Ok(s) => bad.push(format!("{}: {:?}", r.label(), s.status)),
                Err(e) => bad.push(format!("{}: {e}", r.label())),
            }
        }
        let pass = bad.is_empty() && speed < 1e-7 && stddev < 1e-6 && capres < 1e-4;
        let mut detail = format!(
            "{} runs, ‖f‖∞ {speed:.1e} (<1e-7), stddev F {stddev:.1e} (<1e-6), cap residual {capres:.1e} (<1e-4)",
            runs.len()
        );
        if !bad.is_empty() {
            detail.push_str(&format!("; not converged: {}", bad.join("; ")));
        }
        (pass, detail)
    });
    row.seconds += seconds;
    row
}

fn converged(runs: &[ConvergenceRun]) -> impl Iterator<Item = (&ConvergenceRun, &RunSummary)> {
    runs.iter().filter_map(|r| match &r.summary {
        Ok(s) if s.status == RunStatus::Converged => Some((r, s)),
        _ => None,
    })
}

/// Criterion 3: `I_{2,θ}` and `V_{0,θ}` monotone for `k = 2`, volume
/// conserved for `k = 1`.
pub fn monotonicity(runs: &[ConvergenceRun]) -> CriterionResult {
    timed(3, "monotonicity", || {
        let (mut iso_up, mut v0_down, mut total, mut drift, mut count) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64, 0);
        for (r, s) in converged(runs) {
            count += 1;
            let st = s.stats();
            if r.k == 2 {
                iso_up = iso_up.max(st.iso_increase);
                v0_down = v0_down.max(st.v0_decrease);
                let first = s.state.monitors.first().expect("rows");
                total = total.min(first.iso - s.final_row().iso);
            } else {
                drift = drift.max(st.volume_drift);
            }
        }
        let pass = count == runs.len() && iso_up < 1e-9 && v0_down < 1e-9 && total >= 0.0 && drift < 1e-6;
        (
            pass,
            format!(
                "k=2: per-step I₂ rise {iso_up:.1e}, V₀ drop {v0_down:.1e} (<1e-9), total I₂ decrease {total:.2e} (≥0); k=1: |ΔV₀|/V₀ {drift:.1e} (<1e-6)"
            ),
        )
    })
}

/// Criterion 4: maximum principles, the preserved-convexity bound and the
/// barrier caps.
pub fn maximum_principles(runs: &[ConvergenceRun]) -> CriterionResult {
    timed(4, "maximum principles", || {
        let (mut f_up, mut u_down, mut kappa, mut barrier, mut count) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64, 0);
        for (_, s) in converged(runs) {
            count += 1;
            let st = s.stats();
            f_up = f_up.max(st.max_f_increase);
            u_down = u_down.max(st.min_u_bar_decrease);
            kappa = kappa.min(st.kappa_ratio);
            barrier = barrier.max(st.barrier_excursion);
        }
        let pass = count == runs.len() && f_up <= 1e-8 && u_down <= 1e-8 && kappa >= 0.9 && barrier <= 5e-4;
        (
            pass,
            format!(
                "max F rise {f_up:.1e}, min ū drop {u_down:.1e} (≤1e-8), min κ / (1/H̄ bound) {kappa:.3} (≥0.9), barrier excursion {barrier:.1e} (≤5e-4)"
            ),
        )
    })
}

const THETAS: [f64; 5] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3, 5.0 * PI / 12.0, FRAC_PI_2];

/// Contact angles for the Alexandrov–Fenchel checks. Below `π/4` the
/// second-order curvature error at 400 nodes (about `1e-5` relative in
/// `V_1`, `V_2`) exceeds the gap tolerances.
const AF_THETAS: [f64; 4] = [FRAC_PI_4, FRAC_PI_3, 5.0 * PI / 12.0, FRAC_PI_2];

/// Lower bound on a fitted order that should be 2; same band as the cap
/// residual order.
const MIN_ORDER: f64 = 1.7;

fn random_preset(seed: u64, thetas: &[f64]) -> (f64, Preset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let theta = thetas[(seed % thetas.len() as u64) as usize];
    let amplitude = rng.gen_range(0.05..0.15);
    let r = rng.gen_range(0.7..1.6);
    (theta, Preset::Random { r, amplitude, modes: 4, seed })
}

/// Criterion 5: the Minkowski identity on random convex bodies.
pub fn minkowski(opts: AcceptanceOptions) -> CriterionResult {
    timed(5, "minkowski identity", || {
        let run = || -> Result<(bool, String)> {
            let (mut worst, mut min_order, mut at_rounding) = (0.0f64, f64::INFINITY, 0);
            for seed in 0..20 {
                let (theta, preset) = random_preset(seed, &THETAS);
                for k in [1, 2] {
                    let (mut hs, mut es) = (Vec::new(), Vec::new());
                    for m in levels(opts.m_beta) {
                        let grid = HalfSphereGrid::axisymmetric(2, m, theta)?;
                        let s = sample_geometry(&grid, &preset.generate(&grid)?, k)?;
                        hs.push(grid.spacing());
                        es.push(minkowski_residual(&s, k)?.abs());
                    }
                    worst = worst.max(es[2]);
                    if es.iter().all(|e| *e > 1e-12) {
                        min_order = min_order.min(fitted_order(&hs, &es));
                    } else {
                        at_rounding += 1;
                    }
                }
            }
            let pass = worst < 1e-4 && min_order >= MIN_ORDER;
            Ok((
                pass,
                format!(
                    "20 bodies × k∈{{1,2}}: residual {worst:.1e} (<1e-4), min order {min_order:.2} (≥{MIN_ORDER}), {at_rounding} cases at rounding"
                ),
            ))
        };
        run().unwrap_or_else(failed)
    })
}

/// `(π/3)(2 − 3 cos θ + cos³ θ)`, the `n = 2` unit-cap volume.
pub fn b_theta_closed_form(theta: f64) -> f64 {
    let c = theta.cos();
    PI / 3.0 * (2.0 - 3.0 * c + c * c * c)
}

/// Criterion 6: the Alexandrov–Fenchel inequalities and `b_θ`.
pub fn alexandrov_fenchel(opts: AcceptanceOptions) -> CriterionResult {
    timed(6, "alexandrov-fenchel", || {
        let run = || -> Result<(bool, String)> {
            let mut min_gap = f64::INFINITY;
            for seed in 100..150 {
                let (theta, preset) = random_preset(seed, &AF_THETAS);
                let grid = HalfSphereGrid::axisymmetric(2, opts.m_beta, theta)?;
                let rep = report(&sample_geometry(&grid, &preset.generate(&grid)?, 2)?, 0.0)?;
                min_gap = min_gap.min(rep.af(1).unwrap()).min(rep.af(2).unwrap());
            }
            let (cap_gap, min_order) = unit_cap_af(opts)?;
            let mut b_err = 0.0f64;
            for i in 1..=10 {
                let theta = FRAC_PI_2 * i as f64 / 10.0;
                let exact = b_theta_closed_form(theta);
                b_err = b_err.max((b_theta_by_quadrature(theta, 2) - exact).abs() / exact);
            }
            let pass = min_gap >= -1e-6 && cap_gap < 1e-5 && (min_order - 2.0).abs() <= 0.3 && b_err < 1e-8;
            Ok((
                pass,
                format!(
                    "θ ∈ [π/4, π/2]; 50 bodies: min gap {min_gap:.2e} (≥-1e-6); unit caps: |gap| {cap_gap:.1e} (<1e-5), order {min_order:.2} (2±0.3); b_θ rel. error {b_err:.1e} (<1e-8)"
                ),
            ))
        };
        run().unwrap_or_else(failed)
    })
}

/// Largest `|af_gap|` over unit caps at `opts.m_beta`, and the smallest
/// fitted order of the gap under refinement.
pub fn unit_cap_af(opts: AcceptanceOptions) -> Result<(f64, f64)> {
    let (mut cap_gap, mut min_order) = (0.0f64, f64::INFINITY);
    for theta in AF_THETAS {
        let (mut hs, mut es) = (Vec::new(), Vec::new());
        for m in levels(opts.m_beta) {
            let grid = HalfSphereGrid::axisymmetric(2, m, theta)?;
            let rep = report(&sample_geometry(&grid, &cap_field(&CapSpec::new(theta, 1.0)?, &grid)?, 2)?, 0.0)?;
            hs.push(grid.spacing());
            es.push(rep.af_gap.iter().fold(0.0f64, |a, g| a.max(g.abs())));
        }
        cap_gap = cap_gap.max(es[2]);
        // θ = π/2 is exact to rounding and has no order.
        if es.iter().all(|e| *e > 1e-13) {
            min_order = min_order.min(fitted_order(&hs, &es));
        }
    }
    Ok((cap_gap, min_order))
}

/// σ_k by summing over all `C(n, k)` index subsets.
pub fn sigma_brute_force(x: &[f64], k: usize) -> (f64, f64) {
    let n = x.len();
    let (mut sum, mut scale) = (0.0, 0.0);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            let p: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).product();
            sum += p;
            scale += p.abs();
        }
    }
    (sum, scale.max(f64::MIN_POSITIVE))
}

fn random_kappa(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn in_cone(x: &[f64], k: usize) -> bool {
    (1..=k).all(|j| sigma_brute_force(x, j).0 > 0.0)
}

/// Criterion 7: σ_k recurrence, identities, inequalities and derivatives.
///
/// `sigma` is the σ_k under test; the identities are rebuilt from it, so a
/// faulty recurrence shows up in the identity rows as well as in the
/// brute-force comparison.
pub fn symmetric_functions(sigma: &dyn Fn(&[f64], usize) -> f64) -> CriterionResult {
    timed(7, "symmetric functions", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let without = |x: &[f64], i: usize| -> Vec<f64> {
            x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect()
        };
        let sig = |x: &[f64], k: usize| if k > x.len() { 0.0 } else { sigma(x, k) };

        // Recurrence against the subset oracle, n ≤ 8.
        let mut oracle = 0.0f64;
        for _ in 0..1000 {
            let n = rng.gen_range(2..=8);
            let x = random_kappa(&mut rng, n, -5.0, 5.0);
            for k in 0..=n {
                let (bf, scale) = sigma_brute_force(&x, k);
                oracle = oracle.max((sig(&x, k) - bf).abs() / scale);
            }
        }

        // The four σ identities, rebuilt from `sigma` and from the library.
        // n ≥ 3 keeps every κ|i a valid curvature vector.
        let mut ident = 0.0f64;
        for _ in 0..1000 {
            let n = rng.gen_range(3..=8);
            let k = rng.gen_range(1..=n);
            let x = random_kappa(&mut rng, n, -5.0, 5.0);
            let sk = sig(&x, k);
            let sk1 = sig(&x, k + 1);
            let (mut s2, mut s3, mut s4, mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                let y = without(&x, i);
                let (a, b) = (sig(&y, k), sig(&y, k - 1));
                let scale = sk.abs() + a.abs() + (x[i] * b).abs();
                ident = ident.max((sk - a - x[i] * b).abs() / scale.max(f64::MIN_POSITIVE));
                s2 += a;
                c2 += a.abs();
                s3 += x[i] * b;
                c3 += (x[i] * b).abs();
                s4 += x[i] * x[i] * b;
                c4 += (x[i] * x[i] * b).abs();
            }
            let s1 = sig(&x, 1);
            let nk = (n - k) as f64;
            let kf = k as f64;
            let r2 = (s2 - nk * sk).abs() / (c2 + nk * sk.abs()).max(f64::MIN_POSITIVE);
            let r3 = (s3 - kf * sk).abs() / (c3 + kf * sk.abs()).max(f64::MIN_POSITIVE);
            let r4 = (s4 - (s1 * sk - (kf + 1.0) * sk1)).abs()
                / (c4 + (s1 * sk).abs() + ((kf + 1.0) * sk1).abs()).max(f64::MIN_POSITIVE);
            ident = ident.max(r2).max(r3).max(r4);
            let lib = lemma_checks(&CurvatureVector::new(&x).unwrap(), k).unwrap();
            ident = ident.max(lib.identities.iter().fold(0.0f64, |a, r| a.max(r.abs())));
        }

        // Newton–MacLaurin in Γ_k; F^{ii} κ_i² ≥ F² and the pair ordering in Γ_n.
        let mut ineq_fail = 0usize;
        let (mut nm_count, mut pos_count) = (0, 0);
        while nm_count < 1000 {
            let n = rng.gen_range(2..=6);
            let k = rng.gen_range(1..=n);
            let x = random_kappa(&mut rng, n, -1.0, 5.0);
            if !in_cone(&x, k) {
                continue;
            }
            nm_count += 1;
            let rep = lemma_checks(&CurvatureVector::new(&x).unwrap(), k).unwrap();
            if rep.newton_maclaurin.is_some_and(|g| g < -1e-12) {
                ineq_fail += 1;
            }
        }
        while pos_count < 1000 {
            let n = rng.gen_range(2..=6);
            let k = rng.gen_range(1..=n);
            let x = random_kappa(&mut rng, n, 0.01, 5.0);
            pos_count += 1;
            let rep = lemma_checks(&CurvatureVector::new(&x).unwrap(), k).unwrap();
            if !rep.inequalities_hold(1e-12) || rep.f_square.is_none() || rep.pair_ordering.is_none() {
                ineq_fail += 1;
            }
        }
        // Umbilic points saturate Newton–MacLaurin.
        for n in 2..=6 {
            let rep = lemma_checks(&CurvatureVector::umbilic(n, 1.7).unwrap(), n).unwrap();
            if rep.newton_maclaurin.map_or(true, |g| g.abs() > 1e-12) {
                ineq_fail += 1;
            }
        }

        // F^{ii} against central differences of H_k^{1/k}.
        let mut deriv = 0.0f64;
        let mut concave_fail = 0usize;
        let mut count = 0;
        while count < 100 {
            let n = rng.gen_range(2..=6);
            let k = rng.gen_range(1..=n);
            let x = random_kappa(&mut rng, n, -1.0, 5.0);
            if !in_cone(&x, k) {
                continue;
            }
            count += 1;
            let d = f_and_derivatives(&CurvatureVector::new(&x).unwrap(), k).unwrap();
            let f = |y: &[f64]| normalized_hk(&CurvatureVector::new(y).unwrap(), k).unwrap().powf(1.0 / k as f64);
            for i in 0..n {
                let step = 1e-6 * x[i].abs().max(1.0);
                let (mut p, mut m) = (x.clone(), x.clone());
                p[i] += step;
                m[i] -= step;
                if !(in_cone(&p, k) && in_cone(&m, k)) {
                    continue;
                }
                let fd = (f(&p) - f(&m)) / (2.0 * step);
                deriv = deriv.max((d.f_diag[i] - fd).abs() / d.f_diag[i].abs().max(1e-3));
            }
            // Concavity of F on Γ_n.
            let a = random_kappa(&mut rng, n, 0.01, 5.0);
            let b = random_kappa(&mut rng, n, 0.01, 5.0);
            let t: f64 = rng.gen_range(0.0..1.0);
            let mix: Vec<f64> = a.iter().zip(&b).map(|(p, q)| t * p + (1.0 - t) * q).collect();
            if f(&mix) < t * f(&a) + (1.0 - t) * f(&b) - 1e-12 {
                concave_fail += 1;
            }
        }
        let pass = oracle <= 1e-12 && ident <= 1e-12 && ineq_fail == 0 && deriv <= 1e-6 && concave_fail == 0;
        (
            pass,
            format!(
                "recurrence vs subsets {oracle:.1e}, identities {ident:.1e} (≤1e-12), inequality failures {ineq_fail}, concavity failures {concave_fail}, F^ii vs FD {deriv:.1e} (≤1e-6)"
            ),
        )
    })
}

/// Criterion 8: the radial and geometric speeds agree on every evaluation.
pub fn gauge(opts: AcceptanceOptions, runs: &[ConvergenceRun]) -> CriterionResult {
    timed(8, "gauge consistency", || {
        let run = || -> Result<(bool, String)> {
            let mut worst = runs
                .iter()
                .filter_map(|r| r.summary.as_ref().ok())
                .fold(0.0f64, |a, s| a.max(s.stats().gauge_max));
            let mut evals = 0;
            for seed in 0..20 {
                let (theta, preset) = random_preset(seed, &THETAS);
                let grid = HalfSphereGrid::axisymmetric(2, opts.m_beta, theta)?;
                let field = preset.generate(&grid)?;
                for k in [1, 2] {
                    worst = worst.max(rhs(&grid, &field, &FlowConfig::new(k, theta))?.gauge);
                    evals += 1;
                }
            }
            let full = HalfSphereGrid::full2d(24, 16, FRAC_PI_3)?;
            let field = Preset::Random { r: 1.0, amplitude: 0.05, modes: 2, seed: 3 }.generate(&full)?;
            let mut cfg = FlowConfig::new(2, FRAC_PI_3);
            cfg.cone_policy = ConePolicy::Abort;
            worst = worst.max(rhs(&full, &field, &cfg)?.gauge);
            evals += 1;
            Ok((
                worst <= 1e-12,
                format!("{} runs (every step) + {evals} fields: max |e^φ/v·∂tφ − f| {worst:.1e} (≤1e-12)", runs.len()),
            ))
        };
        run().unwrap_or_else(failed)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_small_cases() {
        assert_eq!(sigma_brute_force(&[1.0, 2.0, 3.0], 2).0, 11.0);
        assert_eq!(sigma_brute_force(&[1.0, 2.0, 3.0], 0).0, 1.0);
        assert_eq!(sigma_brute_force(&[2.0; 5], 3).0, 80.0);
    }

    #[test]
    fn order_fit_recovers_power_laws() {
        let hs = [0.4, 0.2, 0.1];
        let es: Vec<f64> = hs.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((fitted_order(&hs, &es) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_b_theta_at_right_angle() {
        assert!((b_theta_closed_form(FRAC_PI_2) - 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tampered_sigma_fails_the_symmetric_function_row() {
        let off_by_one = |x: &[f64], k: usize| {
            let kk = if k >= 1 { k - 1 } else { 0 };
            sigma_k(&CurvatureVector::new(x).unwrap(), kk).unwrap()
        };
        assert!(!symmetric_functions(&off_by_one).passed);
    }
}
