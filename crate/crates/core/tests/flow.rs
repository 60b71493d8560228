//! Whole-run behaviour of the flow on small grids.

use capflow::capgeom::{cap_field, CapSpec, HalfSphereGrid, RadialField};
use capflow::flow::{rhs, run, step, ConePolicy, FlowConfig, FlowState, Integrator, RunStatus};
use capflow::presets::Preset;
use capflow::Error;

fn perturbed(grid: &HalfSphereGrid, amplitude: f64) -> RadialField {
    Preset::PerturbedCap { r: 1.0, amplitude, legendre: 0, azimuthal: 0 }.generate(grid).unwrap()
}

#[test]
fn integrators_reach_the_same_cap() {
    let grid = HalfSphereGrid::axisymmetric(2, 30, 1.0).unwrap();
    for k in [1, 2] {
        let explicit = run(perturbed(&grid, 0.1), &grid, &FlowConfig::new(k, 1.0)).unwrap();
        let implicit =
            run(perturbed(&grid, 0.1), &grid, &FlowConfig::new(k, 1.0).with_integrator(Integrator::Rosenbrock)).unwrap();
        assert_eq!(explicit.status, RunStatus::Converged);
        assert_eq!(implicit.status, RunStatus::Converged);
        assert!((explicit.r0 - implicit.r0).abs() < 1e-6, "{} vs {}", explicit.r0, implicit.r0);
        assert!(explicit.cap_residual < 1e-5 && implicit.cap_residual < 1e-5);
    }
}

#[test]
fn full2d_matches_axisymmetric_on_axisymmetric_data() {
    let theta = 1.2;
    let cfg = FlowConfig::new(2, theta);
    // The two discretizations agree to second order in the polar spacing.
    let gap = |m: usize| {
        let axial = HalfSphereGrid::axisymmetric(2, m, theta).unwrap();
        let full = HalfSphereGrid::full2d(m, 8, theta).unwrap();
        let a = rhs(&axial, &perturbed(&axial, 0.08), &cfg).unwrap().dphi_dt;
        let b = rhs(&full, &perturbed(&full, 0.08), &cfg).unwrap().dphi_dt;
        (0..full.rows()).map(|j| (b[full.index(j, 3)] - a[j]).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (gap(15), gap(31));
    assert!(fine < coarse / 3.0, "{coarse} -> {fine}");

    // Stepping keeps azimuthally constant data azimuthally constant.
    let full = HalfSphereGrid::full2d(12, 8, theta).unwrap();
    let mut state = FlowState::new(perturbed(&full, 0.08), 1);
    for _ in 0..20 {
        state = step(&state, &full, &cfg).unwrap();
    }
    for j in 0..full.rows() {
        let row: Vec<f64> = (0..8).map(|l| state.field.phi[full.index(j, l)]).collect();
        let spread = row.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - row.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        assert!(spread < 1e-10, "row {j} lost symmetry: {spread}");
    }
}

#[test]
fn cone_policies() {
    let grid = HalfSphereGrid::axisymmetric(2, 30, 1.0).unwrap();
    let cap = cap_field(&CapSpec::new(1.0, 1.0).unwrap(), &grid).unwrap();
    // A dent at the pole makes the surface saddle-shaped there.
    let dented = RadialField::new(
        cap.phi.iter().enumerate().map(|(j, p)| p - 0.3 * (-(j as f64 / 3.0).powi(2)).exp()).collect(),
        0.0,
    );
    let abort = run(dented.clone(), &grid, &FlowConfig::new(2, 1.0));
    assert!(matches!(abort, Err(Error::Geometry(_))), "{abort:?}");

    let mut cfg = FlowConfig::new(2, 1.0);
    cfg.cone_policy = ConePolicy::ClampReport;
    let mut state = FlowState::new(dented, 1);
    for _ in 0..3 {
        state = step(&state, &grid, &cfg).unwrap();
    }
    assert!(state.tainted);
    assert!(state.clamped_nodes > 0);
}

#[test]
fn exit_codes() {
    assert_eq!(RunStatus::Converged.exit_code(), 0);
    assert_eq!(RunStatus::Timeout.exit_code(), 2);
    assert_eq!(RunStatus::ConeAbort.exit_code(), 3);
}
