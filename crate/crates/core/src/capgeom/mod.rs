//! Extrinsic geometry of radial graphs `Σ = {ρ(X) X : X ∈ S̄^n_+}` over the
//! closed upper half-sphere, with contact angle `θ` against the wall
//! `∂R^{n+1}_+`. The wall normal is `e = −e_{n+1}`.

pub mod cap;
pub mod export;
mod grid;
mod sample;
pub(crate) mod stencil;

pub use cap::{
    b_theta, b_theta_by_quadrature, barrier_radii, cap_analytics, cap_field, cap_radius_profile,
    unit_cap_rho, CapAnalytics, CapSpec,
};
pub use grid::{GridMode, HalfSphereGrid, RadialField};
pub(crate) use grid::cos_angle;
pub use sample::{
    boundary_frame_check, boundary_trace, sample_geometry, static_residual, BoundaryFrameReport,
    BoundaryTrace, GeometrySample, SurfaceSamples,
};
pub(crate) use sample::{cone_of, local_geometry, normalized_into, trace_of};
