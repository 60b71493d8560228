//! Simulation and audit of the locally constrained curvature flow of convex
//! capillary hypersurfaces in the half-space.
//!
//! A surface is a radial graph `ρ = e^φ` over the upper half-sphere and
//! meets the wall at a fixed contact angle `θ`. It moves with normal speed
//! `1 + cos θ ⟨ν, e⟩ − ⟨x, ν⟩ H_k^{1/k}` and converges to a spherical cap.
//!
//! * [`symm`]: elementary symmetric functions, cones `Γ_k` and `F = H_k^{1/k}`
//! * [`capgeom`]: grids, caps, geometry sampling, snapshots and meshes
//! * [`functionals`]: capillary quermassintegrals and the inequalities between them
//! * [`flow`]: the time integrator and its monitors
//! * [`config`], [`presets`], [`experiment`]: the experiment harness
//! * [`acceptance`]: the acceptance matrix
//!
//! The guide in `book/` covers the concepts; its code blocks run as doc
//! tests of this crate.

pub mod acceptance;
pub mod capgeom;
pub mod config;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod functionals;
pub mod presets;
pub mod quad;
pub mod symm;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/symmetric-functions.md")]
    mod symmetric_functions {}
    #[doc = include_str!("../../../book/src/functionals.md")]
    mod functionals {}
    #[doc = include_str!("../../../book/src/flow.md")]
    mod flow {}
    #[doc = include_str!("../../../book/src/running.md")]
    mod running {}
    #[doc = include_str!("../../../book/src/acceptance.md")]
    mod acceptance {}
}
