//! Mixed finite element solver for fully dynamic thermo-poroelasticity in
//! the frequency domain.
//!
//! The discretization couples four fields on triangular meshes of the unit
//! square:
//!
//! | field | unknown                   | space                         |
//! |-------|---------------------------|-------------------------------|
//! | `u`   | solid displacement        | Bernardi–Raugel (P1 + bubbles) |
//! | `w`   | filtration displacement   | lowest-order Raviart–Thomas   |
//! | `p`   | pore pressure             | piecewise constants           |
//! | `T`   | temperature               | continuous P1                 |
//!
//! The displacement divergence entering the `λ` and `β` couplings is replaced
//! by its cell mean (reduced integration), which keeps the scheme free of
//! volumetric locking, and an artificial conductivity `δ Σ h_K² (∇T, ∇s)_K`
//! stabilizes the temperature when thermal capacity and conductivity are
//! small.
//!
//! The typical pipeline is
//! [`mesh::Mesh::uniform_unit_square`] → [`mesh::Mesh::tag_boundary`] →
//! [`fespace::DofLayout::new`] → [`assembly::assemble_operator`] /
//! [`assembly::assemble_load`] → [`assembly::apply_essential_bcs`] →
//! [`linsolve::solve`]. [`mms::run_manufactured`] and
//! [`benchmarks::run_benchmark`] wrap that pipeline.

pub mod assembly;
pub mod benchmarks;
pub mod cli;
pub mod export;
pub mod fespace;
pub mod linsolve;
pub mod mesh;
pub mod mms;
pub mod params;
pub mod spectral;

use std::sync::Arc;

pub use num_complex::Complex64 as C64;

/// A point in the plane.
pub type Point = nalgebra::Vector2<f64>;

/// Complex-valued scalar field of position.
pub type ScalarField = Arc<dyn Fn(Point) -> C64 + Send + Sync>;

/// Complex-valued vector field of position.
pub type VectorField = Arc<dyn Fn(Point) -> [C64; 2] + Send + Sync>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model assumption violated: {}", .0.join("; "))]
    AssumptionViolated(Vec<String>),
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("boundary partition: {0}")]
    Boundary(String),
    #[error("degree-of-freedom layout: {0}")]
    Layout(String),
    #[error("load datum `{0}` supplied but its boundary region is empty")]
    UntaggedDatum(&'static str),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("solver did not reach the residual contract: {residual:.3e} > {tol:.3e}")]
    NotConverged { residual: f64, tol: f64 },
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Imaginary unit.
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
