//! Numerical laboratory for the logarithmic fast diffusion equation
//! `∂t u = Δ log u` on the unit disk, i.e. Ricci flow of the conformal
//! metric `u (dx² + dy²)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: hyperbolic metrics of the disk, annulus and punctured disk,
//!   Möbius automorphisms and Gauss curvature.
//! * [`exact`]: closed-form solutions (cigar soliton, hyperbolic family,
//!   Möbius pullbacks) used as oracles.
//! * [`discretization`]: radial and Cartesian disk grids, the shared
//!   Laplacian stencil, quadrature and norms.
//! * [`solver`]: backward-Euler time stepping in the log variable with
//!   damped Newton iterations.
//! * [`potential`]: the potential `ψ`, the Harnack quantity and the
//!   exponential-integrability audit.
//! * [`harness`]: end-to-end audits of the smoothing estimates and the
//!   sharpness experiments.
//! * [`cli`]: the `logdiff` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod discretization;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod harness;
pub mod potential;
pub mod report;
pub mod solver;
pub mod svg;

pub use discretization::{ConformalField, DiskGrid, Grid, RadialGrid, Region};
pub use error::{Error, Result};
pub use exact::ExactSolution;
pub use geometry::{DiskPoint, HyperbolicMetric, MobiusMap};
pub use report::CheckReport;
pub use solver::{Background, BoundaryStrategy, FlowProblem, Trajectory};
