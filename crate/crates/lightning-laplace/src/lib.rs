//! Laplace solver for planar domains with corners, based on rational
//! approximation with poles clustered exponentially near the corners.
//!
//! A Dirichlet problem on a polygon (or a domain bounded by circular and
//! elliptic arcs) is solved as `u = Re r(z)` where
//!
//! ```text
//! r(z) = sum_j a_j / (z - z_j)  +  sum_p b_p (z - z*)^p
//! ```
//!
//! The poles `z_j` lie outside the domain on the exterior corner bisectors,
//! at distances that cluster exponentially towards each corner; the
//! polynomial part handles the smooth remainder. Coefficients come from a
//! weighted least-squares fit of the boundary data on clustered sample
//! points, and the iteration over basis sizes stops once the measured
//! boundary error (a certificate, by the maximum principle) meets the
//! requested tolerance.

pub mod basis;
pub mod boundary;
pub mod cli;
pub(crate) mod dd;
pub mod demos;
pub mod error;
pub mod evaluator;
pub mod files;
pub mod geometry;
pub mod linsolve;
pub mod solver;
pub mod theory;
mod util;

pub use basis::{assemble, place_poles, plan_samples, Basis, FitSystem, PoleCluster, SamplePlan};
pub use boundary::BoundarySpec;
pub use error::{Error, Result};
pub use evaluator::EvaluationGrid;
pub use geometry::{build_polygon, BoundaryArc, Corner, Domain};
pub use linsolve::{condition_estimate, solve_ls, FitResult};
pub use solver::{solve, ConvergenceReport, Solution, SolverConfig};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
