//! Inhomogeneous BPS vacua and multi-vortices of the abelian Higgs model.
//!
//! The unknown is `u = ln f - u0`, where `f = |phi|^2 / v0^2` and `u0`
//! carries the vortex singularities. It minimizes a strictly convex action
//! on a truncated, uniformly discretized plane:
//!
//! - [`grid`]: the box, fields on it, the 5-point Laplacian, quadrature, norms
//! - [`inhomogeneity`]: impurity profiles and the `||sigma||_2 < sqrt(2/pi)` condition
//! - [`background`]: the singular background fields for `n >= 1`
//! - [`functional`]: action, residual, Hessian action, inequality checks
//! - [`solver`]: damped Newton-CG with a gradient-flow fallback
//! - [`observables`]: `f`, magnetic field, flux, energy, physical units
//! - [`radial_oracle`]: an independent 1-D solver for rotationally symmetric cases

pub mod background;
pub mod error;
pub mod functional;
pub mod grid;
pub mod inhomogeneity;
pub mod observables;
pub mod radial_oracle;
pub mod solver;

pub use background::{build_background, Background, VortexSet};
pub use error::{Error, Result};
pub use functional::{
    action, check_inequalities, hessian_apply, residual, InequalityCheck, InequalityReport,
    ProblemSetup,
};
pub use grid::{integrate, laplacian_apply, norms, GridSpec, Norms, ScalarField};
pub use inhomogeneity::{
    condition_margin, condition_threshold, eval_sigma, ConditionMargin, SigmaModel,
};
pub use observables::{
    compute_observables, to_physical, ObservableSet, ObservableSummary, PhysicalReport,
};
pub use radial_oracle::{
    compare_with_2d, solve_radial, Comparison, PlanarDescriptor, RadialProblem, RadialSolution,
};
pub use solver::{solve, solve_observed, Method, Solution, SolveReport, SolverConfig};
