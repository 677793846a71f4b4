//! Python module `bpsvortex`: grids, impurity profiles, vortex sets, the
//! planar solver, observables and the radial oracle.
//!
//! Fields cross the boundary as flat row-major lists of length `N*N`;
//! structured reports as JSON strings.

use bps_vortex as core;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyclass(frozen)]
struct Grid(core::GridSpec);

#[pymethods]
impl Grid {
    #[new]
    fn new(half_width: f64, points: usize) -> PyResult<Self> {
        core::GridSpec::new(half_width, points)
            .map(Grid)
            .map_err(err)
    }

    #[getter]
    fn half_width(&self) -> f64 {
        self.0.half_width()
    }

    #[getter]
    fn points(&self) -> usize {
        self.0.points_per_side()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    /// Node coordinates along one axis.
    fn coords(&self) -> Vec<f64> {
        (0..self.0.points_per_side())
            .map(|i| self.0.coord(i))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(L={}, N={})",
            self.0.half_width(),
            self.0.points_per_side()
        )
    }
}

/// Impurity profile `sigma`.
#[pyclass(frozen)]
struct Sigma(core::SigmaModel);

#[pymethods]
impl Sigma {
    #[staticmethod]
    fn zero() -> Self {
        Sigma(core::SigmaModel::Zero)
    }

    /// `-beta * exp(-alpha^2 |x - center|^2)`.
    #[staticmethod]
    #[pyo3(signature = (alpha, beta, center = (0.0, 0.0)))]
    fn gaussian(alpha: f64, beta: f64, center: (f64, f64)) -> PyResult<Self> {
        let m = core::SigmaModel::Gaussian {
            alpha,
            beta,
            center: [center.0, center.1],
        };
        m.validate().map_err(err)?;
        Ok(Sigma(m))
    }

    /// From the config-file form, e.g. `{"type": "gaussian", "alpha": 1, "beta": 0.5}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let m: core::SigmaModel =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        m.validate().map_err(err)?;
        Ok(Sigma(m))
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.0)
    }

    /// Closed-form `||sigma||_2` for Gaussian profiles.
    fn closed_form_norm2(&self) -> Option<f64> {
        self.0.closed_form_norm2()
    }

    /// Values on the grid nodes.
    fn sample(&self, grid: &Grid) -> PyResult<Vec<f64>> {
        core::eval_sigma(&self.0, &grid.0)
            .map(|f| f.into_values())
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Sigma({})",
            serde_json::to_string(&self.0).unwrap_or_default()
        )
    }
}

#[pyclass(frozen)]
struct Vortices(core::VortexSet);

#[pymethods]
impl Vortices {
    /// `n` vortices at `positions` (all at the origin when omitted).
    #[new]
    #[pyo3(signature = (n, positions = None, lam = None))]
    fn new(n: usize, positions: Option<Vec<(f64, f64)>>, lam: Option<f64>) -> Self {
        Vortices(core::VortexSet {
            n,
            positions: positions.map(|p| p.into_iter().map(|(x, y)| [x, y]).collect()),
            lambda: lam,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda()
    }

    fn positions(&self) -> Vec<(f64, f64)> {
        self.0
            .positions()
            .into_iter()
            .map(|p| (p[0], p[1]))
            .collect()
    }
}

/// The condition report `{norm2, closed_form_norm2, threshold, margin, satisfied}` as JSON.
#[pyfunction]
fn condition_margin(sigma: &Sigma, grid: &Grid) -> PyResult<String> {
    to_json(&core::condition_margin(&sigma.0, &grid.0).map_err(err)?)
}

#[pyfunction]
fn condition_threshold() -> f64 {
    core::condition_threshold()
}

#[pyclass(frozen)]
struct Problem(core::ProblemSetup);

impl Problem {
    fn field(&self, values: Vec<f64>) -> PyResult<core::ScalarField> {
        core::ScalarField::from_values(*self.0.grid(), values).map_err(err)
    }
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (grid, sigma = None, vortices = None))]
    fn new(grid: &Grid, sigma: Option<&Sigma>, vortices: Option<&Vortices>) -> PyResult<Self> {
        let sigma = sigma.map(|s| s.0.clone()).unwrap_or_default();
        let vortices = vortices.map(|v| v.0.clone()).unwrap_or_default();
        core::ProblemSetup::new(grid.0, &sigma, &vortices)
            .map(Problem)
            .map_err(err)
    }

    #[getter]
    fn vorticity(&self) -> usize {
        self.0.vorticity()
    }

    fn grid(&self) -> Grid {
        Grid(*self.0.grid())
    }

    fn action(&self, u: Vec<f64>) -> PyResult<f64> {
        core::action(&self.field(u)?, &self.0).map_err(err)
    }

    /// `-grad S[u]`; zero at the solution.
    fn residual(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        core::residual(&self.field(u)?, &self.0)
            .map(|r| r.into_values())
            .map_err(err)
    }

    fn hessian_apply(&self, u: Vec<f64>, h: Vec<f64>) -> PyResult<Vec<f64>> {
        core::hessian_apply(&self.field(u)?, &self.field(h)?, &self.0)
            .map(|r| r.into_values())
            .map_err(err)
    }

    /// Inequality report for a field, as JSON.
    fn check_inequalities(&self, u: Vec<f64>) -> PyResult<String> {
        to_json(&core::check_inequalities(&self.field(u)?, &self.0).map_err(err)?)
    }

    /// Minimize the action. `solver` is the config-file form as JSON.
    #[pyo3(signature = (solver = None, init = None))]
    fn solve(
        &self,
        py: Python<'_>,
        solver: Option<&str>,
        init: Option<Vec<f64>>,
    ) -> PyResult<Solution> {
        let cfg: core::SolverConfig = match solver {
            Some(text) => {
                serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?
            }
            None => core::SolverConfig::default(),
        };
        let init = init.map(|v| self.field(v)).transpose()?;
        let p = &self.0;
        let sol = py
            .detach(|| core::solve(p, &cfg, init.as_ref()))
            .map_err(err)?;
        let obs = core::compute_observables(&sol.u, p).map_err(err)?;
        Ok(Solution { sol, obs })
    }
}

#[pyclass(frozen)]
struct Solution {
    sol: core::Solution,
    obs: core::ObservableSet,
}

#[pymethods]
impl Solution {
    #[getter]
    fn converged(&self) -> bool {
        self.sol.report.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.sol.report.iterations
    }

    #[getter]
    fn flux(&self) -> f64 {
        self.obs.summary.flux
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.obs.summary.energy_dimless
    }

    fn u(&self) -> Vec<f64> {
        self.sol.u.values().to_vec()
    }

    /// `f = |phi|^2 / v0^2`.
    fn f(&self) -> Vec<f64> {
        self.obs.f.values().to_vec()
    }

    /// Dimensionless magnetic field `1 + sigma - f`.
    fn b(&self) -> Vec<f64> {
        self.obs.b.values().to_vec()
    }

    fn report_json(&self) -> PyResult<String> {
        to_json(&self.sol.report)
    }

    fn observables_json(&self) -> PyResult<String> {
        to_json(&self.obs.summary)
    }

    /// Flux, energy and length unit in physical variables, as JSON.
    fn to_physical(&self, g: f64, v0: f64) -> PyResult<String> {
        to_json(&core::to_physical(&self.obs.summary, g, v0).map_err(err)?)
    }
}

#[pyclass(frozen)]
struct RadialSolution(core::RadialSolution);

#[pymethods]
impl RadialSolution {
    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    #[getter]
    fn flux(&self) -> f64 {
        self.0.flux
    }

    fn r(&self) -> Vec<f64> {
        self.0.r.clone()
    }

    fn f(&self) -> Vec<f64> {
        self.0.f.clone()
    }

    fn f_at(&self, r: f64) -> f64 {
        self.0.f_at(r)
    }

    /// Compare against a planar solution of the same problem; JSON report.
    fn compare(
        &self,
        solution: &Solution,
        problem: &Problem,
        sigma: &Sigma,
        vortices: &Vortices,
    ) -> PyResult<String> {
        let planar = core::PlanarDescriptor {
            sigma: sigma.0.clone(),
            vortices: vortices.0.clone(),
        };
        to_json(
            &core::compare_with_2d(&self.0, &solution.obs.f, problem.0.grid(), &planar)
                .map_err(err)?,
        )
    }
}

/// Rotationally symmetric solve on `[0, outer_radius]`.
#[pyfunction]
#[pyo3(signature = (n, sigma = None, outer_radius = 20.0, nodes = 4001, lam = None))]
fn solve_radial(
    py: Python<'_>,
    n: usize,
    sigma: Option<&Sigma>,
    outer_radius: f64,
    nodes: usize,
    lam: Option<f64>,
) -> PyResult<RadialSolution> {
    let mut rp = core::RadialProblem::new(
        n,
        sigma.map(|s| s.0.clone()).unwrap_or_default(),
        outer_radius,
        nodes,
    );
    rp.lambda = lam;
    py.detach(|| core::solve_radial(&rp))
        .map(RadialSolution)
        .map_err(err)
}

#[pymodule]
fn bpsvortex(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<Sigma>()?;
    m.add_class::<Vortices>()?;
    m.add_class::<Problem>()?;
    m.add_class::<Solution>()?;
    m.add_class::<RadialSolution>()?;
    m.add_function(wrap_pyfunction!(condition_margin, m)?)?;
    m.add_function(wrap_pyfunction!(condition_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(solve_radial, m)?)?;
    Ok(())
}
