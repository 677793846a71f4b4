//! Independent 1-D solver for rotationally symmetric configurations: the
//! vacuum, or all vortices stacked at the origin, with a radial impurity.
//!
//! Solves `u'' + u'/r = e^u E0(r) + g0(r) - sigma(r) - 1` on `[0, R]` with
//! `u'(0) = 0` and far-field data `f(R) = 1`, by damped Newton on the
//! tridiagonal finite-difference system. It shares no discretization code
//! with the planar solver, so agreement between the two is evidence.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::background::VortexSet;
use crate::error::{Error, Result};
use crate::grid::{integrate, GridSpec, ScalarField};
use crate::inhomogeneity::SigmaModel;

pub const MIN_RADIUS: f64 = 12.0;
pub const MIN_NODES: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub sigma: SigmaModel,
    pub outer_radius: f64,
    pub nodes: usize,
}

impl RadialProblem {
    pub fn new(n: usize, sigma: SigmaModel, outer_radius: f64, nodes: usize) -> Self {
        Self {
            n,
            lambda: None,
            sigma,
            outer_radius,
            nodes,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
            .unwrap_or_else(|| VortexSet::default_lambda(self.n))
    }

    pub fn spacing(&self) -> f64 {
        self.outer_radius / (self.nodes - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_radius.is_finite() && self.outer_radius >= MIN_RADIUS) {
            return Err(Error::InvalidParameter(format!(
                "outer radius must be at least {MIN_RADIUS}, got {}",
                self.outer_radius
            )));
        }
        if self.nodes < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "radial solver needs at least {MIN_NODES} nodes, got {}",
                self.nodes
            )));
        }
        if self.n >= 1 && (self.lambda().is_nan() || self.lambda() <= 4.0 * self.n as f64) {
            return Err(Error::InvalidParameter(format!(
                "background parameter must satisfy lambda > 4n = {}, got lambda = {}",
                4 * self.n,
                self.lambda()
            )));
        }
        self.sigma.validate()?;
        if !self.sigma.is_radial() {
            return Err(Error::InadmissibleProfile(
                "radial solver needs a profile centred at the origin".into(),
            ));
        }
        Ok(())
    }

    fn e0(&self, r: f64) -> f64 {
        let r2 = r * r;
        (r2 / (r2 + self.lambda())).powi(self.n as i32)
    }

    fn g0(&self, r: f64) -> f64 {
        let lambda = self.lambda();
        self.n as f64 * 4.0 * lambda / (r * r + lambda).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub problem: RadialProblem,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    /// `2 pi int (1 + sigma - f) r dr`.
    pub flux: f64,
    pub converged: bool,
    pub iterations: usize,
    pub sup_residual: f64,
}

impl RadialSolution {
    /// Linear interpolation of `f` at radius `r` (clamped to `[0, R]`).
    pub fn f_at(&self, r: f64) -> f64 {
        let hr = self.problem.spacing();
        let m = self.r.len();
        let x = (r / hr).clamp(0.0, (m - 1) as f64);
        let i = (x.floor() as usize).min(m - 2);
        let t = x - i as f64;
        (1.0 - t) * self.f[i] + t * self.f[i + 1]
    }
}

const NEWTON_TOL: f64 = 1e-10;
/// A full Newton step this small ends the iteration: the residual itself sits
/// at the `eps / hr^2` rounding floor by then.
const STEP_TOL: f64 = 1e-13;
const NEWTON_MAX: usize = 100;

pub fn solve_radial(rp: &RadialProblem) -> Result<RadialSolution> {
    rp.validate()?;
    let m = rp.nodes;
    let hr = rp.spacing();
    let r: Vec<f64> = (0..m).map(|i| i as f64 * hr).collect();
    let sigma_fn = rp.sigma.radial_fn().expect("validated radial");
    let sigma: Vec<f64> = r.iter().map(|&ri| sigma_fn(ri)).collect();
    let e0: Vec<f64> = r.iter().map(|&ri| rp.e0(ri)).collect();
    // source terms g0 - sigma - 1
    let source: Vec<f64> = r
        .iter()
        .zip(&sigma)
        .map(|(&ri, s)| rp.g0(ri) - s - 1.0)
        .collect();
    let outer = -e0[m - 1].ln();

    let mut u = vec![0.0; m];
    u[m - 1] = outer;
    let mut res = radial_residual(&u, &r, &e0, &source, hr);
    let mut iterations = 0;
    let mut converged = sup(&res) <= NEWTON_TOL;
    while !converged && iterations < NEWTON_MAX {
        let (sub, diag, sup_diag) = radial_jacobian(&u, &r, &e0, hr);
        let rhs: Vec<f64> = res.iter().map(|v| -v).collect();
        let step = thomas(&sub, &diag, &sup_diag, &rhs);
        let step_size = sup(&step);
        let norm0 = l2(&res);
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-10 {
            let mut trial = u.clone();
            for (t, d) in trial.iter_mut().zip(&step) {
                *t += alpha * d;
            }
            if trial.iter().all(|v| v.is_finite() && *v < 700.0) {
                let trial_res = radial_residual(&trial, &r, &e0, &source, hr);
                // residuals at the rounding floor no longer decrease reliably
                if l2(&trial_res) < (1.0 - 1e-4 * alpha) * norm0 || step_size <= STEP_TOL {
                    u = trial;
                    res = trial_res;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        iterations += 1;
        converged = sup(&res) <= NEWTON_TOL || (accepted && alpha == 1.0 && step_size <= STEP_TOL);
        if !accepted {
            break;
        }
    }

    let f: Vec<f64> = u.iter().zip(&e0).map(|(uk, e)| uk.exp() * e).collect();
    let integrand: Vec<f64> = (0..m).map(|i| (1.0 + sigma[i] - f[i]) * r[i]).collect();
    let flux = 2.0 * PI * trapezoid(&integrand, hr);
    Ok(RadialSolution {
        problem: rp.clone(),
        r,
        u,
        f,
        flux,
        converged,
        iterations,
        sup_residual: sup(&res),
    })
}

/// Residual at the free nodes `0..m-1`; the outer node carries Dirichlet data.
fn radial_residual(u: &[f64], r: &[f64], e0: &[f64], source: &[f64], hr: f64) -> Vec<f64> {
    let m = u.len();
    let h2 = hr * hr;
    (0..m - 1)
        .map(|i| {
            let lap = if i == 0 {
                4.0 * (u[1] - u[0]) / h2
            } else {
                (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2 + (u[i + 1] - u[i - 1]) / (2.0 * r[i] * hr)
            };
            lap - (u[i].exp() * e0[i] + source[i])
        })
        .collect()
}

fn radial_jacobian(u: &[f64], r: &[f64], e0: &[f64], hr: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let k = u.len() - 1;
    let h2 = hr * hr;
    let mut sub = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut sup_diag = vec![0.0; k];
    for i in 0..k {
        let curvature = u[i].exp() * e0[i];
        if i == 0 {
            diag[0] = -4.0 / h2 - curvature;
            sup_diag[0] = 4.0 / h2;
        } else {
            let drift = 1.0 / (2.0 * r[i] * hr);
            sub[i] = 1.0 / h2 - drift;
            diag[i] = -2.0 / h2 - curvature;
            // the last free node couples to the fixed outer value
            sup_diag[i] = if i + 1 < k { 1.0 / h2 + drift } else { 0.0 };
        }
    }
    (sub, diag, sup_diag)
}

/// Tridiagonal solve; `sub[0]` and `sup[last]` are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup_diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup_diag[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = sup_diag[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n + 1];
    for i in (0..n).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn trapezoid(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    let inner: f64 = crate::grid::pairwise_sum(&v[1..n - 1]);
    h * (inner + 0.5 * (v[0] + v[n - 1]))
}

/// What a planar run solved, for matching against a radial solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarDescriptor {
    pub sigma: SigmaModel,
    pub vortices: VortexSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub sup_diff: f64,
    pub l2_diff: f64,
    /// Radius of the compared disk, `0.8 L`.
    pub disk_radius: f64,
    pub nodes_compared: usize,
}

/// Compares the radial `f(r)` against a planar `f` over the disk `r <= 0.8 L`.
pub fn compare_with_2d(
    radial: &RadialSolution,
    planar_f: &ScalarField,
    grid: &GridSpec,
    planar: &PlanarDescriptor,
) -> Result<Comparison> {
    let rp = &radial.problem;
    if planar_f.grid() != grid {
        return Err(Error::ComparisonRefused(
            "planar field lives on another grid".into(),
        ));
    }
    if planar.vortices.n != rp.n {
        return Err(Error::ComparisonRefused(format!(
            "vorticity differs: planar n = {}, radial n = {}",
            planar.vortices.n, rp.n
        )));
    }
    if !planar.vortices.all_at_origin() {
        return Err(Error::ComparisonRefused(
            "planar vortices are not all at the origin".into(),
        ));
    }
    if planar.sigma != rp.sigma {
        return Err(Error::ComparisonRefused("impurity profiles differ".into()));
    }
    let disk_radius = 0.8 * grid.half_width();
    if disk_radius > rp.outer_radius {
        return Err(Error::ComparisonRefused(format!(
            "radial domain R = {} does not cover the disk of radius {disk_radius}",
            rp.outer_radius
        )));
    }

    let mut diff = ScalarField::zeros(*grid);
    let mut sup_diff: f64 = 0.0;
    let mut nodes_compared = 0;
    for k in 0..grid.len() {
        let (x, y) = grid.node(k);
        let rr = x.hypot(y);
        if rr <= disk_radius {
            let d = planar_f.values()[k] - radial.f_at(rr);
            diff.values_mut()[k] = d * d;
            sup_diff = sup_diff.max(d.abs());
            nodes_compared += 1;
        }
    }
    Ok(Comparison {
        sup_diff,
        l2_diff: integrate(&diff)?.sqrt(),
        disk_radius,
        nodes_compared,
    })
}
