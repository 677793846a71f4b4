//! Minimization of the action: damped Newton steps with matrix-free
//! conjugate-gradient inner solves, and an explicit gradient flow used both
//! as a standalone method and as a fallback when a Newton step cannot be
//! damped into descent.
//!
//! Steps are accepted by an Armijo test on the action. The action change of
//! a trial step is evaluated directly (see `functional::action_change`), so
//! the test stays meaningful once the change drops below the rounding level
//! of the action itself.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functional::{
    action, action_change, curvature_weight, residual, residual_unchecked, ProblemSetup, EXP_LIMIT,
};
use crate::grid::ScalarField;
use crate::inhomogeneity::{margin_of_field, ConditionMargin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    NewtonCg,
    GradientFlow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    /// Convergence threshold on `sup |residual|`.
    pub residual_tol: f64,
    /// Outer iterations (Newton steps, or flow steps for `gradient_flow`).
    pub max_outer: usize,
    /// Relative tolerance of the inner CG solve; tightened to the current
    /// residual once that is smaller.
    pub cg_tol: f64,
    pub max_cg: usize,
    pub backtrack: f64,
    pub armijo: f64,
    /// Explicit flow step; defaults to `0.2 h^2`.
    pub flow_step: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::NewtonCg,
            residual_tol: 1e-10,
            max_outer: 60,
            cg_tol: 1e-3,
            max_cg: 5000,
            backtrack: 0.5,
            armijo: 1e-4,
            flow_step: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.residual_tol.is_finite() && self.residual_tol > 0.0) {
            return Err(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            ));
        }
        if self.max_outer < 1 {
            return Err("max_outer must be at least 1".into());
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(format!("cg_tol must lie in (0, 1), got {}", self.cg_tol));
        }
        if self.max_cg < 1 {
            return Err("max_cg must be at least 1".into());
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(format!(
                "backtrack must lie in (0, 1), got {}",
                self.backtrack
            ));
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            return Err(format!("armijo must lie in (0, 0.5), got {}", self.armijo));
        }
        if let Some(tau) = self.flow_step {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(format!("flow_step must be positive, got {tau}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub converged: bool,
    pub iterations: usize,
    pub cg_iterations: usize,
    /// Gradient-flow steps taken after a Newton step failed to descend.
    pub fallback_steps: usize,
    pub final_sup_residual: f64,
    pub final_l2_residual: f64,
    /// Action after every accepted step, starting with the initial field.
    pub action_history: Vec<f64>,
    pub condition_margin: ConditionMargin,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub u: ScalarField,
    pub report: SolveReport,
}

/// Minimize the action starting from `u_init` (zero when `None`).
pub fn solve(
    p: &ProblemSetup,
    cfg: &SolverConfig,
    u_init: Option<&ScalarField>,
) -> Result<Solution> {
    solve_observed(p, cfg, u_init, |_, _| {})
}

/// As [`solve`], calling `observe(iteration, u)` on the initial field and
/// after every accepted step.
pub fn solve_observed(
    p: &ProblemSetup,
    cfg: &SolverConfig,
    u_init: Option<&ScalarField>,
    mut observe: impl FnMut(usize, &ScalarField),
) -> Result<Solution> {
    let start = Instant::now();
    cfg.validate()
        .map_err(crate::error::Error::InvalidParameter)?;
    let mut u = match u_init {
        Some(u0) => {
            u0.ensure_same_grid(p.sigma())?;
            u0.clone()
        }
        None => ScalarField::zeros(*p.grid()),
    };
    let mut r = residual(&u, p)?;
    let mut history = vec![action(&u, p)?];
    observe(0, &u);

    let h2 = p.grid().spacing().powi(2);
    let tau = cfg.flow_step.unwrap_or(0.2 * h2);
    let mut iterations = 0;
    let mut cg_iterations = 0;
    let mut fallback_steps = 0;
    let mut message = None;
    let mut converged = r.sup_norm() <= cfg.residual_tol;

    while !converged && iterations < cfg.max_outer {
        let step = match cfg.method {
            Method::NewtonCg => {
                let sup = r.sup_norm();
                let forcing = cfg.cg_tol.min(sup.sqrt());
                let (d, its) = conjugate_gradient(&u, &r, p, forcing, cfg.max_cg);
                cg_iterations += its;
                match line_search(&u, &r, &d, p, cfg) {
                    Some(step) => Some(step),
                    None => {
                        fallback_steps += 1;
                        line_search(&u, &r, &r.scaled(tau), p, cfg)
                    }
                }
            }
            Method::GradientFlow => line_search(&u, &r, &r.scaled(tau), p, cfg),
        };
        let Some((trial, change)) = step else {
            message = Some("line search could not find a descent step".into());
            break;
        };
        u = trial;
        iterations += 1;
        history.push(history.last().copied().unwrap_or(0.0) + change);
        r = residual_unchecked(&u, p);
        observe(iterations, &u);
        converged = r.sup_norm() <= cfg.residual_tol;
    }
    if !converged && message.is_none() {
        message = Some(format!(
            "no convergence within {} outer iterations",
            cfg.max_outer
        ));
    }

    let report = SolveReport {
        method: cfg.method,
        converged,
        iterations,
        cg_iterations,
        fallback_steps,
        final_sup_residual: r.sup_norm(),
        final_l2_residual: r.pairing(&r).sqrt(),
        action_history: history,
        condition_margin: margin_of_field(p.sigma(), None),
        wall_time_s: start.elapsed().as_secs_f64(),
        message,
    };
    Ok(Solution { u, report })
}

/// Backtracking along `d` until the Armijo condition holds. Returns the
/// accepted field and its action change.
fn line_search(
    u: &ScalarField,
    r: &ScalarField,
    d: &ScalarField,
    p: &ProblemSetup,
    cfg: &SolverConfig,
) -> Option<(ScalarField, f64)> {
    // directional derivative of the action along d
    let slope = -r.pairing(d);
    if slope.is_nan() || slope >= 0.0 {
        return None;
    }
    let mut alpha = 1.0;
    while alpha > 1e-12 {
        let mut trial = u.clone();
        trial.axpy(alpha, d);
        if trial
            .values()
            .iter()
            .all(|&v| v <= EXP_LIMIT && v.is_finite())
        {
            let change = action_change(u, r, &d.scaled(alpha), p);
            if change <= cfg.armijo * alpha * slope {
                return Some((trial, change));
            }
        }
        alpha *= cfg.backtrack;
    }
    None
}

/// Solves `H d = r` with `H = -Lap_h + e^u E0` by conjugate gradients,
/// stopping at relative residual `rel_tol`. Returns `d` and the iteration count.
fn conjugate_gradient(
    u: &ScalarField,
    rhs: &ScalarField,
    p: &ProblemSetup,
    rel_tol: f64,
    max_iter: usize,
) -> (ScalarField, usize) {
    let op = HessianOperator::new(&curvature_weight(u, p));
    let b = rhs.values();
    let len = b.len();
    let mut x = vec![0.0; len];
    let mut res = b.to_vec();
    let mut dir = res.clone();
    let mut a_dir = vec![0.0; len];
    let mut rr = dot(&res, &res);
    let target = rel_tol * rel_tol * rr;
    let mut its = 0;
    while its < max_iter && rr > target && rr > 0.0 {
        op.apply(&dir, &mut a_dir);
        let curvature = dot(&dir, &a_dir);
        if curvature <= 0.0 {
            break;
        }
        let step = rr / curvature;
        for i in 0..len {
            x[i] += step * dir[i];
            res[i] -= step * a_dir[i];
        }
        let rr_next = dot(&res, &res);
        let beta = rr_next / rr;
        for i in 0..len {
            dir[i] = res[i] + beta * dir[i];
        }
        rr = rr_next;
        its += 1;
    }
    let d = ScalarField::from_values(*u.grid(), x).unwrap_or_else(|_| rhs.clone());
    (d, its)
}

/// Pairwise dot product, same split order as `grid::pairwise_sum`.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if a.len() <= BLOCK {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    } else {
        let mid = a.len() / 2;
        dot(&a[..mid], &b[..mid]) + dot(&a[mid..], &b[mid..])
    }
}

struct HessianOperator {
    weight: Vec<f64>,
    n: usize,
    inv_h2: f64,
}

impl HessianOperator {
    fn new(weight: &ScalarField) -> Self {
        let h = weight.grid().spacing();
        Self {
            weight: weight.values().to_vec(),
            n: weight.grid().points_per_side(),
            inv_h2: 1.0 / (h * h),
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for iy in 0..n {
            for ix in 0..n {
                let k = iy * n + ix;
                let west = if ix > 0 { x[k - 1] } else { 0.0 };
                let east = if ix + 1 < n { x[k + 1] } else { 0.0 };
                let south = if iy > 0 { x[k - n] } else { 0.0 };
                let north = if iy + 1 < n { x[k + n] } else { 0.0 };
                out[k] = (4.0 * x[k] - east - west - north - south) * self.inv_h2
                    + self.weight[k] * x[k];
            }
        }
    }
}
