//! The strictly convex action whose Euler-Lagrange equation is
//!
//! ```text
//! Lap u = e^u E0 + g0 - sigma - 1,      u -> -ln E0 at the box edge,
//! ```
//!
//! together with its gradient (the negated residual), its Hessian action,
//! and checkers for the analytic inequalities behind existence.
//!
//! The discrete action is
//!
//! ```text
//! S[u] = 1/2 sum_edges (u_i - u_j)^2
//!      + h^2 sum_nodes [ (e^u - 1) E0 - (1 - g0) u - sigma u - b u ]
//! ```
//!
//! where edges to the ghost ring count with a zero ghost value and `b` is
//! the boundary load carrying the far-field Dirichlet data. Under the
//! node-sum pairing `<a, c> = h^2 sum a c` its gradient is exactly
//! `-residual`.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::background::{build_background, Background, VortexSet};
use crate::error::{Error, Result};
use crate::grid::{
    integrate_unchecked, laplacian_unchecked, norms, pairwise_sum, GridSpec, Norms, ScalarField,
};
use crate::inhomogeneity::{eval_sigma, SigmaModel};

/// Largest `u` for which `e^u` is evaluated.
pub const EXP_LIMIT: f64 = 700.0;

/// Relative tolerance on inequality slack.
pub const SLACK_TOLERANCE: f64 = 1e-9;

/// Everything the action needs besides `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSetup {
    grid: GridSpec,
    sigma: ScalarField,
    background: Background,
}

impl ProblemSetup {
    pub fn new(grid: GridSpec, sigma: &SigmaModel, vortices: &VortexSet) -> Result<Self> {
        let sigma = eval_sigma(sigma, &grid)?;
        let background = build_background(vortices, &grid)?;
        Self::from_parts(sigma, background)
    }

    pub fn from_parts(sigma: ScalarField, background: Background) -> Result<Self> {
        sigma.ensure_finite()?;
        sigma.ensure_same_grid(&background.e0)?;
        let e0 = &background.e0;
        if e0.values().iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::InvalidField("E0 must lie in [0, 1]".into()));
        }
        if background.g0.values().iter().any(|&g| g < 0.0) {
            return Err(Error::InvalidField("g0 must be non-negative".into()));
        }
        let trivial = e0.values().iter().all(|&e| e == 1.0)
            && background.g0.values().iter().all(|&g| g == 0.0);
        if (background.n == 0) != trivial {
            return Err(Error::InvalidField(
                "background must be trivial exactly when the vorticity is zero".into(),
            ));
        }
        Ok(Self {
            grid: *sigma.grid(),
            sigma,
            background,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn sigma(&self) -> &ScalarField {
        &self.sigma
    }

    pub fn background(&self) -> &Background {
        &self.background
    }

    pub fn vorticity(&self) -> usize {
        self.background.n
    }
}

fn check_range(u: &ScalarField) -> Result<()> {
    u.ensure_finite()?;
    match u.values().iter().position(|&v| v > EXP_LIMIT) {
        Some(node) => Err(Error::DivergentField {
            node,
            value: u.values()[node],
        }),
        None => Ok(()),
    }
}

/// `sum over edges of (u_i - u_j)^2`, ghost values zero.
fn edge_energy(u: &ScalarField) -> f64 {
    let grid = u.grid();
    let n = grid.points_per_side();
    let v = u.values();
    let terms: Vec<f64> = (0..v.len())
        .map(|k| {
            let (ix, iy) = (k % n, k / n);
            let east = if ix + 1 < n { v[k + 1] } else { 0.0 };
            let north = if iy + 1 < n { v[k + n] } else { 0.0 };
            let mut t = (east - v[k]).powi(2) + (north - v[k]).powi(2);
            if ix == 0 {
                t += v[k] * v[k];
            }
            if iy == 0 {
                t += v[k] * v[k];
            }
            t
        })
        .collect();
    pairwise_sum(&terms)
}

pub fn action(u: &ScalarField, p: &ProblemSetup) -> Result<f64> {
    check_range(u)?;
    u.ensure_same_grid(&p.sigma)?;
    let bg = &p.background;
    let h2 = p.grid.spacing().powi(2);
    let potential: Vec<f64> = (0..u.values().len())
        .map(|k| {
            let uk = u.values()[k];
            uk.exp_m1() * bg.e0.values()[k]
                - (1.0 - bg.lattice_g0.values()[k]) * uk
                - p.sigma.values()[k] * uk
                - bg.boundary_load.values()[k] * uk
        })
        .collect();
    Ok(0.5 * edge_energy(u) + h2 * pairwise_sum(&potential))
}

/// `Lap_h u - (e^u E0 + g0 - sigma - 1)`, with the far-field data folded in.
pub fn residual(u: &ScalarField, p: &ProblemSetup) -> Result<ScalarField> {
    check_range(u)?;
    u.ensure_same_grid(&p.sigma)?;
    Ok(residual_unchecked(u, p))
}

pub(crate) fn residual_unchecked(u: &ScalarField, p: &ProblemSetup) -> ScalarField {
    let bg = &p.background;
    let mut r = laplacian_unchecked(u);
    let rv = r.values_mut();
    for (k, out) in rv.iter_mut().enumerate() {
        let uk = u.values()[k];
        let e0 = bg.e0.values()[k];
        // e^u E0 - 1 without cancellation when E0 = 1
        let nonlinear = uk.exp_m1() * e0 + (e0 - 1.0);
        *out += bg.boundary_load.values()[k] + p.sigma.values()[k]
            - bg.lattice_g0.values()[k]
            - nonlinear;
    }
    r
}

/// `-Lap_h h + e^u E0 h`.
pub fn hessian_apply(u: &ScalarField, h: &ScalarField, p: &ProblemSetup) -> Result<ScalarField> {
    check_range(u)?;
    h.ensure_finite()?;
    u.ensure_same_grid(&p.sigma)?;
    h.ensure_same_grid(&p.sigma)?;
    let weight = curvature_weight(u, p);
    Ok(hessian_with_weight(&weight, h))
}

/// The zeroth-order Hessian coefficient `e^u E0`.
pub(crate) fn curvature_weight(u: &ScalarField, p: &ProblemSetup) -> ScalarField {
    u.zip_map(&p.background.e0, |uk, e| uk.exp() * e)
        .expect("same grid")
}

pub(crate) fn hessian_with_weight(weight: &ScalarField, h: &ScalarField) -> ScalarField {
    let mut out = laplacian_unchecked(h);
    for ((o, &w), &hk) in out
        .values_mut()
        .iter_mut()
        .zip(weight.values())
        .zip(h.values())
    {
        *o = -*o + w * hk;
    }
    out
}

/// `S[u + d] - S[u]` evaluated without cancellation against `S[u]`:
/// `<-r, d> + 1/2 sum_edges (d_i - d_j)^2 + h^2 sum E0 e^u (e^d - 1 - d)`.
pub(crate) fn action_change(
    u: &ScalarField,
    r: &ScalarField,
    d: &ScalarField,
    p: &ProblemSetup,
) -> f64 {
    let h2 = p.grid.spacing().powi(2);
    let e0 = p.background.e0.values();
    let curvature: Vec<f64> = (0..d.values().len())
        .map(|k| e0[k] * u.values()[k].exp() * exp_remainder(d.values()[k]))
        .collect();
    -r.pairing(d) + 0.5 * edge_energy(d) + h2 * pairwise_sum(&curvature)
}

/// `e^x - 1 - x`, accurate for small `x`.
fn exp_remainder(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        x * x * (0.5 + x * (1.0 / 6.0 + x / 24.0))
    } else {
        x.exp_m1() - x
    }
}

/// One side-by-side evaluation of an inequality `lhs >= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub slack: f64,
    pub pass: bool,
}

impl InequalityCheck {
    /// `lhs >= rhs` up to `SLACK_TOLERANCE` relative to the larger side.
    pub fn at_least(lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        let scale = lhs.abs().max(rhs.abs());
        Self {
            lhs,
            rhs,
            slack,
            pass: slack >= -SLACK_TOLERANCE * scale,
        }
    }

    /// `lhs <= rhs`, reported with the same sign convention (`slack >= 0` passes).
    pub fn at_most(lhs: f64, rhs: f64) -> Self {
        let mut c = Self::at_least(rhs, lhs);
        c.lhs = lhs;
        c.rhs = rhs;
        c
    }
}

/// Node-wise check of the background bound, summarised at the worst node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCheck {
    pub worst: InequalityCheck,
    pub worst_node: Option<usize>,
    pub nodes_checked: usize,
    pub nodes_failed: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub norms: Norms,
    pub sigma_norm2: f64,
    /// `int u (e^u - 1) >= ||u||_2^4 / (||u||_2^2 + sqrt(pi/2) ||u||_{1,2}^3)`.
    pub exponential_lower_bound: InequalityCheck,
    /// `u (e^{u+u0} + g0 - 1) >= (1 - 4n/lambda) u^2/(1+u^2) - lambda/(16n) (u0+g0)^2`
    /// away from the vortices; vortex problems only.
    pub background_pointwise: Option<PointwiseCheck>,
    /// `||u||_3^3 <= sqrt(pi/2) ||u||_{1,2}^3`.
    pub embedding: InequalityCheck,
    /// Lower bound on `<grad S[u], u>` that is linear in `||u||_{1,2}`.
    pub coercivity: InequalityCheck,
}

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.exponential_lower_bound.pass
            && self.embedding.pass
            && self.coercivity.pass
            && self.background_pointwise.is_none_or(|c| c.pass)
    }
}

/// `int (u0 + g0)^2`, skipping nodes that coincide with a vortex.
pub fn background_defect_integral(bg: &Background) -> f64 {
    let mut w = bg.u0_clamped();
    for ((wk, &g), &e) in w
        .values_mut()
        .iter_mut()
        .zip(bg.g0.values())
        .zip(bg.e0.values())
    {
        *wk = if e > 0.0 { (*wk + g).powi(2) } else { 0.0 };
    }
    integrate_unchecked(&w)
}

pub fn check_inequalities(u: &ScalarField, p: &ProblemSetup) -> Result<InequalityReport> {
    check_range(u)?;
    u.ensure_same_grid(&p.sigma)?;
    let nm = norms(u)?;
    let sigma_norm2 = integrate_unchecked(&p.sigma.map(|s| s * s)).sqrt();
    let root = (PI / 2.0).sqrt();
    let r = nm.sobolev12;

    let exp_lhs = integrate_unchecked(&u.map(|v| v * v.exp_m1()));
    let denom = nm.l2.powi(2) + root * r.powi(3);
    let exp_rhs = if denom > 0.0 {
        nm.l2.powi(4) / denom
    } else {
        0.0
    };
    let exponential_lower_bound = InequalityCheck::at_least(exp_lhs, exp_rhs);

    let embedding = InequalityCheck::at_most(nm.l3.powi(3), root * r.powi(3));

    let gradient_dot_u = -residual_unchecked(u, p).pairing(u);
    let bg = &p.background;
    let coercivity = if bg.n == 0 {
        InequalityCheck::at_least(
            gradient_dot_u,
            (FRAC_2_PI.sqrt() - sigma_norm2) * r - FRAC_2_PI,
        )
    } else {
        let n = bg.n as f64;
        let shrink = 1.0 - 4.0 * n / bg.lambda;
        let constant = FRAC_2_PI * shrink + bg.lambda / (16.0 * n) * background_defect_integral(bg);
        InequalityCheck::at_least(
            gradient_dot_u,
            (FRAC_2_PI.sqrt() * shrink - sigma_norm2) * r - constant,
        )
    };

    let background_pointwise = (bg.n > 0).then(|| pointwise_background_check(u, bg));

    Ok(InequalityReport {
        norms: nm,
        sigma_norm2,
        exponential_lower_bound,
        background_pointwise,
        embedding,
        coercivity,
    })
}

fn pointwise_background_check(u: &ScalarField, bg: &Background) -> PointwiseCheck {
    let n = bg.n as f64;
    let shrink = 1.0 - 4.0 * n / bg.lambda;
    let h = u.grid().spacing();
    let u0 = bg.u0_clamped();
    let mut worst: Option<(usize, InequalityCheck)> = None;
    let mut checked = 0;
    let mut failed = 0;
    for k in 0..u.values().len() {
        if bg.near_vortex(k, h) {
            continue;
        }
        let uk = u.values()[k];
        let (u0k, g0k) = (u0.values()[k], bg.g0.values()[k]);
        let lhs = uk * (uk.exp() * bg.e0.values()[k] + g0k - 1.0);
        let rhs = shrink * uk * uk / (1.0 + uk * uk) - bg.lambda / (16.0 * n) * (u0k + g0k).powi(2);
        let c = InequalityCheck::at_least(lhs, rhs);
        checked += 1;
        if !c.pass {
            failed += 1;
        }
        if worst.is_none_or(|(_, w)| c.slack < w.slack) {
            worst = Some((k, c));
        }
    }
    let (worst_node, worst) = match worst {
        Some((k, c)) => (Some(k), c),
        None => (None, InequalityCheck::at_least(0.0, 0.0)),
    };
    PointwiseCheck {
        worst,
        worst_node,
        nodes_checked: checked,
        nodes_failed: failed,
        pass: failed == 0,
    }
}
