//! Background fields that absorb the logarithmic singularities at the vortex
//! positions, leaving a regular unknown `u = ln f - u0`.
//!
//! `e^{u0}` is stored directly in product form,
//! `E0(x) = prod_a |x - x_a|^2 / (|x - x_a|^2 + lambda)`, so no `-inf` is
//! ever materialized; `g0(x) = sum_a 4 lambda / (|x - x_a|^2 + lambda)^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{laplacian_unchecked, GridSpec, ScalarField};

/// Vortices must sit at least this far inside the box.
pub const POSITION_MARGIN: f64 = 2.0;

/// Floor applied to `E0` before taking `ln E0` in diagnostics.
pub const LOG_FLOOR: f64 = 1e-300;

/// Vorticity, vortex positions, and the background width parameter.
///
/// In config files: `{"n": 2, "positions": [[-2, 0], [2, 0]], "lambda": 16}`.
/// `positions` defaults to `n` coincident vortices at the origin and
/// `lambda` to `max(8n, 8)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSet {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl Default for VortexSet {
    fn default() -> Self {
        Self::vacuum()
    }
}

impl VortexSet {
    pub fn vacuum() -> Self {
        Self {
            n: 0,
            positions: None,
            lambda: None,
        }
    }

    /// `n` vortices stacked at the origin.
    pub fn coincident(n: usize) -> Self {
        Self {
            n,
            positions: None,
            lambda: None,
        }
    }

    pub fn at(positions: Vec<[f64; 2]>) -> Self {
        Self {
            n: positions.len(),
            positions: Some(positions),
            lambda: None,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn default_lambda(n: usize) -> f64 {
        (8 * n).max(8) as f64
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or_else(|| Self::default_lambda(self.n))
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.positions
            .clone()
            .unwrap_or_else(|| vec![[0.0, 0.0]; self.n])
    }

    /// Whether every vortex sits at the origin.
    pub fn all_at_origin(&self) -> bool {
        self.positions().iter().all(|p| *p == [0.0, 0.0])
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let positions = self.positions();
        if positions.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "vorticity n = {} but {} positions given",
                self.n,
                positions.len()
            )));
        }
        if self.n >= 1 {
            let lambda = self.lambda();
            let bound = 4.0 * self.n as f64;
            if !(lambda.is_finite() && lambda > bound) {
                return Err(Error::InvalidParameter(format!(
                    "background parameter must satisfy lambda > 4n = {bound}, got lambda = {lambda}"
                )));
            }
        }
        let reach = grid.half_width() - POSITION_MARGIN;
        for (a, p) in positions.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) || p[0].abs() > reach || p[1].abs() > reach {
                return Err(Error::InvalidPosition(format!(
                    "vortex {a} at ({}, {}) must lie within |x|, |y| <= L - {POSITION_MARGIN} = {reach}",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }
}

/// Background fields on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    pub n: usize,
    pub lambda: f64,
    pub positions: Vec<[f64; 2]>,
    /// `e^{u0}`, in `[0, 1]`, vanishing quadratically at each vortex.
    pub e0: ScalarField,
    /// Analytic `g0`.
    pub g0: ScalarField,
    /// `Lap_h w` with `w = sum_a ln(|x - x_a|^2 + lambda)` and exact ghost
    /// values. Agrees with `g0` to `O(h^2)`; using it as the source makes the
    /// discrete problem for `f` independent of `lambda`.
    pub lattice_g0: ScalarField,
    /// Far-field Dirichlet data for `u` (`f = 1` on the ghost ring, i.e.
    /// `u = -ln E0` there) folded into a load on the boundary nodes, `ghost / h^2`.
    pub boundary_load: ScalarField,
}

impl Background {
    /// The trivial background `E0 = 1`, `g0 = 0`.
    pub fn vacuum(grid: &GridSpec) -> Self {
        Self {
            n: 0,
            lambda: VortexSet::default_lambda(0),
            positions: Vec::new(),
            e0: ScalarField::constant(*grid, 1.0),
            g0: ScalarField::zeros(*grid),
            lattice_g0: ScalarField::zeros(*grid),
            boundary_load: ScalarField::zeros(*grid),
        }
    }

    /// `u0 = ln E0`, floored at `ln(1e-300)` at the vortex nodes.
    pub fn u0_clamped(&self) -> ScalarField {
        self.e0.map(|e| e.max(LOG_FLOOR).ln())
    }

    /// Whether node `k` lies within `radius` of any vortex.
    pub fn near_vortex(&self, k: usize, radius: f64) -> bool {
        let (x, y) = self.e0.grid().node(k);
        self.positions
            .iter()
            .any(|p| (x - p[0]).hypot(y - p[1]) <= radius)
    }
}

fn e0_at(positions: &[[f64; 2]], lambda: f64, x: f64, y: f64) -> f64 {
    positions
        .iter()
        .map(|p| {
            let d2 = (x - p[0]).powi(2) + (y - p[1]).powi(2);
            d2 / (d2 + lambda)
        })
        .product()
}

fn g0_at(positions: &[[f64; 2]], lambda: f64, x: f64, y: f64) -> f64 {
    positions
        .iter()
        .map(|p| {
            let d2 = (x - p[0]).powi(2) + (y - p[1]).powi(2);
            4.0 * lambda / (d2 + lambda).powi(2)
        })
        .sum()
}

fn smooth_log_at(positions: &[[f64; 2]], lambda: f64, x: f64, y: f64) -> f64 {
    positions
        .iter()
        .map(|p| ((x - p[0]).powi(2) + (y - p[1]).powi(2) + lambda).ln())
        .sum()
}

/// Sum over the ghost neighbours of node `k` of `value(ghost position)`.
fn ghost_sum(grid: &GridSpec, k: usize, value: impl Fn(f64, f64) -> f64) -> f64 {
    let n = grid.points_per_side();
    let (ix, iy) = (k % n, k / n);
    let (x, y) = grid.node(k);
    let h = grid.spacing();
    let mut s = 0.0;
    if ix == 0 {
        s += value(x - h, y);
    }
    if ix == n - 1 {
        s += value(x + h, y);
    }
    if iy == 0 {
        s += value(x, y - h);
    }
    if iy == n - 1 {
        s += value(x, y + h);
    }
    s
}

pub fn build_background(vortices: &VortexSet, grid: &GridSpec) -> Result<Background> {
    vortices.validate(grid)?;
    if vortices.n == 0 {
        return Ok(Background::vacuum(grid));
    }
    let positions = vortices.positions();
    let lambda = vortices.lambda();
    let h2 = grid.spacing().powi(2);

    let e0 = ScalarField::from_fn(*grid, |x, y| e0_at(&positions, lambda, x, y));
    let g0 = ScalarField::from_fn(*grid, |x, y| g0_at(&positions, lambda, x, y));

    let w = ScalarField::from_fn(*grid, |x, y| smooth_log_at(&positions, lambda, x, y));
    let mut lattice_g0 = laplacian_unchecked(&w);
    let mut boundary_load = ScalarField::zeros(*grid);
    for k in grid.boundary_indices().collect::<Vec<_>>() {
        lattice_g0.values_mut()[k] +=
            ghost_sum(grid, k, |x, y| smooth_log_at(&positions, lambda, x, y)) / h2;
        boundary_load.values_mut()[k] =
            ghost_sum(grid, k, |x, y| -e0_at(&positions, lambda, x, y).ln()) / h2;
    }

    Ok(Background {
        n: vortices.n,
        lambda,
        positions,
        e0,
        g0,
        lattice_g0,
        boundary_load,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;
    use std::f64::consts::PI;

    #[test]
    fn single_vortex_at_origin() {
        let g = GridSpec::new(12.0, 97).unwrap();
        let bg = build_background(&VortexSet::coincident(1).with_lambda(8.0), &g).unwrap();
        assert_eq!(bg.e0.at_center(), 0.0);
        assert_eq!(bg.g0.at_center(), 0.5);
        assert!(bg.e0.values().iter().all(|&e| (0.0..=1.0).contains(&e)));
        assert!(bg.g0.values().iter().all(|&v| v >= 0.0 && v.is_finite()));
        assert_eq!(bg.u0_clamped().at_center(), LOG_FLOOR.ln());
    }

    #[test]
    fn vacuum_background_is_trivial() {
        let g = GridSpec::new(6.0, 33).unwrap();
        let bg = build_background(&VortexSet::vacuum(), &g).unwrap();
        assert!(bg.e0.values().iter().all(|&v| v == 1.0));
        assert!(bg.g0.values().iter().all(|&v| v == 0.0));
        assert!(bg.boundary_load.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_small_lambda_and_bad_positions() {
        let g = GridSpec::new(12.0, 97).unwrap();
        let err = build_background(&VortexSet::coincident(1).with_lambda(2.0), &g).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(ref m) if m.contains("lambda > 4n")));
        assert!(build_background(&VortexSet::coincident(2).with_lambda(8.0), &g).is_err());
        let err = build_background(&VortexSet::at(vec![[10.5, 0.0]]), &g).unwrap_err();
        assert!(matches!(err, Error::InvalidPosition(_)));
        let mismatched = VortexSet {
            n: 2,
            positions: Some(vec![[0.0, 0.0]]),
            lambda: None,
        };
        assert!(build_background(&mismatched, &g).is_err());
    }

    #[test]
    fn default_lambda() {
        assert_eq!(VortexSet::coincident(0).lambda(), 8.0);
        assert_eq!(VortexSet::coincident(1).lambda(), 8.0);
        assert_eq!(VortexSet::coincident(3).lambda(), 24.0);
    }

    #[test]
    fn quadratic_zero_at_vortex() {
        let lambda = 8.0;
        let p = [[0.3, -0.7]];
        for d in [1e-2, 1e-3, 1e-4] {
            let ratio = e0_at(&p, lambda, 0.3 + d, -0.7) / (d * d);
            assert!((ratio - 1.0 / (d * d + lambda)).abs() < 1e-12);
        }
    }

    #[test]
    fn g0_integral_is_box_truncated_4pi() {
        // Over a disk of radius R the integral is 4 pi R^2 / (R^2 + lambda),
        // so a large box is needed for 4 pi itself.
        let g = GridSpec::new(60.0, 481).unwrap();
        let bg = build_background(&VortexSet::coincident(1).with_lambda(8.0), &g).unwrap();
        let total = integrate(&bg.g0).unwrap();
        assert!((total - 4.0 * PI).abs() < 0.005 * 4.0 * PI, "{total}");
    }

    #[test]
    fn lattice_source_tracks_analytic_g0() {
        let err = |n: usize| {
            let g = GridSpec::new(8.0, n).unwrap();
            let bg = build_background(&VortexSet::at(vec![[0.5, 0.25]]), &g).unwrap();
            bg.lattice_g0
                .zip_map(&bg.g0, |a, b| a - b)
                .unwrap()
                .sup_norm()
        };
        let (coarse, fine) = (err(65), err(129));
        assert!(coarse < 2e-2, "{coarse}");
        assert!((coarse / fine - 4.0).abs() < 0.5, "ratio {}", coarse / fine);
    }

    #[test]
    fn translation_covariance() {
        let g = GridSpec::new(8.0, 65).unwrap(); // h = 0.25
        let a = build_background(&VortexSet::at(vec![[0.0, 0.0], [1.0, 0.5]]), &g).unwrap();
        let b = build_background(&VortexSet::at(vec![[0.5, -0.25], [1.5, 0.25]]), &g).unwrap();
        // shift by (+2, -1) nodes
        for iy in 1..63 {
            for ix in 0..62 {
                let ka = g.index(ix, iy);
                let kb = g.index(ix + 2, iy - 1);
                assert!((a.e0.values()[ka] - b.e0.values()[kb]).abs() < 1e-14);
                assert!((a.g0.values()[ka] - b.g0.values()[kb]).abs() < 1e-14);
            }
        }
    }
}
