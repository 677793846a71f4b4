//! Uniform finite-difference discretization of the truncated plane.
//!
//! The plane is cut to the square `[-L, L]^2` and sampled at `N x N` nodes
//! (`N` odd, so the origin is a node). Every node carries an unknown; the
//! ring of ghost nodes one spacing outside the box holds the Dirichlet data,
//! which is zero unless stated otherwise.
//!
//! All reductions go through [`pairwise_sum`], so results do not depend on
//! how the nodes were visited.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of nodes per side.
pub const MIN_POINTS: usize = 33;

/// Box `[-L, L]^2` sampled by `N x N` nodes. Serialized as `{"L": .., "N": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    #[serde(rename = "L")]
    half_width: f64,
    #[serde(rename = "N")]
    points: usize,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSpec::new(raw.half_width, raw.points)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid {
            half_width: g.half_width,
            points: g.points,
        }
    }
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width L must be positive and finite, got {half_width}"
            )));
        }
        if points < MIN_POINTS || points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per side N must be odd and >= {MIN_POINTS}, got {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn points_per_side(&self) -> usize {
        self.points
    }

    /// Node spacing `h = 2L / (N - 1)`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Total number of nodes, `N^2`.
    #[inline]
    pub fn len(&self) -> usize {
        self.points * self.points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of the `i`-th node along either axis. The central node sits
    /// exactly at zero.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        let c = (self.points / 2) as f64;
        (i as f64 - c) * self.spacing()
    }

    /// Row-major index: rows run along `y`, columns along `x`.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.points + ix
    }

    #[inline]
    pub fn node(&self, k: usize) -> (f64, f64) {
        (self.coord(k % self.points), self.coord(k / self.points))
    }

    /// Index of the node at the origin.
    #[inline]
    pub fn center_index(&self) -> usize {
        let c = self.points / 2;
        self.index(c, c)
    }

    /// Whether node `k` lies on the outermost ring of the box.
    #[inline]
    pub fn is_boundary(&self, k: usize) -> bool {
        let (ix, iy) = (k % self.points, k / self.points);
        let last = self.points - 1;
        ix == 0 || iy == 0 || ix == last || iy == last
    }

    /// Indices of the outermost ring of nodes.
    pub fn boundary_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.is_boundary(k))
    }

    /// Trapezoidal weight of node `k` (1 inside, 1/2 on edges, 1/4 at corners).
    #[inline]
    fn trapezoid_weight(&self, k: usize) -> f64 {
        let last = self.points - 1;
        let edge = |i: usize| if i == 0 || i == last { 0.5 } else { 1.0 };
        edge(k % self.points) * edge(k / self.points)
    }
}

/// A real value at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.node(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    /// Wraps row-major samples, rejecting wrong lengths and non-finite entries.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let field = Self { grid, values };
        field.ensure_finite()?;
        Ok(field)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    /// Value at the origin node.
    pub fn at_center(&self) -> f64 {
        self.values[self.grid.center_index()]
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(Error::InvalidField(format!(
                "non-finite value {} at node {k}",
                self.values[k]
            ))),
            None => Ok(()),
        }
    }

    pub fn ensure_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Node-wise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.ensure_same_grid(other)?;
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &ScalarField) {
        debug_assert_eq!(self.grid, x.grid);
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scaled(&self, a: f64) -> ScalarField {
        self.map(|v| a * v)
    }

    /// Largest absolute node value.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Node-sum pairing `h^2 * sum(a * b)`: the duality under which the
    /// residual is the negated gradient of the discrete action.
    pub fn pairing(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let h = self.grid.spacing();
        let products: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        h * h * pairwise_sum(&products)
    }
}

/// Pairwise (cascade) summation with a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Five-point Laplacian with zero ghost values outside the box.
pub fn laplacian_apply(u: &ScalarField) -> Result<ScalarField> {
    u.ensure_finite()?;
    Ok(laplacian_unchecked(u))
}

pub(crate) fn laplacian_unchecked(u: &ScalarField) -> ScalarField {
    let grid = u.grid;
    let n = grid.points;
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let v = &u.values;
    let mut out = vec![0.0; v.len()];
    for iy in 0..n {
        for ix in 0..n {
            let k = iy * n + ix;
            let west = if ix > 0 { v[k - 1] } else { 0.0 };
            let east = if ix + 1 < n { v[k + 1] } else { 0.0 };
            let south = if iy > 0 { v[k - n] } else { 0.0 };
            let north = if iy + 1 < n { v[k + n] } else { 0.0 };
            out[k] = (east + west + north + south - 4.0 * v[k]) * inv_h2;
        }
    }
    ScalarField { grid, values: out }
}

/// Trapezoidal rule over the box.
pub fn integrate(w: &ScalarField) -> Result<f64> {
    w.ensure_finite()?;
    Ok(integrate_unchecked(w))
}

pub(crate) fn integrate_unchecked(w: &ScalarField) -> f64 {
    let grid = w.grid;
    let h = grid.spacing();
    let weighted: Vec<f64> = w
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| grid.trapezoid_weight(k) * v)
        .collect();
    h * h * pairwise_sum(&weighted)
}

/// The three norms used by the existence argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub l3: f64,
    /// `(||u||_2^2 + ||grad u||_2^2)^(1/2)`.
    pub sobolev12: f64,
}

/// `L^2`, `L^3` and `W^{1,2}` norms. The gradient uses forward differences
/// with zero ghost values.
pub fn norms(u: &ScalarField) -> Result<Norms> {
    u.ensure_finite()?;
    let sq = u.map(|v| v * v);
    let cube = u.map(|v| v.abs().powi(3));
    let l2_sq = integrate_unchecked(&sq);
    let grad_sq = integrate_unchecked(&forward_gradient_sq(u));
    Ok(Norms {
        l2: l2_sq.sqrt(),
        l3: integrate_unchecked(&cube).cbrt(),
        sobolev12: (l2_sq + grad_sq).sqrt(),
    })
}

/// `|grad u|^2` per node from forward differences, zero past the box.
pub(crate) fn forward_gradient_sq(u: &ScalarField) -> ScalarField {
    let grid = u.grid;
    let n = grid.points;
    let h = grid.spacing();
    let v = &u.values;
    let values = (0..v.len())
        .map(|k| {
            let (ix, iy) = (k % n, k / n);
            let east = if ix + 1 < n { v[k + 1] } else { 0.0 };
            let north = if iy + 1 < n { v[k + n] } else { 0.0 };
            let dx = (east - v[k]) / h;
            let dy = (north - v[k]) / h;
            dx * dx + dy * dy
        })
        .collect();
    ScalarField { grid, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_even_or_small_grids() {
        assert!(GridSpec::new(10.0, 32).is_err());
        assert!(GridSpec::new(10.0, 31).is_err());
        assert!(GridSpec::new(0.0, 33).is_err());
        assert!(GridSpec::new(f64::NAN, 33).is_err());
        let g = GridSpec::new(12.0, 513).unwrap();
        assert_eq!(g.spacing(), 24.0 / 512.0);
        assert_eq!(g.coord(256), 0.0);
        assert_eq!(g.node(g.center_index()), (0.0, 0.0));
    }

    #[test]
    fn stencil_is_exact_on_quadratics() {
        // h = 1 keeps every node coordinate exactly representable.
        let g = GridSpec::new(16.0, 33).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x * x + y * y);
        let lap = laplacian_apply(&u).unwrap();
        for iy in 1..32 {
            for ix in 1..32 {
                assert_eq!(lap.at(ix, iy), 4.0);
            }
        }
        let g = GridSpec::new(12.0, 101).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x * x + y * y);
        let lap = laplacian_apply(&u).unwrap();
        for iy in 1..100 {
            for ix in 1..100 {
                assert!((lap.at(ix, iy) - 4.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_has_zero_interior_laplacian() {
        let g = GridSpec::new(5.0, 41).unwrap();
        let lap = laplacian_apply(&ScalarField::constant(g, 3.7)).unwrap();
        for iy in 1..40 {
            for ix in 1..40 {
                assert!(lap.at(ix, iy).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn laplacian_rejects_non_finite() {
        let g = GridSpec::new(5.0, 33).unwrap();
        let mut u = ScalarField::zeros(g);
        u.values_mut()[7] = f64::NAN;
        assert!(matches!(laplacian_apply(&u), Err(Error::InvalidField(_))));
        assert!(integrate(&u).is_err());
        assert!(norms(&u).is_err());
        assert!(ScalarField::from_values(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn laplacian_converges_at_second_order() {
        // Eigenfunction of the continuum Dirichlet Laplacian on [-L, L]^2
        // with eigenvalue -2 (pi/L)^2; the ghost ring sits one spacing
        // outside, where sin(pi x / L) is O(h) rather than zero, so compare
        // on the interior disk only.
        let l = 4.0;
        let err = |n: usize| {
            let g = GridSpec::new(l, n).unwrap();
            let k = PI / l;
            let u = ScalarField::from_fn(g, |x, y| (k * x).sin() * (k * y).sin());
            let lap = laplacian_apply(&u).unwrap();
            (0..g.len())
                .filter(|&i| !g.is_boundary(i))
                .map(|i| (lap.values()[i] + 2.0 * k * k * u.values()[i]).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(65), err(129), err(257));
        let p1 = (e1 / e2).log2();
        let p2 = (e2 / e3).log2();
        assert!((p1 - 2.0).abs() < 0.1, "order {p1}");
        assert!((p2 - 2.0).abs() < 0.1, "order {p2}");
    }

    #[test]
    fn trapezoid_integrates_constants_and_gaussians() {
        let g = GridSpec::new(3.0, 61).unwrap();
        let one = integrate(&ScalarField::constant(g, 1.0)).unwrap();
        assert!((one - 36.0).abs() < 1e-12 * 36.0);
        assert_eq!(integrate(&ScalarField::zeros(g)).unwrap(), 0.0);

        let g = GridSpec::new(10.0, 513).unwrap();
        let w = ScalarField::from_fn(g, |x, y| (-(x * x + y * y)).exp());
        let val = integrate(&w).unwrap();
        assert!((val - PI).abs() < 1e-4 * PI);
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = GridSpec::new(10.0, 513).unwrap();
        let z = norms(&ScalarField::zeros(g)).unwrap();
        assert_eq!((z.l2, z.l3, z.sobolev12), (0.0, 0.0, 0.0));

        let c = 0.7;
        let n = norms(&ScalarField::constant(g, c)).unwrap();
        assert!((n.l2 - 2.0 * 10.0 * c).abs() < 1e-10 * n.l2);

        let u = ScalarField::from_fn(g, |x, y| (-(x * x + y * y)).exp());
        let n = norms(&u).unwrap();
        assert!((n.l2 - (PI / 2.0).sqrt()).abs() < 1e-3);
        // l3^3 = pi/3, grad^2 = pi
        assert!((n.l3 - (PI / 3.0).cbrt()).abs() < 1e-3);
        assert!((n.sobolev12 - (PI / 2.0 + PI).sqrt()).abs() < 1e-2);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let direct: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - direct).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
