//! Physical quantities of a solved configuration.
//!
//! With `f = |phi|^2 / v0^2 = e^u E0`, the dimensionless magnetic field is
//! `b = 1 + sigma - f` (so that `B = g v0^2 b`), the flux is `int b` over the
//! rescaled plane, and the BPS energy is `flux / 2` in units of `v0^2`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{residual, ProblemSetup};
use crate::grid::{integrate, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    pub f: ScalarField,
    pub b: ScalarField,
    pub summary: ObservableSummary,
}

/// The scalar part of an [`ObservableSet`], as written to reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSummary {
    pub vorticity: usize,
    /// `int (1 + sigma - f)`.
    pub flux: f64,
    /// `4 pi n`, the quantized value of `flux`.
    pub flux_expected: f64,
    /// `flux / 2`.
    pub energy_dimless: f64,
    pub sup_residual: f64,
    pub f_center: f64,
    pub f_min: f64,
    pub f_at_vortices: Vec<f64>,
    /// Largest `|f - 1|` on the outermost ring of nodes.
    pub f_boundary_max_dev: f64,
    pub sigma_integral: f64,
    pub sigma_abs_integral: f64,
    pub sigma_norm2: f64,
    /// `int (f - 1)`.
    pub f_minus_one_integral: f64,
}

pub fn compute_observables(u: &ScalarField, p: &ProblemSetup) -> Result<ObservableSet> {
    let r = residual(u, p)?;
    let bg = p.background();
    let sigma = p.sigma();
    let f = u.zip_map(&bg.e0, |uk, e| uk.exp() * e)?;
    let b = ScalarField::from_values(
        *u.grid(),
        sigma
            .values()
            .iter()
            .zip(f.values())
            .map(|(s, fk)| 1.0 + s - fk)
            .collect(),
    )?;
    let flux = integrate(&b)?;
    let grid = u.grid();
    let f_at_vortices = bg
        .positions
        .iter()
        .map(|pos| {
            let e0: f64 = bg
                .positions
                .iter()
                .map(|q| {
                    let d2 = (pos[0] - q[0]).powi(2) + (pos[1] - q[1]).powi(2);
                    d2 / (d2 + bg.lambda)
                })
                .product();
            interpolate(u, pos[0], pos[1]).exp() * e0
        })
        .collect();
    let f_boundary_max_dev = grid
        .boundary_indices()
        .map(|k| (f.values()[k] - 1.0).abs())
        .fold(0.0, f64::max);
    let summary = ObservableSummary {
        vorticity: bg.n,
        flux,
        flux_expected: 4.0 * PI * bg.n as f64,
        energy_dimless: flux / 2.0,
        sup_residual: r.sup_norm(),
        f_center: f.at_center(),
        f_min: f.values().iter().copied().fold(f64::INFINITY, f64::min),
        f_at_vortices,
        f_boundary_max_dev,
        sigma_integral: integrate(sigma)?,
        sigma_abs_integral: integrate(&sigma.map(f64::abs))?,
        sigma_norm2: integrate(&sigma.map(|s| s * s))?.sqrt(),
        f_minus_one_integral: integrate(&f.map(|v| v - 1.0))?,
    };
    Ok(ObservableSet { f, b, summary })
}

/// Bilinear interpolation of a field at a point inside the box.
pub fn interpolate(u: &ScalarField, x: f64, y: f64) -> f64 {
    let g = u.grid();
    let n = g.points_per_side();
    let h = g.spacing();
    let l = g.half_width();
    let fx = ((x + l) / h).clamp(0.0, (n - 1) as f64);
    let fy = ((y + l) / h).clamp(0.0, (n - 1) as f64);
    let ix = (fx.floor() as usize).min(n - 2);
    let iy = (fy.floor() as usize).min(n - 2);
    let (tx, ty) = (fx - ix as f64, fy - iy as f64);
    (1.0 - tx) * (1.0 - ty) * u.at(ix, iy)
        + tx * (1.0 - ty) * u.at(ix + 1, iy)
        + (1.0 - tx) * ty * u.at(ix, iy + 1)
        + tx * ty * u.at(ix + 1, iy + 1)
}

/// Admissibility condition restated in the original variables:
/// `int |sigma_phys|^2 d^2x < v0^2 / (pi g^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCondition {
    pub sigma_sq_integral: f64,
    pub bound: f64,
    pub satisfied: bool,
}

pub fn physical_condition(sigma_norm2: f64, g: f64, v0: f64) -> Result<PhysicalCondition> {
    check_couplings(g, v0)?;
    // sigma_phys = v0^2 sigma, d^2x = d^2x~ / (2 g^2 v0^2)
    let sigma_sq_integral = v0 * v0 * sigma_norm2 * sigma_norm2 / (2.0 * g * g);
    let bound = v0 * v0 / (PI * g * g);
    Ok(PhysicalCondition {
        sigma_sq_integral,
        bound,
        satisfied: sigma_sq_integral < bound,
    })
}

fn check_couplings(g: f64, v0: f64) -> Result<()> {
    if !(g.is_finite() && g > 0.0 && v0.is_finite() && v0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coupling g and vacuum value v0 must be positive, got g = {g}, v0 = {v0}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalReport {
    pub g: f64,
    pub v0: f64,
    /// `Phi_B = flux / (2 g)`.
    pub magnetic_flux: f64,
    /// `E = v0^2 * energy_dimless`, equal to `g v0^2 Phi_B`.
    pub energy: f64,
    /// Physical length of one rescaled unit, `1 / (sqrt(2) g v0)`.
    pub length_unit: f64,
    /// `sigma_phys = v0^2 sigma`.
    pub sigma_scale: f64,
    pub condition: PhysicalCondition,
}

pub fn to_physical(obs: &ObservableSummary, g: f64, v0: f64) -> Result<PhysicalReport> {
    check_couplings(g, v0)?;
    Ok(PhysicalReport {
        g,
        v0,
        magnetic_flux: obs.flux / (2.0 * g),
        energy: v0 * v0 * obs.energy_dimless,
        length_unit: 1.0 / (SQRT_2 * g * v0),
        sigma_scale: v0 * v0,
        condition: physical_condition(obs.sigma_norm2, g, v0)?,
    })
}
