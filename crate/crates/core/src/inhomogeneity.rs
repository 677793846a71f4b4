//! Impurity profiles `sigma(x)` and the admissibility condition on their
//! `L^2` norm.

use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate, GridSpec, ScalarField};

/// Profiles must fall below this fraction of their peak on the box boundary.
pub const BOUNDARY_DECAY: f64 = 1e-6;

/// Upper bound `sqrt(2/pi)` on `||sigma||_2` under which existence and
/// uniqueness are guaranteed.
pub fn condition_threshold() -> f64 {
    FRAC_2_PI.sqrt()
}

/// One Gaussian well `-beta * exp(-alpha^2 |x - center|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub center: [f64; 2],
}

impl GaussianTerm {
    pub fn at_origin(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            center: [0.0, 0.0],
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        -self.beta * (-self.alpha * self.alpha * (dx * dx + dy * dy)).exp()
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InadmissibleProfile(format!(
                "gaussian alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !self.beta.is_finite() || !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::InadmissibleProfile(
                "gaussian beta and center must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Impurity profile. In config files this is a JSON object tagged by
/// `"type"`, e.g. `{"type": "gaussian", "alpha": 1.0, "beta": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SigmaModel {
    #[default]
    Zero,
    Gaussian {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Mixture {
        terms: Vec<GaussianTerm>,
    },
    /// Samples on their own grid, bilinearly interpolated and zero outside it.
    Tabulated {
        grid: GridSpec,
        values: Vec<f64>,
    },
}

impl SigmaModel {
    pub fn gaussian(alpha: f64, beta: f64) -> Self {
        SigmaModel::Gaussian {
            alpha,
            beta,
            center: [0.0, 0.0],
        }
    }

    /// The Gaussian terms making up the profile, if it is a sum of Gaussians.
    pub fn gaussian_terms(&self) -> Option<Vec<GaussianTerm>> {
        match self {
            SigmaModel::Zero => Some(Vec::new()),
            SigmaModel::Gaussian {
                alpha,
                beta,
                center,
            } => Some(vec![GaussianTerm {
                alpha: *alpha,
                beta: *beta,
                center: *center,
            }]),
            SigmaModel::Mixture { terms } => Some(terms.clone()),
            SigmaModel::Tabulated { .. } => None,
        }
    }

    /// Whether the profile depends on `|x|` only.
    pub fn is_radial(&self) -> bool {
        match self.gaussian_terms() {
            Some(terms) => terms.iter().all(|t| t.center == [0.0, 0.0]),
            None => false,
        }
    }

    /// Radial profile `sigma(r)`; `None` for profiles that are not radial.
    pub fn radial_fn(&self) -> Option<impl Fn(f64) -> f64> {
        if !self.is_radial() {
            return None;
        }
        let terms = self.gaussian_terms()?;
        Some(move |r: f64| terms.iter().map(|t| t.eval(r, 0.0)).sum())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SigmaModel::Tabulated { grid, values } => {
                if values.len() != grid.len() {
                    return Err(Error::InadmissibleProfile(format!(
                        "tabulated profile needs {} samples, got {}",
                        grid.len(),
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InadmissibleProfile(
                        "tabulated samples must be finite".into(),
                    ));
                }
                Ok(())
            }
            other => other
                .gaussian_terms()
                .unwrap_or_default()
                .iter()
                .try_for_each(GaussianTerm::validate),
        }
    }

    /// Closed-form `||sigma||_2` over the whole plane for sums of Gaussians.
    pub fn closed_form_norm2(&self) -> Option<f64> {
        let terms = self.gaussian_terms()?;
        let mut sq = 0.0;
        for a in &terms {
            for b in &terms {
                let (a2, b2) = (a.alpha * a.alpha, b.alpha * b.alpha);
                let dx = a.center[0] - b.center[0];
                let dy = a.center[1] - b.center[1];
                let overlap = (-(a2 * b2) / (a2 + b2) * (dx * dx + dy * dy)).exp();
                sq += a.beta * b.beta * PI / (a2 + b2) * overlap;
            }
        }
        Some(sq.max(0.0).sqrt())
    }
}

/// Samples the profile on `grid`, rejecting profiles that have not decayed
/// by the box boundary.
pub fn eval_sigma(model: &SigmaModel, grid: &GridSpec) -> Result<ScalarField> {
    model.validate()?;
    let field = match model {
        SigmaModel::Zero => ScalarField::zeros(*grid),
        SigmaModel::Tabulated {
            grid: table,
            values,
        } => ScalarField::from_fn(*grid, |x, y| bilinear(table, values, x, y)),
        other => {
            let terms = other.gaussian_terms().unwrap_or_default();
            ScalarField::from_fn(*grid, |x, y| terms.iter().map(|t| t.eval(x, y)).sum())
        }
    };
    field.ensure_finite()?;

    let peak = field.sup_norm();
    let edge = grid
        .boundary_indices()
        .map(|k| field.values()[k].abs())
        .fold(0.0, f64::max);
    if peak > 0.0 && edge >= BOUNDARY_DECAY * peak {
        return Err(Error::InadmissibleProfile(format!(
            "profile has not decayed at the box boundary: max |sigma| on the edge is {edge:.3e}, \
             peak {peak:.3e} (ratio must stay below {BOUNDARY_DECAY:e}); enlarge L"
        )));
    }
    Ok(field)
}

fn bilinear(table: &GridSpec, values: &[f64], x: f64, y: f64) -> f64 {
    let n = table.points_per_side();
    let h = table.spacing();
    let l = table.half_width();
    let fx = (x + l) / h;
    let fy = (y + l) / h;
    let last = (n - 1) as f64;
    if !(0.0..=last).contains(&fx) || !(0.0..=last).contains(&fy) {
        return 0.0;
    }
    let ix = (fx.floor() as usize).min(n - 2);
    let iy = (fy.floor() as usize).min(n - 2);
    let tx = fx - ix as f64;
    let ty = fy - iy as f64;
    let v = |i: usize, j: usize| values[table.index(i, j)];
    (1.0 - tx) * (1.0 - ty) * v(ix, iy)
        + tx * (1.0 - ty) * v(ix + 1, iy)
        + (1.0 - tx) * ty * v(ix, iy + 1)
        + tx * ty * v(ix + 1, iy + 1)
}

/// Status of the `||sigma||_2 < sqrt(2/pi)` admissibility condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionMargin {
    /// `||sigma||_2` by quadrature on the grid.
    pub norm2: f64,
    /// Whole-plane closed form, when the profile is a sum of Gaussians.
    pub closed_form_norm2: Option<f64>,
    pub threshold: f64,
    /// `threshold - norm2`; negative means the sufficient condition fails.
    pub margin: f64,
    pub satisfied: bool,
}

pub fn condition_margin(model: &SigmaModel, grid: &GridSpec) -> Result<ConditionMargin> {
    let sigma = eval_sigma(model, grid)?;
    Ok(margin_of_field(&sigma, model.closed_form_norm2()))
}

pub(crate) fn margin_of_field(sigma: &ScalarField, closed_form: Option<f64>) -> ConditionMargin {
    let norm2 = integrate(&sigma.map(|v| v * v))
        .expect("sigma is finite")
        .sqrt();
    let threshold = condition_threshold();
    let margin = threshold - norm2;
    ConditionMargin {
        norm2,
        closed_form_norm2: closed_form,
        threshold,
        margin,
        satisfied: margin > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(l: f64, n: usize) -> GridSpec {
        GridSpec::new(l, n).unwrap()
    }

    #[test]
    fn gaussian_samples() {
        let g = grid(12.0, 97);
        let s = eval_sigma(&SigmaModel::gaussian(1.0, 0.5), &g).unwrap();
        assert_eq!(s.at_center(), -0.5);
        // r = 4 is node 48 + 16 along x (h = 0.25)
        let v = s.at(48 + 16, 48);
        assert!((v - (-0.5 * (-16.0f64).exp())).abs() < 1e-20);
        assert!((v + 5.6e-8).abs() < 1e-9);

        let z = eval_sigma(&SigmaModel::Zero, &g).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_undecayed_or_invalid_profiles() {
        let g = grid(3.0, 33);
        assert!(matches!(
            eval_sigma(&SigmaModel::gaussian(0.2, 0.5), &g),
            Err(Error::InadmissibleProfile(_))
        ));
        assert!(eval_sigma(&SigmaModel::gaussian(0.0, 0.5), &g).is_err());
        assert!(eval_sigma(&SigmaModel::gaussian(-1.0, 0.5), &g).is_err());
        let bad = SigmaModel::Tabulated {
            grid: g,
            values: vec![0.0; 5],
        };
        assert!(eval_sigma(&bad, &g).is_err());
    }

    #[test]
    fn margins_for_reference_profiles() {
        let g = grid(12.0, 385);
        let zero = condition_margin(&SigmaModel::Zero, &g).unwrap();
        assert_eq!(zero.norm2, 0.0);
        assert!(zero.satisfied);
        assert!((zero.margin - 0.797_884_560_802_865_4).abs() < 1e-15);

        // ||sigma||_2 = |beta| sqrt(pi/2) / alpha
        let half = condition_margin(&SigmaModel::gaussian(1.0, 0.5), &g).unwrap();
        assert!((half.norm2 - 0.626_657).abs() < 1e-5);
        assert!((half.margin - 0.171_228).abs() < 1e-5);
        assert!(half.satisfied);

        let one = condition_margin(&SigmaModel::gaussian(1.0, 1.0), &g).unwrap();
        assert!((one.norm2 - 1.253_314).abs() < 1e-5);
        assert!(!one.satisfied);
    }

    #[test]
    fn threshold_constant() {
        assert!((condition_threshold() - (2.0 / PI).sqrt()).abs() < 1e-16);
    }

    #[test]
    fn mixture_closed_form_matches_quadrature() {
        let model = SigmaModel::Mixture {
            terms: vec![
                GaussianTerm {
                    alpha: 0.8,
                    beta: 0.2,
                    center: [1.5, -1.0],
                },
                GaussianTerm {
                    alpha: 1.3,
                    beta: -0.1,
                    center: [-2.0, 0.5],
                },
            ],
        };
        let m = condition_margin(&model, &grid(12.0, 241)).unwrap();
        let cf = m.closed_form_norm2.unwrap();
        assert!((m.norm2 - cf).abs() < 1e-6 * cf);
    }

    #[test]
    fn tabulated_reproduces_its_samples() {
        let table = grid(6.0, 49);
        let model_g = SigmaModel::gaussian(1.0, 0.3);
        let samples = eval_sigma(&model_g, &table).unwrap();
        let tab = SigmaModel::Tabulated {
            grid: table,
            values: samples.values().to_vec(),
        };
        // same nodes: exact
        let again = eval_sigma(&tab, &table).unwrap();
        assert_eq!(again, samples);
        // finer grid: bilinear error O(h^2)
        let fine = grid(8.0, 129);
        let interp = eval_sigma(&tab, &fine).unwrap();
        let exact = eval_sigma(&model_g, &fine).unwrap();
        let diff = interp.zip_map(&exact, |a, b| a - b).unwrap().sup_norm();
        assert!(diff < 0.3 * 0.25 * 0.25, "bilinear error {diff}");
    }

    #[test]
    fn serde_shape() {
        let m: SigmaModel =
            serde_json::from_str(r#"{"type": "gaussian", "alpha": 1.0, "beta": 0.5}"#).unwrap();
        assert_eq!(m, SigmaModel::gaussian(1.0, 0.5));
        let z: SigmaModel = serde_json::from_str(r#"{"type": "zero"}"#).unwrap();
        assert_eq!(z, SigmaModel::Zero);
    }
}
