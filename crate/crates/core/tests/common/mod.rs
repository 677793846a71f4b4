#![allow(dead_code)]

use bps_vortex::{GridSpec, ScalarField};
use proptest::prelude::*;
use rand::Rng;

/// A sum of Gaussian bumps `a exp(-|x - c|^2 / w^2)`.
#[derive(Debug, Clone)]
pub struct Bumps(pub Vec<(f64, f64, f64, f64)>);

impl Bumps {
    pub fn field(&self, grid: GridSpec) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| {
            self.0
                .iter()
                .map(|&(a, cx, cy, w)| a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (w * w)).exp())
                .sum()
        })
    }
}

pub fn bumps(amplitude: f64, reach: f64) -> impl Strategy<Value = Bumps> {
    prop::collection::vec(
        (
            -amplitude..amplitude,
            -reach..reach,
            -reach..reach,
            0.5..1.5f64,
        ),
        1..5,
    )
    .prop_map(Bumps)
}

pub fn random_bumps(rng: &mut impl Rng, amplitude: f64, reach: f64) -> Bumps {
    let count = rng.gen_range(1..5);
    Bumps(
        (0..count)
            .map(|_| {
                (
                    rng.gen_range(-amplitude..amplitude),
                    rng.gen_range(-reach..reach),
                    rng.gen_range(-reach..reach),
                    rng.gen_range(0.5..1.5),
                )
            })
            .collect(),
    )
}

pub fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
