mod common;

use std::f64::consts::{FRAC_2_PI, PI};

use bps_vortex::functional::background_defect_integral;
use bps_vortex::{
    action, check_inequalities, condition_margin, condition_threshold, hessian_apply,
    laplacian_apply, norms, residual, GridSpec, ProblemSetup, ScalarField, SigmaModel, VortexSet,
};
use common::{bumps, sup_diff, Bumps};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(8.0, 49).unwrap()
}

fn vacuum(alpha: f64, beta: f64) -> ProblemSetup {
    ProblemSetup::new(
        grid(),
        &SigmaModel::gaussian(alpha, beta),
        &VortexSet::vacuum(),
    )
    .unwrap()
}

fn single_vortex() -> ProblemSetup {
    ProblemSetup::new(
        grid(),
        &SigmaModel::gaussian(0.7, 0.1),
        &VortexSet::at(vec![[0.5, -0.25]]),
    )
    .unwrap()
}

fn setups() -> [ProblemSetup; 2] {
    [vacuum(0.6, 0.2), single_vortex()]
}

/// Smallest eigenvalue of the discrete Dirichlet `-Laplacian`.
fn poincare_constant(g: &GridSpec) -> f64 {
    let h = g.spacing();
    let side = 2.0 * g.half_width() + 2.0 * h;
    2.0 * (4.0 / (h * h)) * (PI * h / (2.0 * side)).sin().powi(2)
}

proptest! {
    #[test]
    fn laplacian_is_linear(u in bumps(3.0, 4.0), v in bumps(3.0, 4.0), a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let g = grid();
        let (u, v) = (u.field(g), v.field(g));
        let mut combo = u.scaled(a);
        combo.axpy(b, &v);
        let lhs = laplacian_apply(&combo).unwrap();
        let mut rhs = laplacian_apply(&u).unwrap().scaled(a);
        rhs.axpy(b, &laplacian_apply(&v).unwrap());
        let scale = lhs.sup_norm().max(1.0);
        prop_assert!(sup_diff(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn laplacian_is_symmetric_and_nonpositive(u in bumps(3.0, 6.0), v in bumps(3.0, 6.0)) {
        let g = grid();
        let (u, v) = (u.field(g), v.field(g));
        let (lu, lv) = (laplacian_apply(&u).unwrap(), laplacian_apply(&v).unwrap());
        let (uv, vu) = (v.pairing(&lu), u.pairing(&lv));
        prop_assert!((uv - vu).abs() <= 1e-10 * uv.abs().max(vu.abs()).max(1e-300));
        prop_assert!(u.pairing(&lu) <= 0.0);
    }

    #[test]
    fn l2_norm_is_dominated_by_sobolev_norm(u in bumps(10.0, 6.0)) {
        let n = norms(&u.field(grid())).unwrap();
        prop_assert!(n.l2 >= 0.0 && n.l2 <= n.sobolev12);
    }

    #[test]
    fn gaussian_margin_scales_linearly_in_beta(alpha in 0.4..2.0f64, beta in -3.0..3.0f64) {
        prop_assume!(beta.abs() > 1e-6);
        let g = GridSpec::new(12.0, 129).unwrap();
        let unit = condition_margin(&SigmaModel::gaussian(alpha, 1.0), &g).unwrap();
        let m = condition_margin(&SigmaModel::gaussian(alpha, beta), &g).unwrap();
        prop_assert!((m.norm2 - beta.abs() * unit.norm2).abs() <= 1e-10 * unit.norm2 * beta.abs().max(1e-3));
        let closed = m.closed_form_norm2.unwrap();
        prop_assert!((closed - beta.abs() * (PI / 2.0).sqrt() / alpha).abs() <= 1e-12 * closed.max(1e-300));
        prop_assert_eq!(m.threshold, FRAC_2_PI.sqrt());
        prop_assert_eq!(m.satisfied, m.norm2 < condition_threshold());
    }

    #[test]
    fn gradient_matches_central_differences(u in bumps(2.0, 4.0), h in bumps(1.0, 4.0)) {
        for p in setups() {
            let (u, h) = (u.field(*p.grid()), h.field(*p.grid()));
            let eps = 1e-5;
            let mut plus = u.clone();
            plus.axpy(eps, &h);
            let mut minus = u.clone();
            minus.axpy(-eps, &h);
            let fd = (action(&plus, &p).unwrap() - action(&minus, &p).unwrap()) / (2.0 * eps);
            let exact = -residual(&u, &p).unwrap().pairing(&h);
            prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "fd {} vs {}", fd, exact);
        }
    }

    #[test]
    fn hessian_matches_residual_differences(u in bumps(2.0, 4.0), h in bumps(1.0, 4.0)) {
        for p in setups() {
            let (u, h) = (u.field(*p.grid()), h.field(*p.grid()));
            let eps = 1e-5;
            let mut plus = u.clone();
            plus.axpy(eps, &h);
            let mut minus = u.clone();
            minus.axpy(-eps, &h);
            let mut fd = residual(&plus, &p).unwrap();
            fd.axpy(-1.0, &residual(&minus, &p).unwrap());
            let fd = fd.scaled(1.0 / (2.0 * eps));
            let hh = hessian_apply(&u, &h, &p).unwrap();
            prop_assert!(sup_diff(&fd, &hh.scaled(-1.0)) <= 1e-5);
        }
    }

    #[test]
    fn hessian_is_positive_definite(u in bumps(3.0, 6.0), h in bumps(1.0, 6.0)) {
        for p in setups() {
            let (u, h) = (u.field(*p.grid()), h.field(*p.grid()));
            prop_assume!(h.sup_norm() > 1e-8);
            prop_assert!(h.pairing(&hessian_apply(&u, &h, &p).unwrap()) > 0.0);
        }
    }

    #[test]
    fn action_is_strongly_convex_along_segments(u in bumps(3.0, 5.0), v in bumps(3.0, 5.0)) {
        for p in setups() {
            let (u, v) = (u.field(*p.grid()), v.field(*p.grid()));
            let mid = u.zip_map(&v, |a, b| 0.5 * (a + b)).unwrap();
            let d = u.zip_map(&v, |a, b| a - b).unwrap();
            let c = 0.99 * poincare_constant(p.grid()) / 8.0;
            let lhs = action(&mid, &p).unwrap();
            let avg = 0.5 * (action(&u, &p).unwrap() + action(&v, &p).unwrap());
            prop_assert!(lhs <= avg - c * d.pairing(&d) + 1e-12 * avg.abs().max(1.0));
        }
    }

    #[test]
    fn action_is_finite_on_large_fields(u in bumps(300.0, 4.0)) {
        for p in setups() {
            let u = u.field(*p.grid());
            let r = norms(&u).unwrap().sobolev12;
            prop_assert!(r <= 2e3);
            prop_assert!(action(&u, &p).unwrap().is_finite());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn functional_inequalities_hold_on_random_fields(u in bumps(4.0, 4.0), beta in -0.7..0.7f64) {
        let p = vacuum(1.0, beta);
        let report = check_inequalities(&u.field(*p.grid()), &p).unwrap();
        prop_assert!(report.exponential_lower_bound.pass, "{:?}", report.exponential_lower_bound);
        prop_assert!(report.embedding.pass, "{:?}", report.embedding);
        prop_assert!(report.coercivity.pass, "{:?}", report.coercivity);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vortex_inequalities_hold_on_random_fields(u in bumps(2.0, 4.0)) {
        let p = single_vortex();
        let report = check_inequalities(&u.field(*p.grid()), &p).unwrap();
        prop_assert!(report.all_pass(), "{:?}", report);
    }
}

#[test]
fn action_guard_rejects_overflow() {
    let p = vacuum(1.0, 0.1);
    let u = Bumps(vec![(800.0, 0.0, 0.0, 1.0)]).field(*p.grid());
    assert!(action(&u, &p).is_err());
    assert!(residual(&u, &p).is_err());
}

#[test]
fn defect_integral_is_finite_for_node_centered_vortex() {
    let p = ProblemSetup::new(grid(), &SigmaModel::Zero, &VortexSet::coincident(2)).unwrap();
    let d = background_defect_integral(p.background());
    assert!(d.is_finite() && d > 0.0);
}

#[test]
fn zero_field_is_not_a_vortex_solution() {
    let p = single_vortex();
    let u = ScalarField::zeros(*p.grid());
    assert!(residual(&u, &p).unwrap().sup_norm() > 0.1);
}
