mod common;

use bps_vortex::{
    action, compute_observables, solve, solve_observed, GridSpec, ProblemSetup, ScalarField,
    SigmaModel, SolverConfig, VortexSet,
};
use common::{random_bumps, sup_diff, Bumps};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problems() -> Vec<ProblemSetup> {
    let g = GridSpec::new(10.0, 129).unwrap();
    vec![
        ProblemSetup::new(g, &SigmaModel::gaussian(0.5, 0.08), &VortexSet::vacuum()).unwrap(),
        ProblemSetup::new(g, &SigmaModel::Zero, &VortexSet::coincident(1)).unwrap(),
        ProblemSetup::new(
            g,
            &SigmaModel::gaussian(0.6, 0.2),
            &VortexSet::at(vec![[-1.5, 0.5], [2.0, -1.0]]),
        )
        .unwrap(),
    ]
}

#[test]
fn two_initializations_reach_the_same_minimizer() {
    let cfg = SolverConfig::default();
    for p in problems() {
        let a = solve(&p, &cfg, None).unwrap();
        let bump = Bumps(vec![(1.0, 0.7, -0.4, 1.5)]).field(*p.grid());
        let b = solve(&p, &cfg, Some(&bump)).unwrap();
        assert!(a.report.converged && b.report.converged);
        assert!(sup_diff(&a.u, &b.u) <= 1e-8, "{}", sup_diff(&a.u, &b.u));
    }
}

#[test]
fn accepted_steps_never_increase_the_action() {
    let cfg = SolverConfig::default();
    for p in problems() {
        let mut direct = Vec::new();
        let sol =
            solve_observed(&p, &cfg, None, |_, u| direct.push(action(u, &p).unwrap())).unwrap();
        let hist = &sol.report.action_history;
        assert_eq!(hist.len(), direct.len());
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] + 1e-14 * w[0].abs().max(1.0));
        }
        for (tracked, exact) in hist.iter().zip(&direct) {
            assert!((tracked - exact).abs() <= 1e-9 * exact.abs().max(1.0));
        }
    }
}

#[test]
fn minimizer_beats_random_probes() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in problems() {
        let sol = solve(&p, &cfg, None).unwrap();
        let best = action(&sol.u, &p).unwrap();
        for _ in 0..50 {
            let mut probe = random_bumps(&mut rng, 0.5, 5.0).field(*p.grid());
            if rng.gen_bool(0.5) {
                probe.axpy(1.0, &sol.u);
            }
            assert!(best <= action(&probe, &p).unwrap());
        }
    }
}

#[test]
fn observable_field_is_independent_of_lambda() {
    let g = GridSpec::new(10.0, 129).unwrap();
    let cfg = SolverConfig::default();
    let f_for = |lambda: f64| {
        let v = VortexSet::coincident(1).with_lambda(lambda);
        let p = ProblemSetup::new(g, &SigmaModel::Zero, &v).unwrap();
        let sol = solve(&p, &cfg, None).unwrap();
        assert!(sol.report.converged);
        (sol.u.clone(), compute_observables(&sol.u, &p).unwrap().f)
    };
    let (u8, f8) = f_for(8.0);
    let (u16, f16) = f_for(16.0);
    assert!(sup_diff(&f8, &f16) <= 1e-6);
    assert!(sup_diff(&u8, &u16) > 1e-2);
}

#[test]
fn zero_problem_needs_no_steps() {
    let g = GridSpec::new(6.0, 49).unwrap();
    let p = ProblemSetup::new(g, &SigmaModel::Zero, &VortexSet::vacuum()).unwrap();
    let sol = solve(&p, &SolverConfig::default(), None).unwrap();
    assert!(sol.report.converged);
    assert_eq!(sol.report.iterations, 0);
    assert_eq!(sol.u, ScalarField::zeros(g));
}
