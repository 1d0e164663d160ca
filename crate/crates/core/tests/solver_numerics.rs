use std::collections::BTreeMap;

use dispersio::par::Execution;
use dispersio::solver::{
    hodograph_solve, linspace, residual_check, tau_consistency, topological_solution, HodographProblem, NewtonSettings,
};
use dispersio::{FrobeniusManifold, Hierarchy};

fn point() -> Hierarchy {
    Hierarchy::build(FrobeniusManifold::point(), 2).unwrap()
}

fn residual_at(h: &Hierarchy, nx: usize, nt: usize) -> f64 {
    let p = HodographProblem::single_time((0, 1), linspace(-1.0, 1.0, nx), linspace(0.0, 0.3, nt));
    let g = hodograph_solve(h, &p, Execution::Parallel).unwrap();
    assert!(g.all_converged());
    residual_check(h, &g, (0, 1), 1e3).unwrap().max_residual
}

#[test]
fn second_order_convergence() {
    let h = point();
    let coarse = residual_at(&h, 21, 7);
    let fine = residual_at(&h, 41, 13);
    let ratio = coarse / fine;
    assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
}

#[test]
fn blowup_near_catastrophe() {
    let h = point();
    let p = HodographProblem::single_time((0, 1), linspace(-1.0, 1.0, 21), linspace(0.9, 0.99, 10));
    let g = hodograph_solve(&h, &p, Execution::Sequential).unwrap();
    let calm = residual_at(&h, 21, 7);
    let rep = residual_check(&h, &g, (0, 1), 100.0 * calm).unwrap();
    assert!(rep.blowup);
}

#[test]
fn parallel_matches_sequential() {
    let h = point();
    let p = HodographProblem::single_time((0, 2), linspace(-0.5, 0.5, 31), linspace(0.0, 0.4, 9));
    let a = hodograph_solve(&h, &p, Execution::Parallel).unwrap();
    let b = hodograph_solve(&h, &p, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn commuting_times_together() {
    // t^{1,1} = t^{1,2} = s: the solution satisfies both flows separately
    let h = Hierarchy::build(FrobeniusManifold::point(), 3).unwrap();
    let mut times = BTreeMap::new();
    times.insert((0, 1), 1.0);
    times.insert((0, 2), 0.0);
    let xs = linspace(-0.3, 0.3, 41);
    let ts = linspace(0.0, 0.2, 9);
    let g1 = topological_solution(&h, times.clone(), xs.clone(), ts.clone(), Execution::Sequential).unwrap();
    times.insert((0, 2), 1.0);
    times.insert((0, 1), 0.0);
    let g2 = topological_solution(&h, times, xs, ts, Execution::Sequential).unwrap();
    let r1 = residual_check(&h, &g1, (0, 1), 1.0).unwrap();
    let r2 = residual_check(&h, &g2, (0, 2), 1.0).unwrap();
    assert!(r1.max_residual < 1e-3 && r2.max_residual < 1e-3);
}

#[test]
fn continuation_step_independence() {
    let h = point();
    let xs = linspace(-0.5, 0.5, 11);
    let coarse = hodograph_solve(&h, &HodographProblem::single_time((0, 2), xs.clone(), vec![0.0, 0.4]), Execution::Sequential).unwrap();
    let fine = hodograph_solve(&h, &HodographProblem::single_time((0, 2), xs, linspace(0.0, 0.4, 41)), Execution::Sequential).unwrap();
    for xi in 0..11 {
        assert!((coarse.value(1, xi, 0) - fine.value(40, xi, 0)).abs() < 1e-12);
    }
}

#[test]
fn tau_identities_for_point() {
    let h = point();
    let rep = tau_consistency(&h, 1e-3, &NewtonSettings::default()).unwrap();
    assert!(rep.passed(1e-6), "{rep:?}");
}
