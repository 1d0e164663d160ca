use dispersio::rat::{int, rat, zero};
use dispersio::{CoeffFn, FrobeniusManifold, Hierarchy};
use proptest::prelude::*;

fn manifolds() -> Vec<FrobeniusManifold> {
    vec![FrobeniusManifold::point(), FrobeniusManifold::p1()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn multiplication_is_associative_with_unit(
        u in proptest::collection::vec(-1.0f64..1.0, 2),
        a in proptest::collection::vec(-1.0f64..1.0, 2),
        b in proptest::collection::vec(-1.0f64..1.0, 2),
        c in proptest::collection::vec(-1.0f64..1.0, 2),
    ) {
        for fm in manifolds() {
            let n = fm.n();
            let (u, a, b, c) = (&u[..n], &a[..n], &b[..n], &c[..n]);
            let ab_c = fm.multiply_at(u, &fm.multiply_at(u, a, b).unwrap(), c).unwrap();
            let a_bc = fm.multiply_at(u, a, &fm.multiply_at(u, b, c).unwrap()).unwrap();
            for (x, y) in ab_c.iter().zip(&a_bc) {
                prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
            }
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            let ea = fm.multiply_at(u, &e, a).unwrap();
            for (x, y) in ea.iter().zip(a) {
                prop_assert!((x - y).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn second_metric_symmetric_and_trace_free_monodromy() {
    for fm in manifolds() {
        assert!(fm.wdvv_check().passed);
        let g = fm.lowered_second_metric();
        let n = fm.n();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(g[a][b], g[b][a]);
            }
        }
        let v = fm.monodromy().v;
        let trace = (0..n).fold(zero(), |acc, i| acc + &v[i][i]);
        assert_eq!(trace, zero());
    }
}

#[test]
fn fundamental_class_and_grading() {
    for (fm, pmax) in [(FrobeniusManifold::point(), 6), (FrobeniusManifold::p1(), 3)] {
        let h = Hierarchy::build(fm, pmax).unwrap();
        for a in 0..h.n() {
            for j in 0..=pmax {
                let hj = h.density(a, j).unwrap();
                assert_eq!(&hj.partial(0), h.density(a, j - 1).unwrap(), "a = {a}, j = {j}");
                let prev: Vec<CoeffFn> = (0..h.n()).map(|k| h.density(k, j - 1).unwrap().clone()).collect();
                assert!(h.grading_defect(a, j, hj, &prev).is_zero(), "a = {a}, j = {j}");
            }
        }
    }
}

#[test]
fn point_generating_function() {
    // sum_p h_{p-1} z^p = (e^{zu} - 1)/z, i.e. h_{p-1} = u^{p+1}/(p+1)!
    let h = Hierarchy::build(FrobeniusManifold::point(), 8).unwrap();
    let u = CoeffFn::var(1, 0);
    let mut series = CoeffFn::zero(1);
    let mut term = CoeffFn::one(1);
    for k in 1..=10u32 {
        term = (&term * &u).scale(&rat(1, k as i64));
        series = &series + &term;
        let p = k as i64 - 2;
        assert_eq!(h.density(0, p).unwrap(), &term, "level {p}");
    }
    assert_eq!(series.poly_degree(), 10);
}

#[test]
fn p1_closed_form_coefficients() {
    // h_{v,p} from the expansion of the closed form; independently expanded
    let h = Hierarchy::build(FrobeniusManifold::p1(), 2).unwrap();
    let u = CoeffFn::var(2, 0);
    let ev = CoeffFn::exp_var(2, 1, int(1));
    let e2v = CoeffFn::exp_var(2, 1, int(2));
    let expect1 = &u.pow(3).scale(&rat(1, 6)) + &(&u * &ev);
    let expect2 = &(&u.pow(4).scale(&rat(1, 24)) + &(&u.pow(2) * &ev).scale(&rat(1, 2))) + &e2v.scale(&rat(1, 4));
    assert_eq!(h.density(1, 1).unwrap(), &expect1);
    assert_eq!(h.density(1, 2).unwrap(), &expect2);
}
