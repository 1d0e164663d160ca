use dispersio::fourier::{bracket_crosscheck, sft_lift, ModeBracket, SftGrading};
use dispersio::par::Execution;
use dispersio::rat::{int, rat};
use dispersio::{DiffPoly, FrobeniusManifold, Hierarchy};

fn power(k: u32, denom: i64) -> DiffPoly {
    DiffPoly::coord(1, 0).pow(k).scale(&rat(1, denom))
}

#[test]
fn potential_densities_cross_check() {
    let fs = [power(2, 2), power(3, 6), power(4, 24)];
    let br = ModeBracket::scalar();
    for f in &fs {
        for g in &fs {
            let rep = bracket_crosscheck(f, g, &br, 12, 4, Execution::Parallel).unwrap();
            assert!(rep.agree, "{:?}", rep.mismatches);
        }
    }
}

#[test]
fn derivative_densities_cross_check() {
    let br = ModeBracket::scalar();
    let ux2 = DiffPoly::jet(1, 0, 1).pow(2).scale(&rat(1, 2));
    let mixed = &DiffPoly::coord(1, 0) * &ux2;
    for (i, (f, g)) in [(&ux2, &power(3, 6)), (&mixed, &power(4, 24)), (&mixed, &ux2)].into_iter().enumerate() {
        let rep = bracket_crosscheck(f, g, &br, 9, 4, Execution::Sequential).unwrap();
        assert!(rep.agree, "pair {i}: {:?}", rep.mismatches);
        assert!(!rep.trivial);
    }
}

#[test]
fn point_lifts_commute() {
    let h = Hierarchy::build(FrobeniusManifold::point(), 3).unwrap();
    let br = ModeBracket::scalar();
    let grading = SftGrading::trivial(vec![int(0)]);
    let lifts: Vec<_> = (0..=3)
        .map(|p| {
            let c = h.density(0, p).unwrap();
            sft_lift(c, 9, 4).unwrap()
        })
        .collect();
    for (p, l) in lifts.iter().enumerate() {
        if p + 2 <= 4 {
            let expect = grading.expected_lift_degree(0, 0, p as i64);
            assert_eq!(grading.homogeneous_degree(l), Some(expect), "p = {p}");
        }
        for m in lifts.iter() {
            let b = br.bracket_where(l, m, |x| x.max_index() <= 3, Execution::Parallel);
            assert!(b.restrict(|x| x.degree() <= 4).is_zero());
        }
    }
}

mod common;

use dispersio::fourier::to_fourier;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn total_derivatives_vanish(g in common::graded(1, 4, 3)) {
        let dg = g.d_x();
        prop_assert!(to_fourier(&dg, 6, 6).unwrap().is_zero());
    }
}
