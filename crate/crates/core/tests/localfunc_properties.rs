mod common;

use common::{graded, small_rat};
use dispersio::localfunc::{antiderivative, is_total_derivative, variational_derivative};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn euler_operator_kills_total_derivatives(f in graded(2, 5, 4)) {
        let g = f.d_x();
        for a in 0..2 {
            prop_assert!(variational_derivative(&g, a).is_zero());
        }
        prop_assert!(is_total_derivative(&g));
    }

    #[test]
    fn antiderivative_inverts_d_x(f in graded(1, 6, 4)) {
        let g = f.d_x();
        let a = antiderivative(&g).unwrap();
        prop_assert_eq!(a.d_x(), g);
        // f and the recovered antiderivative differ by a constant
        let diff = &f - &a;
        prop_assert!(diff.as_coeff().is_some_and(|c| c.is_constant()));
        if f.jet_free_part().is_zero() {
            prop_assert_eq!(a, f);
        }
    }

    #[test]
    fn operators_are_linear(f in graded(1, 4, 3), g in graded(1, 4, 3), c in small_rat()) {
        let h = &f.scale(&c) + &g;
        prop_assert_eq!(
            variational_derivative(&h, 0),
            &variational_derivative(&f, 0).scale(&c) + &variational_derivative(&g, 0)
        );
        let (df, dg) = (f.d_x(), g.d_x());
        prop_assert_eq!(
            antiderivative(&(&df.scale(&c) + &dg)).unwrap().d_x(),
            &df.scale(&c) + &dg
        );
    }
}
