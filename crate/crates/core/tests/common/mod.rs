#![allow(dead_code)]

use dispersio::jetring::{JetMono, JetPoint};
use dispersio::rat::rat;
use dispersio::{CoeffFn, DiffPoly, JetVar, Rat, Var};
use proptest::prelude::*;

pub fn small_rat() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

/// A monomial `c * u^powers * prod jets` in `n` components.
fn term(n: usize, max_order: u32) -> impl Strategy<Value = DiffPoly> {
    (
        small_rat(),
        proptest::collection::vec(0u32..=2, n),
        proptest::collection::vec((0..n, 1..=max_order, 1u32..=2), 0..=2),
    )
        .prop_map(move |(c, powers, jets)| {
            let mut coeff = CoeffFn::constant(n, c);
            for (a, &p) in powers.iter().enumerate() {
                coeff = &coeff * &CoeffFn::var(n, a).pow(p);
            }
            let mono = jets
                .iter()
                .fold(JetMono::one(), |m, &(a, k, e)| m.mul(&JetMono::single(JetVar::new(a, k), e)));
            DiffPoly::monomial(n, 0, mono, coeff)
        })
}

/// Random differential polynomial with jets up to `max_order`.
pub fn diffpoly(n: usize, max_order: u32, max_terms: usize) -> impl Strategy<Value = DiffPoly> {
    proptest::collection::vec(term(n, max_order), 1..=max_terms)
        .prop_map(move |ts| ts.iter().fold(DiffPoly::zero(n), |acc, t| &acc + t))
}

/// Random polynomial of total jet degree at most `max_degree`.
pub fn graded(n: usize, max_degree: u32, max_terms: usize) -> impl Strategy<Value = DiffPoly> {
    diffpoly(n, 3, max_terms).prop_map(move |p| {
        let mut out = DiffPoly::zero(n);
        for (k, c) in p.terms() {
            if k.jet_degree <= max_degree {
                out = &out + &DiffPoly::monomial(n, k.eps, k.mono.clone(), c.clone());
            }
        }
        out
    })
}

/// Values for `u^a` and jets up to order 8 in `[-1, 1]`.
pub fn jet_point(n: usize) -> impl Strategy<Value = JetPoint> {
    proptest::collection::vec(-1.0f64..1.0, n * 9).prop_map(move |vals| {
        let mut p = JetPoint::new();
        for a in 0..n {
            for k in 0..9u32 {
                p.set(Var::of(a, k), vals[a * 9 + k as usize]);
            }
        }
        p
    })
}
