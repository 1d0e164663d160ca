//! Differential polynomials: polynomials in jet variables `u^{a,k}` (k >= 1)
//! with [`CoeffFn`] coefficients and a formal `eps` grading.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use super::coeff::CoeffFn;
use crate::error::{Error, Result};
use crate::rat::Rat;

/// The jet variable `u^{coord, order}` with `order >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub coord: usize,
    pub order: u32,
}

impl JetVar {
    pub fn new(coord: usize, order: u32) -> Self {
        assert!(order >= 1, "jet variables have order >= 1");
        JetVar { coord, order }
    }

    pub fn next(self) -> Self {
        JetVar { coord: self.coord, order: self.order + 1 }
    }
}

/// A variable of the differential polynomial ring: a coordinate or a jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Coord(usize),
    Jet(JetVar),
}

impl Var {
    /// `u^{alpha,k}`, a coordinate when `k == 0`.
    pub fn of(alpha: usize, k: u32) -> Self {
        if k == 0 {
            Var::Coord(alpha)
        } else {
            Var::Jet(JetVar::new(alpha, k))
        }
    }

    pub fn coord(self) -> usize {
        match self {
            Var::Coord(a) => a,
            Var::Jet(j) => j.coord,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Var::Coord(_) => 0,
            Var::Jet(j) => j.order,
        }
    }
}

/// Sorted product of jet variables with positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetMono(Vec<(JetVar, u32)>);

impl JetMono {
    pub fn one() -> Self {
        JetMono(Vec::new())
    }

    pub fn single(v: JetVar, e: u32) -> Self {
        if e == 0 {
            JetMono::one()
        } else {
            JetMono(vec![(v, e)])
        }
    }

    pub fn factors(&self) -> &[(JetVar, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of `order * exponent`.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(v, e)| v.order * e).sum()
    }

    pub fn exponent(&self, v: JetVar) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn mul(&self, other: &JetMono) -> JetMono {
        let mut map: BTreeMap<JetVar, u32> = self.0.iter().cloned().collect();
        for (v, e) in &other.0 {
            *map.entry(*v).or_insert(0) += e;
        }
        JetMono(map.into_iter().collect())
    }

    /// Multiplies by `v^delta` (delta may be negative; exponents must stay >= 0).
    pub fn shift(&self, v: JetVar, delta: i64) -> JetMono {
        let mut map: BTreeMap<JetVar, u32> = self.0.iter().cloned().collect();
        let e = map.get(&v).copied().unwrap_or(0) as i64 + delta;
        assert!(e >= 0, "negative jet exponent");
        if e == 0 {
            map.remove(&v);
        } else {
            map.insert(v, e as u32);
        }
        JetMono(map.into_iter().collect())
    }

    /// Greatest common divisor of two monomials.
    pub fn gcd(&self, other: &JetMono) -> JetMono {
        JetMono(
            self.0
                .iter()
                .filter_map(|(v, e)| {
                    let f = other.exponent(*v);
                    (f > 0).then(|| (*v, (*e).min(f)))
                })
                .collect(),
        )
    }

    /// `self / other`, assuming divisibility.
    pub fn div(&self, other: &JetMono) -> JetMono {
        let mut out = self.clone();
        for (v, e) in &other.0 {
            out = out.shift(*v, -(*e as i64));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermKey {
    pub eps: u32,
    pub jet_degree: u32,
    pub mono: JetMono,
}

impl TermKey {
    pub fn new(eps: u32, mono: JetMono) -> Self {
        TermKey { eps, jet_degree: mono.degree(), mono }
    }
}

/// Termwise grading data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradeReport {
    /// `(jet degree, eps power)` for each term.
    pub terms: Vec<(u32, u32)>,
    pub graded: bool,
}

/// Numerical values of coordinates and jet variables.
#[derive(Clone, Debug, Default)]
pub struct JetPoint {
    values: BTreeMap<Var, f64>,
}

impl JetPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: Var, x: f64) -> Self {
        self.values.insert(v, x);
        self
    }

    pub fn set(&mut self, v: Var, x: f64) {
        self.values.insert(v, x);
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        self.values.get(&v).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffPoly {
    n: usize,
    terms: BTreeMap<TermKey, CoeffFn>,
}

impl DiffPoly {
    pub fn zero(n: usize) -> Self {
        DiffPoly { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::from_coeff(CoeffFn::one(n))
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        Self::from_coeff(CoeffFn::constant(n, c))
    }

    pub fn from_coeff(f: CoeffFn) -> Self {
        let mut p = Self::zero(f.n());
        p.add_term(TermKey::new(0, JetMono::one()), f);
        p
    }

    /// `u^{alpha,k}` as a polynomial (the coordinate when `k == 0`).
    pub fn jet(n: usize, alpha: usize, k: u32) -> Self {
        Self::var(n, Var::of(alpha, k))
    }

    pub fn coord(n: usize, alpha: usize) -> Self {
        Self::from_coeff(CoeffFn::var(n, alpha))
    }

    pub fn var(n: usize, v: Var) -> Self {
        match v {
            Var::Coord(a) => Self::coord(n, a),
            Var::Jet(j) => Self::monomial(n, 0, JetMono::single(j, 1), CoeffFn::one(n)),
        }
    }

    pub fn eps(n: usize) -> Self {
        Self::monomial(n, 1, JetMono::one(), CoeffFn::one(n))
    }

    pub fn monomial(n: usize, eps: u32, mono: JetMono, coeff: CoeffFn) -> Self {
        let mut p = Self::zero(n);
        p.add_term(TermKey::new(eps, mono), coeff);
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &CoeffFn)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: TermKey, c: CoeffFn) {
        assert_eq!(c.n(), self.n, "dimension mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn check_dim(&self, other: &DiffPoly) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { left: self.n, right: other.n })
        }
    }

    pub fn try_add(&self, other: &DiffPoly) -> Result<DiffPoly> {
        self.check_dim(other)?;
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &DiffPoly) -> Result<DiffPoly> {
        self.check_dim(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, s: &Rat) -> DiffPoly {
        if s.is_zero() {
            return Self::zero(self.n);
        }
        DiffPoly {
            n: self.n,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.scale(s))).collect(),
        }
    }

    pub fn mul_coeff(&self, f: &CoeffFn) -> DiffPoly {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c * f);
        }
        out
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut acc = Self::one(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplies by `eps^k`.
    pub fn mul_eps(&self, k: u32) -> DiffPoly {
        DiffPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(key, c)| (TermKey { eps: key.eps + k, ..key.clone() }, c.clone()))
                .collect(),
        }
    }

    /// Divides by `eps^k`; every term must carry at least `eps^k`.
    pub fn div_eps(&self, k: u32) -> Result<DiffPoly> {
        let mut out = Self::zero(self.n);
        for (key, c) in &self.terms {
            if key.eps < k {
                return Err(Error::InvalidInput(format!("term of eps order {} below {k}", key.eps)));
            }
            out.add_term(TermKey { eps: key.eps - k, ..key.clone() }, c.clone());
        }
        Ok(out)
    }

    /// Coefficient of `eps^e`, as an eps-free polynomial.
    pub fn eps_coeff(&self, e: u32) -> DiffPoly {
        let mut out = Self::zero(self.n);
        for (key, c) in &self.terms {
            if key.eps == e {
                out.add_term(TermKey { eps: 0, ..key.clone() }, c.clone());
            }
        }
        out
    }

    /// Keeps terms with `eps` power at most `order`.
    pub fn truncate(&self, order: u32) -> DiffPoly {
        DiffPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.eps <= order)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn max_eps(&self) -> u32 {
        self.terms.keys().map(|k| k.eps).max().unwrap_or(0)
    }

    pub fn min_eps(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.eps).min()
    }

    /// Highest jet order present (0 when jet free).
    pub fn max_order(&self) -> u32 {
        self.jet_vars().iter().map(|v| v.order).max().unwrap_or(0)
    }

    pub fn max_jet_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.jet_degree).max().unwrap_or(0)
    }

    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        self.terms.keys().flat_map(|k| k.mono.0.iter().map(|(v, _)| *v)).collect()
    }

    pub fn is_jet_free(&self) -> bool {
        self.terms.keys().all(|k| k.mono.is_one())
    }

    /// Terms without jet variables (all eps powers).
    pub fn jet_free_part(&self) -> DiffPoly {
        DiffPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.mono.is_one())
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// The coefficient function when the polynomial is jet free and eps free.
    pub fn as_coeff(&self) -> Option<CoeffFn> {
        let mut out = CoeffFn::zero(self.n);
        for (k, c) in &self.terms {
            if k.eps != 0 || !k.mono.is_one() {
                return None;
            }
            out = c.clone();
        }
        Some(out)
    }

    pub fn has_theta(&self) -> bool {
        self.terms.values().any(CoeffFn::has_theta)
    }

    /// Splits `p = a + theta * b` with theta-free `a`, `b`.
    pub fn split_theta(&self) -> (DiffPoly, DiffPoly) {
        let mut re = Self::zero(self.n);
        let mut im = Self::zero(self.n);
        for (k, c) in &self.terms {
            let (a, b) = c.split_theta();
            re.add_term(k.clone(), a);
            im.add_term(k.clone(), b);
        }
        (re, im)
    }

    /// Total x-derivative.
    pub fn d_x(&self) -> DiffPoly {
        let mut out = Self::zero(self.n);
        for (key, c) in &self.terms {
            for a in 0..self.n {
                let dc = c.partial(a);
                if !dc.is_zero() {
                    let mono = key.mono.shift(JetVar::new(a, 1), 1);
                    out.add_term(TermKey::new(key.eps, mono), dc);
                }
            }
            for (v, e) in key.mono.factors() {
                let mono = key.mono.shift(*v, -1).shift(v.next(), 1);
                out.add_term(TermKey::new(key.eps, mono), c.scale(&Rat::from_integer((*e).into())));
            }
        }
        out
    }

    pub fn d_x_n(&self, k: u32) -> DiffPoly {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.d_x();
        }
        p
    }

    /// Partial derivative treating all coordinates and jets as independent.
    pub fn partial(&self, v: Var) -> DiffPoly {
        let mut out = Self::zero(self.n);
        match v {
            Var::Coord(a) => {
                for (k, c) in &self.terms {
                    out.add_term(k.clone(), c.partial(a));
                }
            }
            Var::Jet(j) => {
                for (k, c) in &self.terms {
                    let e = k.mono.exponent(j);
                    if e > 0 {
                        out.add_term(
                            TermKey::new(k.eps, k.mono.shift(j, -1)),
                            c.scale(&Rat::from_integer(e.into())),
                        );
                    }
                }
            }
        }
        out
    }

    /// An antiderivative with respect to one variable, no added constant.
    pub fn integrate(&self, v: Var) -> DiffPoly {
        let mut out = Self::zero(self.n);
        match v {
            Var::Coord(a) => {
                for (k, c) in &self.terms {
                    out.add_term(k.clone(), c.integrate(a));
                }
            }
            Var::Jet(j) => {
                for (k, c) in &self.terms {
                    let e = k.mono.exponent(j);
                    out.add_term(
                        TermKey::new(k.eps, k.mono.shift(j, 1)),
                        c.scale(&Rat::new(1.into(), (e + 1).into())),
                    );
                }
            }
        }
        out
    }

    /// Splits off the `v`-degree: returns the coefficients of `v^0, v^1, ...`
    /// (only valid for jet variables).
    pub fn coefficients_in(&self, v: JetVar) -> Vec<DiffPoly> {
        let mut out: Vec<DiffPoly> = Vec::new();
        for (k, c) in &self.terms {
            let e = k.mono.exponent(v) as usize;
            while out.len() <= e {
                out.push(Self::zero(self.n));
            }
            out[e].add_term(TermKey::new(k.eps, k.mono.shift(v, -(e as i64))), c.clone());
        }
        out
    }

    pub fn grade_check(&self) -> GradeReport {
        let terms: Vec<(u32, u32)> = self.terms.keys().map(|k| (k.jet_degree, k.eps)).collect();
        let graded = terms.iter().all(|(d, e)| d == e);
        GradeReport { terms, graded }
    }

    /// Floating evaluation at a jet point.
    pub fn eval(&self, point: &JetPoint, eps: f64) -> Result<f64> {
        let mut u = vec![0.0; self.n];
        let mut needed_coords = BTreeSet::new();
        for c in self.terms.values() {
            for (k, _) in c.terms() {
                for a in 0..self.n {
                    if k.powers[a] > 0 || !k.exps[a].is_zero() {
                        needed_coords.insert(a);
                    }
                }
            }
        }
        for a in needed_coords {
            u[a] = point
                .get(Var::Coord(a))
                .ok_or_else(|| Error::UnassignedVariable(format!("coordinate {}", a + 1)))?;
        }
        let mut total = 0.0;
        for (k, c) in &self.terms {
            let mut v = c.eval(&u)? * eps.powi(k.eps as i32);
            for (j, e) in k.mono.factors() {
                let x = point.get(Var::Jet(*j)).ok_or_else(|| {
                    Error::UnassignedVariable(format!("jet ({}, {})", j.coord + 1, j.order))
                })?;
                v *= x.powi(*e as i32);
            }
            total += v;
        }
        Ok(total)
    }

    /// Rational content: gcd of numerators over lcm of denominators of all coefficients.
    pub(crate) fn content(&self) -> Rat {
        use num_integer::Integer;
        let mut num = num_bigint::BigInt::zero();
        let mut den = num_bigint::BigInt::one();
        for c in self.terms.values() {
            for (_, r) in c.terms() {
                num = num.gcd(r.numer());
                den = den.lcm(r.denom());
            }
        }
        if num.is_zero() {
            Rat::one()
        } else {
            Rat::new(num, den)
        }
    }

    /// Greatest jet monomial dividing every term.
    pub(crate) fn mono_gcd(&self) -> JetMono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return JetMono::one() };
        it.fold(first.mono.clone(), |g, k| g.gcd(&k.mono))
    }

    pub(crate) fn div_mono(&self, m: &JetMono) -> DiffPoly {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.terms {
            out.add_term(TermKey::new(k.eps, k.mono.div(m)), c.clone());
        }
        out
    }

    /// Leading (first in canonical order) term.
    pub fn leading(&self) -> Option<(&TermKey, &CoeffFn)> {
        self.terms.iter().next()
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.n).map(|i| format!("u{}", i + 1)).collect();
        f.write_str(&super::render::render_diffpoly(self, &names))
    }
}

impl<'a> std::ops::Add<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl<'a> std::ops::Sub<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }
}

impl<'a> std::ops::Mul<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = DiffPoly::zero(self.n);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                out.add_term(TermKey::new(ka.eps + kb.eps, ka.mono.mul(&kb.mono)), ca * cb);
            }
        }
        out
    }
}

impl std::ops::Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        self.scale(&-Rat::one())
    }
}

impl std::ops::Add for DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: DiffPoly) -> DiffPoly {
        &self + &rhs
    }
}

impl std::ops::Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: DiffPoly) -> DiffPoly {
        &self - &rhs
    }
}

impl std::ops::Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn u() -> DiffPoly {
        DiffPoly::coord(1, 0)
    }
    fn ux(k: u32) -> DiffPoly {
        DiffPoly::jet(1, 0, k)
    }

    #[test]
    fn merges_and_cancels() {
        assert_eq!(&u() + &u(), u().scale(&int(2)));
        assert!((&ux(1) - &ux(1)).is_zero());
        assert_eq!(&ux(1) * &ux(1), ux(1).pow(2));
    }

    #[test]
    fn total_derivative_examples() {
        assert_eq!(u().d_x(), ux(1));
        let cubic = u().pow(3).scale(&rat(1, 6));
        assert_eq!(cubic.d_x(), &u().pow(2).scale(&rat(1, 2)) * &ux(1));
        let ev = DiffPoly::from_coeff(CoeffFn::exp_var(2, 1, int(1)));
        assert_eq!(ev.d_x(), &ev * &DiffPoly::jet(2, 1, 1));
    }

    #[test]
    fn partials() {
        assert_eq!(ux(1).pow(2).partial(Var::of(0, 1)), ux(1).scale(&int(2)));
        let e2 = DiffPoly::from_coeff(CoeffFn::exp_var(2, 1, int(2)));
        assert_eq!(e2.partial(Var::Coord(1)), e2.scale(&int(2)));
        let uvx = &DiffPoly::coord(2, 0) * &DiffPoly::jet(2, 1, 1);
        assert_eq!(uvx.partial(Var::Coord(0)), DiffPoly::jet(2, 1, 1));
    }

    #[test]
    fn grading() {
        assert!((&DiffPoly::eps(1) * &ux(1)).grade_check().graded);
        assert!(!ux(2).grade_check().graded);
        assert!((&DiffPoly::eps(1).pow(2) * &ux(1).pow(2)).grade_check().graded);
        assert_eq!(ux(1).d_x().max_jet_degree(), 2);
    }

    #[test]
    fn numeric_evaluation() {
        let p = JetPoint::new().with(Var::Coord(0), 2.0).with(Var::of(0, 1), -1.0);
        assert_eq!((&u() * &ux(1)).eval(&p, 0.0).unwrap(), -2.0);
        assert_eq!(u().pow(2).scale(&rat(1, 2)).eval(&JetPoint::new().with(Var::Coord(0), 3.0), 0.0).unwrap(), 4.5);
        assert!(ux(2).eval(&p, 0.0).is_err());
    }

    #[test]
    fn mixed_dimensions_are_rejected() {
        assert!(u().try_add(&DiffPoly::coord(2, 0)).is_err());
    }
}
