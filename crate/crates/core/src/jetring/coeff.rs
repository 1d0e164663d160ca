//! Exponential-polynomial coefficient functions of the coordinates `u^1..u^n`.
//!
//! A [`CoeffFn`] is a finite rational combination of monomials
//! `prod (u^a)^{k_a} * exp(sum m_a u^a)`, optionally multiplied by the formal
//! generator `theta` with `theta^2 = -2` (so `theta = i*sqrt(2)`).

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoeffKey {
    pub powers: Vec<u32>,
    pub exps: Vec<Rat>,
    pub surd: bool,
}

impl CoeffKey {
    pub fn one(n: usize) -> Self {
        CoeffKey {
            powers: vec![0; n],
            exps: vec![Rat::zero(); n],
            surd: false,
        }
    }

    pub fn is_one(&self) -> bool {
        !self.surd && self.powers.iter().all(|&p| p == 0) && self.exps.iter().all(Zero::is_zero)
    }

    pub fn has_exp(&self) -> bool {
        self.exps.iter().any(|m| !m.is_zero())
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    /// Product of two keys together with the scalar it produces (`-2` when two
    /// `theta` factors meet).
    fn mul(&self, other: &CoeffKey) -> (CoeffKey, Rat) {
        let powers = self.powers.iter().zip(&other.powers).map(|(a, b)| a + b).collect();
        let exps = self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect();
        let (surd, factor) = match (self.surd, other.surd) {
            (true, true) => (false, rat::int(-2)),
            (a, b) => (a || b, Rat::one()),
        };
        (CoeffKey { powers, exps, surd }, factor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoeffFn {
    n: usize,
    terms: BTreeMap<CoeffKey, Rat>,
}

impl CoeffFn {
    pub fn zero(n: usize) -> Self {
        CoeffFn { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut f = Self::zero(n);
        f.add_term(CoeffKey::one(n), c);
        f
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rat::one())
    }

    /// The coordinate function `u^alpha` (indices are zero based).
    pub fn var(n: usize, alpha: usize) -> Self {
        let mut key = CoeffKey::one(n);
        key.powers[alpha] = 1;
        Self::from_key(key, Rat::one())
    }

    /// `exp(m * u^alpha)`.
    pub fn exp_var(n: usize, alpha: usize, m: Rat) -> Self {
        let mut key = CoeffKey::one(n);
        key.exps[alpha] = m;
        Self::from_key(key, Rat::one())
    }

    /// `exp(sum m_a u^a)`.
    pub fn exp_linear(ms: &[Rat]) -> Self {
        let mut key = CoeffKey::one(ms.len());
        key.exps = ms.to_vec();
        Self::from_key(key, Rat::one())
    }

    /// The formal generator `theta`, `theta^2 = -2`.
    pub fn theta(n: usize) -> Self {
        let mut key = CoeffKey::one(n);
        key.surd = true;
        Self::from_key(key, Rat::one())
    }

    pub fn from_key(key: CoeffKey, c: Rat) -> Self {
        let mut f = Self::zero(key.powers.len());
        f.add_term(key, c);
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CoeffKey, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: CoeffKey, c: Rat) {
        debug_assert_eq!(key.powers.len(), self.n);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn check_dim(&self, other: &CoeffFn) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { left: self.n, right: other.n })
        }
    }

    /// The constant value if the function has no `u` dependence and no `theta`.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (k, c) = self.terms.iter().next()?;
                k.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn has_exp(&self) -> bool {
        self.terms.keys().any(CoeffKey::has_exp)
    }

    pub fn has_theta(&self) -> bool {
        self.terms.keys().any(|k| k.surd)
    }

    /// Splits `f = a + theta * b` with `a`, `b` theta-free.
    pub fn split_theta(&self) -> (CoeffFn, CoeffFn) {
        let mut re = Self::zero(self.n);
        let mut im = Self::zero(self.n);
        for (k, c) in &self.terms {
            let mut k2 = k.clone();
            k2.surd = false;
            if k.surd {
                im.add_term(k2, c.clone());
            } else {
                re.add_term(k2, c.clone());
            }
        }
        (re, im)
    }

    /// Highest total polynomial degree among the terms (0 for the zero function).
    pub fn poly_degree(&self) -> u32 {
        self.terms.keys().map(CoeffKey::degree).max().unwrap_or(0)
    }

    /// Terms without exponential factors.
    pub fn exp_free_part(&self) -> CoeffFn {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.terms {
            if !k.has_exp() {
                out.add_term(k.clone(), c.clone());
            }
        }
        out
    }

    /// Value at `u = 0` (constant part after setting every exponential to 1).
    pub fn at_origin(&self) -> CoeffFn {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.terms {
            if k.degree() == 0 {
                let mut k2 = CoeffKey::one(self.n);
                k2.surd = k.surd;
                out.add_term(k2, c.clone());
            }
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> CoeffFn {
        if s.is_zero() {
            return Self::zero(self.n);
        }
        CoeffFn {
            n: self.n,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> CoeffFn {
        let mut acc = Self::one(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `d/du^alpha`.
    pub fn partial(&self, alpha: usize) -> CoeffFn {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.terms {
            let p = k.powers[alpha];
            if p > 0 {
                let mut k2 = k.clone();
                k2.powers[alpha] = p - 1;
                out.add_term(k2, c * Rat::from_integer(p.into()));
            }
            let m = &k.exps[alpha];
            if !m.is_zero() {
                out.add_term(k.clone(), c * m);
            }
        }
        out
    }

    /// An antiderivative in `u^alpha`, term by term, with no added constant.
    pub fn integrate(&self, alpha: usize) -> CoeffFn {
        let mut out = Self::zero(self.n);
        for (k, c) in &self.terms {
            let a = k.powers[alpha];
            let m = k.exps[alpha].clone();
            if m.is_zero() {
                let mut k2 = k.clone();
                k2.powers[alpha] = a + 1;
                out.add_term(k2, c / Rat::from_integer((a + 1).into()));
                continue;
            }
            // int u^a e^{mu} = e^{mu} sum_j (-1)^j a!/(a-j)! u^{a-j} / m^{j+1}
            let mut falling = Rat::one();
            let mut mpow = m.clone();
            for j in 0..=a {
                let mut k2 = k.clone();
                k2.powers[alpha] = a - j;
                let sign = if j % 2 == 0 { Rat::one() } else { -Rat::one() };
                out.add_term(k2, c * &sign * &falling / &mpow);
                falling *= Rat::from_integer((a - j).into());
                mpow *= &m;
            }
        }
        out
    }

    /// Applies the linear vector field `sum (a_i u^i + b_i) d/du^i`.
    pub fn apply_linear_field(&self, a: &[Rat], b: &[Rat]) -> CoeffFn {
        let mut out = Self::zero(self.n);
        for i in 0..self.n {
            let d = self.partial(i);
            if !a[i].is_zero() {
                out = &out + &(&d * &Self::var(self.n, i)).scale(&a[i]);
            }
            if !b[i].is_zero() {
                out = &out + &d.scale(&b[i]);
            }
        }
        out
    }

    /// Floating evaluation; fails on `theta`.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: u.len() });
        }
        let mut total = 0.0;
        for (k, c) in &self.terms {
            if k.surd {
                return Err(Error::NonReal);
            }
            let mut v = rat::to_f64(c);
            let mut arg = 0.0;
            for i in 0..self.n {
                if k.powers[i] > 0 {
                    v *= u[i].powi(k.powers[i] as i32);
                }
                if !k.exps[i].is_zero() {
                    arg += rat::to_f64(&k.exps[i]) * u[i];
                }
            }
            if arg != 0.0 {
                v *= arg.exp();
            }
            total += v;
        }
        Ok(total)
    }

    /// Exact value at a rational point where no exponential is active.
    pub fn eval_exact(&self, u: &[Rat]) -> Result<Rat> {
        let mut total = Rat::zero();
        for (k, c) in &self.terms {
            if k.surd {
                return Err(Error::NonReal);
            }
            let mut v = c.clone();
            for i in 0..self.n {
                if !k.exps[i].is_zero() && !u[i].is_zero() {
                    return Err(Error::Unsupported("exact evaluation of an exponential".into()));
                }
                for _ in 0..k.powers[i] {
                    v *= &u[i];
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Substitutes `u^a -> subs[a]`. Exponentials require each substituted
    /// coordinate that appears in an exponent to be homogeneous linear.
    pub fn substitute(&self, subs: &[CoeffFn]) -> Result<CoeffFn> {
        let m = subs.first().map(|s| s.n).unwrap_or(self.n);
        let mut out = Self::zero(m);
        for (k, c) in &self.terms {
            let mut term = Self::constant(m, c.clone());
            if k.surd {
                term = &term * &Self::theta(m);
            }
            let mut lin = vec![Rat::zero(); m];
            for i in 0..self.n {
                if k.powers[i] > 0 {
                    term = &term * &subs[i].pow(k.powers[i]);
                }
                if !k.exps[i].is_zero() {
                    let coeffs = subs[i].as_linear().ok_or_else(|| {
                        Error::Unsupported("exponential of a nonlinear expression".into())
                    })?;
                    for (l, cj) in lin.iter_mut().zip(coeffs) {
                        *l += &k.exps[i] * cj;
                    }
                }
            }
            if lin.iter().any(|x| !x.is_zero()) {
                term = &term * &Self::exp_linear(&lin);
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Coefficients `c_a` if the function equals `sum c_a u^a`.
    pub fn as_linear(&self) -> Option<Vec<Rat>> {
        let mut out = vec![Rat::zero(); self.n];
        for (k, c) in &self.terms {
            if k.surd || k.has_exp() || k.degree() != 1 {
                return None;
            }
            let i = k.powers.iter().position(|&p| p == 1)?;
            out[i] = c.clone();
        }
        Some(out)
    }

    /// Largest absolute coefficient (0 for zero), a cheap size measure.
    pub fn max_abs_coeff(&self) -> Rat {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rat::zero)
    }
}

impl fmt::Display for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.n).map(|i| format!("u{}", i + 1)).collect();
        f.write_str(&super::render::render_coeff(self, &names))
    }
}

impl<'a> std::ops::Add<&'a CoeffFn> for &'a CoeffFn {
    type Output = CoeffFn;
    fn add(self, rhs: &CoeffFn) -> CoeffFn {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl<'a> std::ops::Sub<&'a CoeffFn> for &'a CoeffFn {
    type Output = CoeffFn;
    fn sub(self, rhs: &CoeffFn) -> CoeffFn {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }
}

impl<'a> std::ops::Mul<&'a CoeffFn> for &'a CoeffFn {
    type Output = CoeffFn;
    fn mul(self, rhs: &CoeffFn) -> CoeffFn {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = CoeffFn::zero(self.n);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let (k, s) = ka.mul(kb);
                out.add_term(k, ca * cb * s);
            }
        }
        out
    }
}

impl std::ops::Neg for &CoeffFn {
    type Output = CoeffFn;
    fn neg(self) -> CoeffFn {
        self.scale(&-Rat::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn u() -> CoeffFn {
        CoeffFn::var(2, 0)
    }
    fn ev() -> CoeffFn {
        CoeffFn::exp_var(2, 1, int(1))
    }

    #[test]
    fn exponent_addition() {
        let e2 = &ev() * &ev();
        assert_eq!(e2, CoeffFn::exp_var(2, 1, int(2)));
        assert_eq!(e2.partial(1), e2.scale(&int(2)));
    }

    #[test]
    fn theta_squares_to_minus_two() {
        let t = CoeffFn::theta(1);
        assert_eq!(&t * &t, CoeffFn::constant(1, int(-2)));
    }

    #[test]
    fn integration_inverts_partial() {
        let f = &(&u().pow(3) * &ev()) + &u().scale(&rat(1, 3));
        for a in 0..2 {
            assert_eq!(f.integrate(a).partial(a), f);
        }
        let g = &CoeffFn::var(2, 1).pow(2) * &CoeffFn::exp_var(2, 1, rat(-1, 2));
        assert_eq!(g.integrate(1).partial(1), g);
    }

    #[test]
    fn evaluation() {
        assert_eq!(u().pow(2).scale(&rat(1, 2)).eval(&[3.0, 0.0]).unwrap(), 4.5);
        assert_eq!(ev().eval(&[0.0, 0.0]).unwrap(), 1.0);
        assert!(CoeffFn::theta(2).eval(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn linear_substitution_into_exponential() {
        // e^v with v -> u + v
        let s = [u(), &u() + &CoeffFn::var(2, 1)];
        let out = ev().substitute(&s).unwrap();
        assert_eq!(out, CoeffFn::exp_linear(&[int(1), int(1)]));
        let bad = [u(), u().pow(2)];
        assert!(ev().substitute(&bad).is_err());
    }
}
