//! Rational differential functions `num / den`.

use std::fmt;

use num_traits::One;

use super::diffpoly::{DiffPoly, Var};
use crate::error::{Error, Result};
use crate::rat::Rat;

/// A quotient of differential polynomials with a nonzero, eps-free denominator
/// whenever eps-coefficients are requested.
#[derive(Clone, Debug)]
pub struct RatDiffFn {
    num: DiffPoly,
    den: DiffPoly,
}

impl RatDiffFn {
    pub fn new(num: DiffPoly, den: DiffPoly) -> Result<Self> {
        num.check_dim(&den)?;
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Self::normalized(num, den))
    }

    pub fn from_poly(p: DiffPoly) -> Self {
        let n = p.n();
        RatDiffFn { num: p, den: DiffPoly::one(n) }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_poly(DiffPoly::zero(n))
    }

    pub fn num(&self) -> &DiffPoly {
        &self.num
    }

    pub fn den(&self) -> &DiffPoly {
        &self.den
    }

    pub fn n(&self) -> usize {
        self.num.n()
    }

    /// Cancels common jet-monomial factors and rational content.
    fn normalized(num: DiffPoly, den: DiffPoly) -> Self {
        if num.is_zero() {
            let n = num.n();
            return RatDiffFn { num, den: DiffPoly::one(n) };
        }
        let g = num.mono_gcd().gcd(&den.mono_gcd());
        let (num, den) = if g.is_one() { (num, den) } else { (num.div_mono(&g), den.div_mono(&g)) };
        let c = den.content();
        let lead_sign = den
            .leading()
            .and_then(|(_, f)| f.terms().next().map(|(_, r)| r.clone()))
            .map(|r| if r < Rat::from_integer(0.into()) { -Rat::one() } else { Rat::one() })
            .unwrap_or_else(Rat::one);
        let s = lead_sign / c;
        RatDiffFn { num: num.scale(&s), den: den.scale(&s) }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact equality by cross multiplication.
    pub fn equals(&self, other: &RatDiffFn) -> bool {
        (&(&self.num * &other.den) - &(&other.num * &self.den)).is_zero()
    }

    pub fn add(&self, other: &RatDiffFn) -> RatDiffFn {
        if self.den == other.den {
            return Self::normalized(&self.num + &other.num, self.den.clone());
        }
        Self::normalized(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn sub(&self, other: &RatDiffFn) -> RatDiffFn {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatDiffFn {
        RatDiffFn { num: -&self.num, den: self.den.clone() }
    }

    pub fn mul(&self, other: &RatDiffFn) -> RatDiffFn {
        Self::normalized(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn div(&self, other: &RatDiffFn) -> Result<RatDiffFn> {
        if other.is_zero() {
            return Err(Error::InvalidInput("division by zero".into()));
        }
        Ok(Self::normalized(&self.num * &other.den, &self.den * &other.num))
    }

    pub fn scale(&self, s: &Rat) -> RatDiffFn {
        Self::normalized(self.num.scale(s), self.den.clone())
    }

    pub fn mul_poly(&self, p: &DiffPoly) -> RatDiffFn {
        Self::normalized(&self.num * p, self.den.clone())
    }

    pub fn mul_eps(&self, k: u32) -> RatDiffFn {
        RatDiffFn { num: self.num.mul_eps(k), den: self.den.clone() }
    }

    /// Total x-derivative by the quotient rule.
    pub fn d_x(&self) -> RatDiffFn {
        if self.den.num_terms() == 1 && self.den.is_jet_free() && self.den.as_coeff().is_some_and(|c| c.is_constant()) {
            return RatDiffFn { num: self.num.d_x(), den: self.den.clone() };
        }
        Self::normalized(
            &(&self.num.d_x() * &self.den) - &(&self.num * &self.den.d_x()),
            &self.den * &self.den,
        )
    }

    pub fn d_x_n(&self, k: u32) -> RatDiffFn {
        (0..k).fold(self.clone(), |f, _| f.d_x())
    }

    pub fn partial(&self, v: Var) -> RatDiffFn {
        Self::normalized(
            &(&self.num.partial(v) * &self.den) - &(&self.num * &self.den.partial(v)),
            &self.den * &self.den,
        )
    }

    /// Coefficient of `eps^e`; the denominator must be eps free.
    pub fn eps_coeff(&self, e: u32) -> Result<RatDiffFn> {
        if self.den.max_eps() > 0 {
            return Err(Error::Unsupported("eps in a denominator".into()));
        }
        Ok(Self::normalized(self.num.eps_coeff(e), self.den.clone()))
    }

    pub fn truncate(&self, order: u32) -> RatDiffFn {
        RatDiffFn { num: self.num.truncate(order), den: self.den.clone() }
    }

    pub fn max_eps(&self) -> u32 {
        self.num.max_eps()
    }
}

impl PartialEq for RatDiffFn {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl fmt::Display for RatDiffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::int;

    fn j(k: u32) -> DiffPoly {
        DiffPoly::jet(1, 0, k)
    }

    #[test]
    fn log_derivative_expansion() {
        // (log u_x)_xx = u_xxx/u_x - u_xx^2/u_x^2
        let l1 = RatDiffFn::new(j(2), j(1)).unwrap();
        let lhs = l1.d_x();
        let rhs = RatDiffFn::new(j(3), j(1))
            .unwrap()
            .sub(&RatDiffFn::new(j(2).pow(2), j(1).pow(2)).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn cancels_common_monomials() {
        let f = RatDiffFn::new(&j(1).pow(3) * &j(2), j(1).pow(2).scale(&int(-2))).unwrap();
        assert_eq!(f.den().clone(), DiffPoly::one(1));
        assert_eq!(f.num().clone(), (&j(1) * &j(2)).scale(&Rat::new((-1).into(), 2.into())));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(RatDiffFn::new(j(1), DiffPoly::zero(1)).is_err());
    }
}
