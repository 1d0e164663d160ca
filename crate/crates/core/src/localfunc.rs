//! Local functionals: densities modulo total x-derivatives.

use crate::error::{Error, Result};
use crate::jetring::{DiffPoly, JetVar, Var};
use crate::rat::Rat;

/// Euler operator `E_alpha(f) = sum_s (-1)^s d_x^s (df/du^{alpha,s})`.
pub fn variational_derivative(f: &DiffPoly, alpha: usize) -> DiffPoly {
    let top = f
        .jet_vars()
        .iter()
        .filter(|v| v.coord == alpha)
        .map(|v| v.order)
        .max()
        .unwrap_or(0);
    let mut out = f.partial(Var::Coord(alpha));
    for s in 1..=top {
        let term = f.partial(Var::of(alpha, s)).d_x_n(s);
        out = if s % 2 == 0 { &out + &term } else { &out - &term };
    }
    out
}

/// All components of the variational gradient.
pub fn gradient(f: &DiffPoly) -> Vec<DiffPoly> {
    (0..f.n()).map(|a| variational_derivative(f, a)).collect()
}

pub fn is_total_derivative(f: &DiffPoly) -> bool {
    f.jet_free_part().is_zero() && gradient(f).iter().all(DiffPoly::is_zero)
}

/// Returns `g` with `d_x g = f`, or [`Error::NotATotalDerivative`].
pub fn antiderivative(f: &DiffPoly) -> Result<DiffPoly> {
    let mut g = DiffPoly::zero(f.n());
    let mut r = f.clone();
    let mut steps = 0usize;
    while !r.is_zero() {
        steps += 1;
        if steps > 100_000 {
            return Err(Error::NotATotalDerivative);
        }
        let Some(top) = r.jet_vars().into_iter().max_by_key(|v| (v.order, v.coord)) else {
            return Err(Error::NotATotalDerivative);
        };
        let parts = r.coefficients_in(top);
        if parts.len() > 2 {
            return Err(Error::NotATotalDerivative);
        }
        let a = &parts[1];
        if a.jet_vars().iter().any(|v: &JetVar| v.order >= top.order) {
            return Err(Error::NotATotalDerivative);
        }
        let piece = a.integrate(Var::of(top.coord, top.order - 1));
        r = &r - &piece.d_x();
        g = &g + &piece;
    }
    Ok(g)
}

/// A local functional represented by one of its densities.
#[derive(Clone, Debug)]
pub struct LocalFunctional {
    density: DiffPoly,
}

impl LocalFunctional {
    pub fn new(density: DiffPoly) -> Self {
        LocalFunctional { density }
    }

    pub fn density(&self) -> &DiffPoly {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.density.n()
    }

    pub fn variational_derivative(&self, alpha: usize) -> DiffPoly {
        variational_derivative(&self.density, alpha)
    }

    pub fn gradient(&self) -> Vec<DiffPoly> {
        gradient(&self.density)
    }

    pub fn is_zero(&self) -> bool {
        is_total_derivative(&self.density)
    }

    /// Equality in the quotient by total derivatives.
    pub fn equivalent(&self, other: &LocalFunctional) -> bool {
        is_total_derivative(&(&self.density - &other.density))
    }

    pub fn add(&self, other: &LocalFunctional) -> LocalFunctional {
        LocalFunctional::new(&self.density + &other.density)
    }

    pub fn scale(&self, s: &Rat) -> LocalFunctional {
        LocalFunctional::new(self.density.scale(s))
    }
}

impl From<DiffPoly> for LocalFunctional {
    fn from(d: DiffPoly) -> Self {
        LocalFunctional::new(d)
    }
}
