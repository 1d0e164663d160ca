//! Miura and quasi-Miura transformations.

use crate::error::{Error, Result};
use crate::jetring::{CoeffFn, DiffPoly, JetMono, RatDiffFn, Var};
use crate::linalg;
use crate::poisson::PoissonOperator;
use crate::rat::{self, Rat};

/// `u~^a = sum_k eps^k u~^a_k(u, u_x, ...)`, truncated at `eps^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiuraTransform {
    n: usize,
    components: Vec<DiffPoly>,
    order: u32,
}

/// Evolutionary derivative `D_U f = sum_{b,s} df/du^{b,s} d_x^s U^b`.
pub fn evolutionary_derivative(f: &DiffPoly, flow: &[DiffPoly], order: Option<u32>) -> DiffPoly {
    let n = f.n();
    let trunc = |p: DiffPoly| match order {
        Some(o) => p.truncate(o),
        None => p,
    };
    let mut out = DiffPoly::zero(n);
    for b in 0..n {
        let d0 = f.partial(Var::Coord(b));
        if !d0.is_zero() {
            out = &out + &trunc(&d0 * &flow[b]);
        }
    }
    for v in f.jet_vars() {
        let d = f.partial(Var::Jet(v));
        out = &out + &trunc(&d * &trunc(flow[v.coord].d_x_n(v.order)));
    }
    out
}

impl MiuraTransform {
    pub fn new(components: Vec<DiffPoly>, order: u32) -> Result<Self> {
        let n = components.len();
        for c in &components {
            if c.n() != n {
                return Err(Error::DimensionMismatch { left: n, right: c.n() });
            }
        }
        let components = components.into_iter().map(|c| c.truncate(order)).collect();
        Ok(MiuraTransform { n, components, order })
    }

    pub fn identity(n: usize, order: u32) -> Self {
        MiuraTransform { n, components: (0..n).map(|a| DiffPoly::coord(n, a)).collect(), order }
    }

    /// `u~ = A u`.
    pub fn linear(a: &linalg::RatMatrix, order: u32) -> Self {
        let n = a.len();
        let components = (0..n)
            .map(|i| (0..n).fold(DiffPoly::zero(n), |acc, j| &acc + &DiffPoly::coord(n, j).scale(&a[i][j])))
            .collect();
        MiuraTransform { n, components, order }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn components(&self) -> &[DiffPoly] {
        &self.components
    }

    /// Jacobian `d u~^a_0 / du^b` of the `eps^0` part, if it is jet free.
    pub fn leading_jacobian(&self) -> Result<Vec<Vec<CoeffFn>>> {
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        for c in &self.components {
            let lead = c.eps_coeff(0);
            let f = lead
                .as_coeff()
                .ok_or_else(|| Error::NonInvertible("eps^0 part depends on jets".into()))?;
            out.push((0..n).map(|b| f.partial(b)).collect());
        }
        Ok(out)
    }

    /// Checks `det(d u~_0/du) != 0` identically.
    pub fn check_invertible(&self) -> Result<()> {
        let j = self.leading_jacobian()?;
        if crate::poisson::coeff_det(&j).is_zero() {
            return Err(Error::NonInvertible("degenerate leading Jacobian".into()));
        }
        Ok(())
    }

    /// Linearization `L^{ab} = sum_s du~^a/du^{b,s} d_x^s`.
    pub fn linearization(&self) -> PoissonOperator {
        let n = self.n;
        let mut l = PoissonOperator::zero(n);
        for (a, c) in self.components.iter().enumerate() {
            for b in 0..n {
                let d = c.partial(Var::Coord(b));
                l.set(a, b, 0, d);
            }
            for v in c.jet_vars() {
                l.set(a, v.coord, v.order, c.partial(Var::Jet(v)));
            }
        }
        l.with_truncation(self.order)
    }

    fn check_order(&self, order: u32) -> Result<()> {
        if order > self.order {
            Err(Error::TruncationOverflow { requested: order, available: self.order })
        } else {
            Ok(())
        }
    }

    /// `u~_t` in the original variables for `u_t = U`.
    pub fn push_flow(&self, flow: &[DiffPoly], order: u32) -> Result<Vec<DiffPoly>> {
        self.check_order(order)?;
        if flow.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: flow.len() });
        }
        Ok(self
            .components
            .iter()
            .map(|c| evolutionary_derivative(c, flow, Some(order)))
            .collect())
    }

    /// `u~_t` expressed in the new variables (requires an invertible leading part).
    pub fn push_flow_new(&self, flow: &[DiffPoly], order: u32) -> Result<Vec<DiffPoly>> {
        let w = self.push_flow(flow, order)?;
        let inv = self.invert(order)?;
        w.iter().map(|c| substitute(c, inv.components(), order)).collect()
    }

    /// `L P L^dag`, the bracket in the new variables written in the old ones.
    pub fn push_bracket(&self, p: &PoissonOperator, order: u32) -> Result<PoissonOperator> {
        self.check_order(order)?;
        let l = self.linearization().with_truncation(order);
        let p = p.clone().with_truncation(order);
        Ok(l.compose(&p).compose(&l.adjoint()))
    }

    /// `self o other`: substitutes `u -> other(u)` into `self`.
    pub fn compose(&self, other: &MiuraTransform) -> Result<MiuraTransform> {
        let order = self.order.min(other.order);
        let comps = self
            .components
            .iter()
            .map(|c| substitute(c, &other.components, order))
            .collect::<Result<Vec<_>>>()?;
        MiuraTransform::new(comps, order)
    }

    /// Series inverse for a transform whose `eps^0` part is `A u` with `A`
    /// constant and invertible.
    pub fn invert(&self, order: u32) -> Result<MiuraTransform> {
        self.check_order(order)?;
        let n = self.n;
        let mut a = linalg::zeros(n, n);
        let mut rest = Vec::with_capacity(n);
        for (i, c) in self.components.iter().enumerate() {
            let lead = c.eps_coeff(0);
            let f = lead
                .as_coeff()
                .ok_or_else(|| Error::NonInvertible("eps^0 part depends on jets".into()))?;
            let lin = f
                .as_linear()
                .ok_or_else(|| Error::NonInvertible("eps^0 part is not linear".into()))?;
            a[i] = lin;
            rest.push(c - &lead);
        }
        let a_inv = linalg::inverse(&a).ok_or_else(|| Error::NonInvertible("singular leading matrix".into()))?;
        let apply_inv = |v: &[DiffPoly]| -> Vec<DiffPoly> {
            (0..n)
                .map(|i| (0..n).fold(DiffPoly::zero(n), |acc, j| &acc + &v[j].scale(&a_inv[i][j])))
                .collect()
        };
        let ident: Vec<DiffPoly> = (0..n).map(|a| DiffPoly::coord(n, a)).collect();
        let mut w = apply_inv(&ident);
        for _ in 0..=order {
            let d: Vec<DiffPoly> =
                rest.iter().map(|r| substitute(r, &w, order)).collect::<Result<Vec<_>>>()?;
            let rhs: Vec<DiffPoly> = ident.iter().zip(&d).map(|(x, y)| x - y).collect();
            w = apply_inv(&rhs);
        }
        MiuraTransform::new(w, order)
    }
}

/// Substitutes `u^a -> s^a` (and `u^{a,k} -> d_x^k s^a`) into `f`, truncating at
/// `eps^order`. The `eps^0` part of each `s^a` must be jet free; exponentials
/// additionally require it to be linear.
pub fn substitute(f: &DiffPoly, s: &[DiffPoly], order: u32) -> Result<DiffPoly> {
    let n = s.len();
    let mut base = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    for c in s {
        let lead = c.eps_coeff(0);
        let f0 = lead
            .as_coeff()
            .ok_or_else(|| Error::Unsupported("substitution with a jet-dependent eps^0 part".into()))?;
        base.push(f0);
        delta.push(c - &lead);
    }
    let mut jets: std::collections::BTreeMap<(usize, u32), DiffPoly> = Default::default();
    let mut out = DiffPoly::zero(n);
    for (key, c) in f.terms() {
        if key.eps > order {
            continue;
        }
        let mut term = DiffPoly::monomial(n, key.eps, JetMono::one(), CoeffFn::one(n));
        for (v, e) in key.mono.factors() {
            let d = jets
                .entry((v.coord, v.order))
                .or_insert_with(|| s[v.coord].d_x_n(v.order).truncate(order))
                .clone();
            term = (&term * &d.pow(*e)).truncate(order);
        }
        let budget = order - key.eps;
        let value = taylor(c, 0, &base, &delta, budget)?;
        out = &out + &(&term * &value).truncate(order);
    }
    Ok(out)
}

fn taylor(c: &CoeffFn, i: usize, base: &[CoeffFn], delta: &[DiffPoly], budget: u32) -> Result<DiffPoly> {
    let n = base.len();
    if i == n {
        return Ok(DiffPoly::from_coeff(c.substitute(base)?));
    }
    let mut out = DiffPoly::zero(n);
    let mut deriv = c.clone();
    let mut power = DiffPoly::one(n);
    let mut k = 0u32;
    loop {
        if deriv.is_zero() || power.is_zero() {
            break;
        }
        let inner = taylor(&deriv, i + 1, base, delta, budget)?;
        out = &out + &(&power * &inner).scale(&rat::inv_factorial(k)).truncate(budget);
        k += 1;
        if k > budget {
            break;
        }
        deriv = deriv.partial(i);
        power = (&power * &delta[i]).truncate(budget);
    }
    Ok(out)
}

/// The Riccati map `u = u~^2/4 - kappa u~_x` with `kappa = theta eps/4`
/// (`kappa^2 = -eps^2/8`) written as a transform in the variable `u~`.
pub fn riccati_map(order: u32) -> MiuraTransform {
    let w = DiffPoly::coord(1, 0);
    let kappa = DiffPoly::from_coeff(CoeffFn::theta(1).scale(&rat::rat(1, 4))).mul_eps(1);
    let c = &w.pow(2).scale(&rat::rat(1, 4)) - &(&kappa * &DiffPoly::jet(1, 0, 1));
    MiuraTransform { n: 1, components: vec![c], order }
}

/// Which variable evolves by the dispersionless equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum QmDirection {
    /// `u` solves KdV, `u~ = T(u)` solves `u~_t = u~ u~_x`.
    Forward,
    /// `u` solves `u_t = u u_x`, `u~ = T(u)` solves KdV.
    Backward,
}

/// Where the `eps^4` bracket sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum QmPlacement {
    /// `eps^4 B`.
    Inner,
    /// `eps^4 d_x^2 B`.
    OuterDxx,
}

/// One reading of the KdV quasi-Miura example.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QmConvention {
    /// KdV dispersion `k` in `u_t = u u_x + k eps^2 u_xxx`.
    pub dispersion: Rat,
    pub direction: QmDirection,
    pub placement: QmPlacement,
}

/// Coefficients `a, b, c, d` of
/// `u - a eps^2 (log u_x)_xx + eps^4 [b u4/u_x^2 - c u2 u3/u_x^3 + d u2^3/u_x^4]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QmCoefficients {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
}

impl Default for QmCoefficients {
    fn default() -> Self {
        QmCoefficients { a: rat::rat(1, 12), b: rat::rat(1, 288), c: rat::rat(7, 480), d: rat::rat(1, 90) }
    }
}

#[derive(Clone, Debug)]
pub struct QmOutcome {
    pub convention: QmConvention,
    /// `(eps power, residual is identically zero)`.
    pub orders: Vec<(u32, bool)>,
    /// Residual numerators rendered for the failing orders.
    pub residuals: Vec<(u32, String)>,
}

impl QmOutcome {
    pub fn passed(&self) -> bool {
        self.orders.iter().all(|(_, ok)| *ok)
    }
}

#[derive(Clone, Debug)]
pub struct QmReport {
    pub order: u32,
    pub outcomes: Vec<QmOutcome>,
}

impl QmReport {
    pub fn passing(&self) -> Vec<&QmConvention> {
        self.outcomes.iter().filter(|o| o.passed()).map(|o| &o.convention).collect()
    }

    /// The convention read literally from the formula: forward direction,
    /// `eps^4` bracket unwrapped, dispersion `+1/12`.
    pub fn literal(&self) -> Option<&QmOutcome> {
        self.outcomes.iter().find(|o| {
            o.convention.direction == QmDirection::Forward
                && o.convention.placement == QmPlacement::Inner
                && o.convention.dispersion == rat::rat(1, 12)
        })
    }
}

/// eps-series with rational-function coefficients (index = eps power).
type Series = Vec<RatDiffFn>;

fn series_zero(len: usize) -> Series {
    vec![RatDiffFn::zero(1); len]
}

fn series_mul(a: &Series, b: &Series) -> Series {
    let len = a.len().min(b.len());
    let mut out = series_zero(len);
    for i in 0..len {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..len - i {
            if b[j].is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&a[i].mul(&b[j]));
        }
    }
    out
}

fn series_dx(a: &Series) -> Series {
    a.iter().map(RatDiffFn::d_x).collect()
}

fn rat_evolutionary(f: &RatDiffFn, flow: &[DiffPoly]) -> RatDiffFn {
    let dn = evolutionary_derivative(f.num(), flow, None);
    let dd = evolutionary_derivative(f.den(), flow, None);
    let num = &(&dn * f.den()) - &(f.num() * &dd);
    RatDiffFn::new(num, f.den() * f.den()).expect("nonzero denominator")
}

/// `D_U` on a series, with `U = sum eps^k U_k` given per eps power.
fn series_evolutionary(a: &Series, flow: &[Vec<DiffPoly>]) -> Series {
    let len = a.len();
    let mut out = series_zero(len);
    for (i, t) in a.iter().enumerate() {
        if t.is_zero() {
            continue;
        }
        for (k, u) in flow.iter().enumerate() {
            if i + k >= len || u.iter().all(DiffPoly::is_zero) {
                continue;
            }
            out[i + k] = out[i + k].add(&rat_evolutionary(t, u));
        }
    }
    out
}

/// The quasi-Miura series for the given coefficients and placement.
pub fn quasimiura_series(coeffs: &QmCoefficients, placement: QmPlacement, order: u32) -> Result<Vec<RatDiffFn>> {
    let j = |k: u32| DiffPoly::jet(1, 0, k);
    let mut s = series_zero(order as usize + 1);
    s[0] = RatDiffFn::from_poly(DiffPoly::coord(1, 0));
    if order >= 2 {
        // (log u_x)_xx = u_xxx/u_x - u_xx^2/u_x^2
        let logxx = RatDiffFn::new(j(3), j(1))?.sub(&RatDiffFn::new(j(2).pow(2), j(1).pow(2))?);
        s[2] = logxx.scale(&-coeffs.a.clone());
    }
    if order >= 4 {
        let bracket = RatDiffFn::new(j(4).scale(&coeffs.b), j(1).pow(2))?
            .sub(&RatDiffFn::new((&j(2) * &j(3)).scale(&coeffs.c), j(1).pow(3))?)
            .add(&RatDiffFn::new(j(2).pow(3).scale(&coeffs.d), j(1).pow(4))?);
        s[4] = match placement {
            QmPlacement::Inner => bracket,
            QmPlacement::OuterDxx => bracket.d_x_n(2),
        };
    }
    Ok(s)
}

/// Residual series of one convention.
pub fn quasimiura_residual(coeffs: &QmCoefficients, conv: &QmConvention, order: u32) -> Result<Vec<RatDiffFn>> {
    let len = order as usize + 1;
    let t = quasimiura_series(coeffs, conv.placement, order)?;
    let u = DiffPoly::coord(1, 0);
    let ux = DiffPoly::jet(1, 0, 1);
    let burgers = &u * &ux;
    let mut flow = vec![vec![DiffPoly::zero(1)]; len];
    flow[0] = vec![burgers];
    if conv.direction == QmDirection::Forward && len > 2 {
        flow[2] = vec![DiffPoly::jet(1, 0, 3).scale(&conv.dispersion)];
    }
    let t_t = series_evolutionary(&t, &flow);
    let nonlinear = series_mul(&t, &series_dx(&t));
    let mut res: Vec<RatDiffFn> = t_t.iter().zip(&nonlinear).map(|(a, b)| a.sub(b)).collect();
    if conv.direction == QmDirection::Backward {
        let t3 = series_dx(&series_dx(&series_dx(&t)));
        for k in 2..len {
            res[k] = res[k].sub(&t3[k - 2].scale(&conv.dispersion));
        }
    }
    Ok(res)
}

/// Every convention of the declared grid: dispersion in `{±1/12, ±1/6}`,
/// both directions, both placements of the `eps^4` bracket.
pub fn convention_grid() -> Vec<QmConvention> {
    let mut out = Vec::new();
    for direction in [QmDirection::Forward, QmDirection::Backward] {
        for placement in [QmPlacement::Inner, QmPlacement::OuterDxx] {
            for (p, q) in [(1, 12), (-1, 12), (1, 6), (-1, 6)] {
                out.push(QmConvention { dispersion: rat::rat(p, q), direction, placement });
            }
        }
    }
    out
}

/// Checks the KdV quasi-Miura example at `eps^2` (`order = 2`) or up to
/// `eps^4` (`order = 4`) under every convention of the grid.
pub fn quasimiura_kdv_verify(coeffs: &QmCoefficients, order: u32) -> Result<QmReport> {
    if order != 2 && order != 4 {
        return Err(Error::InvalidInput("order must be 2 or 4".into()));
    }
    let grid = convention_grid();
    let mut outcomes = Vec::new();
    for conv in grid {
        // the eps^4 placement is irrelevant at order 2
        if order == 2 && conv.placement == QmPlacement::OuterDxx {
            continue;
        }
        let res = quasimiura_residual(coeffs, &conv, order)?;
        let mut orders = Vec::new();
        let mut residuals = Vec::new();
        for k in (0..=order).step_by(2) {
            let ok = res[k as usize].is_zero();
            orders.push((k, ok));
            if !ok {
                residuals.push((k, res[k as usize].to_string()));
            }
        }
        outcomes.push(QmOutcome { convention: conv, orders, residuals });
    }
    Ok(QmReport { order, outcomes })
}

impl Default for MiuraTransform {
    fn default() -> Self {
        Self::identity(1, 0)
    }
}
