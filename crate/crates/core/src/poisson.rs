//! Delta-distribution Poisson operators, brackets of local functionals,
//! Hamiltonian flows and the hydrodynamic (Dubrovin–Novikov) conditions.
//!
//! An operator is stored as the matrix differential operator
//! `P^{ab} = sum_s a_s^{ab} d_x^s`, which corresponds to the bracket
//! `{u^a(x), u^b(y)} = sum_s a_s^{ab} delta^{(s)}(x - y)`.

use std::collections::BTreeMap;

use num_traits::One;

use crate::error::{Error, Result};
use crate::jetring::{CoeffFn, DiffPoly, JetVar, TermKey};
use crate::linalg::RatMatrix;
use crate::localfunc::LocalFunctional;
use crate::par::{self, Execution};
use crate::rat::{self, Rat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonOperator {
    n: usize,
    coeffs: BTreeMap<(usize, usize, u32), DiffPoly>,
    truncation: Option<u32>,
}

impl PoissonOperator {
    pub fn zero(n: usize) -> Self {
        PoissonOperator { n, coeffs: BTreeMap::new(), truncation: None }
    }

    /// `eta^{ab} delta'`.
    pub fn constant(eta_inv: &RatMatrix) -> Self {
        let n = eta_inv.len();
        let mut p = Self::zero(n);
        for a in 0..n {
            for b in 0..n {
                p.set(a, b, 1, DiffPoly::constant(n, eta_inv[a][b].clone()));
            }
        }
        p
    }

    pub fn identity(n: usize) -> Self {
        let mut p = Self::zero(n);
        for a in 0..n {
            p.set(a, a, 0, DiffPoly::one(n));
        }
        p
    }

    /// Keeps only terms up to `eps^order` in every later computation.
    pub fn with_truncation(mut self, order: u32) -> Self {
        self.truncation = Some(order);
        self.coeffs = std::mem::take(&mut self.coeffs)
            .into_iter()
            .map(|(k, v)| (k, v.truncate(order)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        self
    }

    pub fn truncation(&self) -> Option<u32> {
        self.truncation
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn trunc(&self, p: DiffPoly) -> DiffPoly {
        match self.truncation {
            Some(o) => p.truncate(o),
            None => p,
        }
    }

    pub fn set(&mut self, a: usize, b: usize, s: u32, c: DiffPoly) {
        let c = self.trunc(c);
        if c.is_zero() {
            self.coeffs.remove(&(a, b, s));
        } else {
            self.coeffs.insert((a, b, s), c);
        }
    }

    pub fn add_to(&mut self, a: usize, b: usize, s: u32, c: &DiffPoly) {
        let cur = self.entry(a, b, s);
        self.set(a, b, s, &cur + c);
    }

    /// The coefficient `a_s^{ab}`.
    pub fn entry(&self, a: usize, b: usize, s: u32) -> DiffPoly {
        self.coeffs.get(&(a, b, s)).cloned().unwrap_or_else(|| DiffPoly::zero(self.n))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize, u32), &DiffPoly)> {
        self.coeffs.iter()
    }

    pub fn max_order(&self) -> u32 {
        self.coeffs.keys().map(|k| k.2).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &PoissonOperator) -> PoissonOperator {
        let mut out = self.clone();
        for ((a, b, s), c) in &other.coeffs {
            out.add_to(*a, *b, *s, c);
        }
        out
    }

    pub fn scale(&self, r: &Rat) -> PoissonOperator {
        let mut out = Self::zero(self.n);
        out.truncation = self.truncation;
        for ((a, b, s), c) in &self.coeffs {
            out.set(*a, *b, *s, c.scale(r));
        }
        out
    }

    pub fn sub(&self, other: &PoissonOperator) -> PoissonOperator {
        self.add(&other.scale(&-Rat::one()))
    }

    /// Applies the operator to a covector `(f_b)`: `(P f)^a = sum a_s^{ab} d_x^s f_b`.
    pub fn apply(&self, f: &[DiffPoly]) -> Result<Vec<DiffPoly>> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: f.len() });
        }
        let mut derivs: BTreeMap<(usize, u32), DiffPoly> = BTreeMap::new();
        let mut out = vec![DiffPoly::zero(self.n); self.n];
        for ((a, b, s), c) in &self.coeffs {
            f[*b].check_dim(c)?;
            let d = derivs.entry((*b, *s)).or_insert_with(|| self.trunc(f[*b].d_x_n(*s)));
            out[*a] = &out[*a] + &self.trunc(c * d);
        }
        Ok(out)
    }

    /// Components of the Hamiltonian vector field `u^a_t = {u^a, H}`.
    pub fn ham_flow(&self, h: &LocalFunctional) -> Result<Vec<DiffPoly>> {
        if h.dim() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: h.dim() });
        }
        self.apply(&h.gradient())
    }

    /// Density of `{F, G} = int dF/du^a P^{ab} dG/du^b`.
    pub fn bracket_density(&self, f: &LocalFunctional, g: &LocalFunctional) -> Result<DiffPoly> {
        if f.dim() != g.dim() {
            return Err(Error::DimensionMismatch { left: f.dim(), right: g.dim() });
        }
        let flow = self.ham_flow(g)?;
        let grad = f.gradient();
        let mut out = DiffPoly::zero(self.n);
        for (x, y) in grad.iter().zip(&flow) {
            out = &out + &(x * y);
        }
        Ok(self.trunc(out))
    }

    pub fn bracket(&self, f: &LocalFunctional, g: &LocalFunctional) -> Result<LocalFunctional> {
        Ok(LocalFunctional::new(self.bracket_density(f, g)?))
    }

    /// Formal adjoint: `(P^dag)^{ab}_j = sum_{s >= j} (-1)^s C(s,j) d_x^{s-j} a_s^{ba}`.
    pub fn adjoint(&self) -> PoissonOperator {
        let mut out = Self::zero(self.n);
        out.truncation = self.truncation;
        for ((a, b, s), c) in &self.coeffs {
            for j in 0..=*s {
                let sign = if s % 2 == 0 { Rat::one() } else { -Rat::one() };
                let coef = sign * Rat::from_integer(rat::binomial(*s, j));
                out.add_to(*b, *a, j, &c.d_x_n(s - j).scale(&coef));
            }
        }
        out
    }

    /// Composition `self o other` of matrix differential operators.
    pub fn compose(&self, other: &PoissonOperator) -> PoissonOperator {
        let mut out = Self::zero(self.n);
        out.truncation = match (self.truncation, other.truncation) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        for ((a, m, i), ca) in &self.coeffs {
            for ((m2, b, j), cb) in &other.coeffs {
                if m != m2 {
                    continue;
                }
                // (a d^i)(b d^j) = a sum_k C(i,k) d^k(b) d^{i-k+j}
                for k in 0..=*i {
                    let coef = Rat::from_integer(rat::binomial(*i, k));
                    let term = out.trunc(&(ca * &cb.d_x_n(k)) * &DiffPoly::constant(self.n, coef));
                    out.add_to(*a, *b, i - k + j, &term);
                }
            }
        }
        out
    }

    /// Coefficients of the skew-adjointness defect `P + P^dag` up to `eps^order`.
    pub fn check_antisymmetry(&self, order: u32) -> AntisymmetryReport {
        let defect = self.add(&self.adjoint());
        let violations: Vec<(usize, usize, u32, DiffPoly)> = defect
            .coeffs
            .iter()
            .map(|((a, b, s), c)| (*a, *b, *s, c.truncate(order)))
            .filter(|(_, _, _, c)| !c.is_zero())
            .collect();
        AntisymmetryReport { passed: violations.is_empty(), violations }
    }

    /// The hydrodynamic part: `eps^0`, `g = a_1` jet-free, `Gamma` from the
    /// `u_x`-linear part of `a_0`.
    pub fn hydro_part(&self) -> HydroBracket {
        let n = self.n;
        let mut g = vec![vec![CoeffFn::zero(n); n]; n];
        let mut gamma = vec![vec![vec![CoeffFn::zero(n); n]; n]; n];
        for ((a, b, s), c) in &self.coeffs {
            for (k, f) in c.terms() {
                if k.eps != 0 {
                    continue;
                }
                if *s == 1 && k.mono.is_one() {
                    g[*a][*b] = &g[*a][*b] + f;
                }
                if *s == 0 && k.jet_degree == 1 {
                    let (v, _) = k.mono.factors()[0];
                    gamma[*a][*b][v.coord] = &gamma[*a][*b][v.coord] + f;
                }
            }
        }
        HydroBracket { n, g, gamma }
    }
}

#[derive(Clone, Debug)]
pub struct AntisymmetryReport {
    pub passed: bool,
    /// `(a, b, j, coefficient of d^j in (P + P^dag)^{ab})`.
    pub violations: Vec<(usize, usize, u32, DiffPoly)>,
}

/// `g^{ab}(u) delta' + Gamma^{ab}_c(u) u^c_x delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HydroBracket {
    pub n: usize,
    pub g: Vec<Vec<CoeffFn>>,
    /// `gamma[a][b][c] = Gamma^{ab}_c`.
    pub gamma: Vec<Vec<Vec<CoeffFn>>>,
}

#[derive(Clone, Debug, Default)]
pub struct DnReport {
    pub symmetric: bool,
    pub christoffel: bool,
    pub flat: bool,
    pub failures: Vec<String>,
}

impl DnReport {
    pub fn passed(&self) -> bool {
        self.symmetric && self.christoffel && self.flat
    }
}

/// Determinant of a small matrix of coefficient functions by cofactor expansion.
pub fn coeff_det(m: &[Vec<CoeffFn>]) -> CoeffFn {
    let n = m.len();
    let dim = m.first().and_then(|r| r.first()).map_or(0, CoeffFn::n);
    match n {
        0 => CoeffFn::one(dim),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = CoeffFn::zero(dim);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor = minor(m, 0, j);
                let t = &m[0][j] * &coeff_det(&minor);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

fn minor(m: &[Vec<CoeffFn>], r: usize, c: usize) -> Vec<Vec<CoeffFn>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Adjugate matrix (`adj(m) m = det(m) I`).
pub fn coeff_adjugate(m: &[Vec<CoeffFn>]) -> Vec<Vec<CoeffFn>> {
    let n = m.len();
    let dim = m.first().and_then(|r| r.first()).map_or(0, CoeffFn::n);
    if n == 1 {
        return vec![vec![CoeffFn::one(dim)]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = coeff_det(&minor(m, j, i));
                    if (i + j) % 2 == 0 {
                        c
                    } else {
                        -&c
                    }
                })
                .collect()
        })
        .collect()
}

impl HydroBracket {
    pub fn to_operator(&self) -> PoissonOperator {
        let n = self.n;
        let mut p = PoissonOperator::zero(n);
        for a in 0..n {
            for b in 0..n {
                p.set(a, b, 1, DiffPoly::from_coeff(self.g[a][b].clone()));
                let mut a0 = DiffPoly::zero(n);
                for c in 0..n {
                    let ux = DiffPoly::jet(n, c, 1);
                    a0 = &a0 + &ux.mul_coeff(&self.gamma[a][b][c]);
                }
                p.set(a, b, 0, a0);
            }
        }
        p
    }

    pub fn sub_scaled(&self, other: &HydroBracket, lambda: &Rat) -> HydroBracket {
        let n = self.n;
        let g = (0..n)
            .map(|a| (0..n).map(|b| &self.g[a][b] - &other.g[a][b].scale(lambda)).collect())
            .collect();
        let gamma = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).map(|c| &self.gamma[a][b][c] - &other.gamma[a][b][c].scale(lambda)).collect())
                    .collect()
            })
            .collect();
        HydroBracket { n, g, gamma }
    }

    /// Levi-Civita contravariant Christoffels multiplied by `det g`:
    /// `det * Gamma^{ab}_c = 1/2 det d_c g^{ab}
    ///   + 1/2 (g^{am} d_m g^{bs} - g^{bm} d_m g^{as}) adj(g)_{sc}`.
    pub fn scaled_levi_civita(&self) -> (CoeffFn, Vec<Vec<Vec<CoeffFn>>>) {
        let n = self.n;
        let det = coeff_det(&self.g);
        let adj = coeff_adjugate(&self.g);
        let half = rat::rat(1, 2);
        let mut out = vec![vec![vec![CoeffFn::zero(n); n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                // w_s = g^{am} d_m g^{bs} - g^{bm} d_m g^{as}
                let w: Vec<CoeffFn> = (0..n)
                    .map(|s| {
                        let mut acc = CoeffFn::zero(n);
                        for m in 0..n {
                            acc = &acc + &(&self.g[a][m] * &self.g[b][s].partial(m));
                            acc = &acc - &(&self.g[b][m] * &self.g[a][s].partial(m));
                        }
                        acc
                    })
                    .collect();
                for c in 0..n {
                    let mut acc = &det * &self.g[a][b].partial(c);
                    for s in 0..n {
                        acc = &acc + &(&w[s] * &adj[s][c]);
                    }
                    out[a][b][c] = acc.scale(&half);
                }
            }
        }
        (det, out)
    }

    /// Contravariant curvature built from the stored `Gamma`:
    /// `R^{abc}_d = g^{am}(d_m G^{bc}_d - d_d G^{bc}_m) + G^{ab}_m G^{mc}_d - G^{ac}_m G^{mb}_d`.
    pub fn curvature(&self) -> Vec<((usize, usize, usize, usize), CoeffFn)> {
        let n = self.n;
        let gm = &self.gamma;
        let idx: Vec<(usize, usize, usize, usize)> = (0..n)
            .flat_map(|a| (0..n).flat_map(move |b| (0..n).flat_map(move |c| (0..n).map(move |d| (a, b, c, d)))))
            .collect();
        par::map(Execution::Parallel, &idx, |&(a, b, c, d)| {
            let mut acc = CoeffFn::zero(n);
            for m in 0..n {
                let t = &gm[b][c][d].partial(m) - &gm[b][c][m].partial(d);
                acc = &acc + &(&self.g[a][m] * &t);
                acc = &acc + &(&gm[a][b][m] * &gm[m][c][d]);
                acc = &acc - &(&gm[a][c][m] * &gm[m][b][d]);
            }
            ((a, b, c, d), acc)
        })
        .into_iter()
        .filter(|(_, v)| !v.is_zero())
        .collect()
    }

    /// Symmetry, Levi-Civita and flatness conditions, all exact.
    pub fn dn_check(&self) -> Result<DnReport> {
        let n = self.n;
        let mut rep = DnReport { symmetric: true, christoffel: true, flat: true, failures: Vec::new() };
        for a in 0..n {
            for b in a + 1..n {
                if self.g[a][b] != self.g[b][a] {
                    rep.symmetric = false;
                    rep.failures.push(format!("g^{{{}{}}} != g^{{{}{}}}", a + 1, b + 1, b + 1, a + 1));
                }
            }
        }
        let (det, lc) = self.scaled_levi_civita();
        if det.is_zero() {
            return Err(Error::DegenerateMetric);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if &det * &self.gamma[a][b][c] != lc[a][b][c] {
                        rep.christoffel = false;
                        rep.failures.push(format!("Gamma^{{{}{}}}_{} is not Levi-Civita", a + 1, b + 1, c + 1));
                    }
                }
            }
        }
        for ((a, b, c, d), _) in self.curvature() {
            rep.flat = false;
            rep.failures.push(format!("R^{{{}{}{}}}_{} != 0", a + 1, b + 1, c + 1, d + 1));
        }
        Ok(rep)
    }
}

/// Numerical value of a jet-linear `a_0` hydrodynamic coefficient, used in reports.
pub fn gamma_of(a0: &DiffPoly, c: usize) -> CoeffFn {
    let n = a0.n();
    let mut out = CoeffFn::zero(n);
    for (k, f) in a0.terms() {
        if k == &TermKey::new(0, crate::jetring::JetMono::single(JetVar::new(c, 1), 1)) {
            out = &out + f;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfunc::is_total_derivative;
    use crate::rat::{int, rat};
    use num_traits::Zero;

    fn u() -> DiffPoly {
        DiffPoly::coord(1, 0)
    }

    fn kdv1() -> PoissonOperator {
        PoissonOperator::constant(&vec![vec![int(1)]])
    }

    fn kdv2() -> PoissonOperator {
        let mut p = PoissonOperator::zero(1);
        p.set(0, 0, 1, u());
        p.set(0, 0, 0, DiffPoly::jet(1, 0, 1).scale(&rat(1, 2)));
        p.set(0, 0, 3, DiffPoly::eps(1).pow(2).scale(&rat(1, 8)));
        p
    }

    fn lf(p: DiffPoly) -> LocalFunctional {
        LocalFunctional::new(p)
    }

    #[test]
    fn bracket_examples() {
        let h2 = lf(u().pow(2).scale(&rat(1, 2)));
        let h3 = lf(u().pow(3).scale(&rat(1, 6)));
        let h4 = lf(u().pow(4).scale(&rat(1, 24)));
        assert!(kdv1().bracket(&h2, &h2).unwrap().is_zero());
        let d = kdv1().bracket_density(&h3, &h2).unwrap();
        assert_eq!(d, (&u().pow(2) * &DiffPoly::jet(1, 0, 1)).scale(&rat(1, 2)));
        assert!(is_total_derivative(&d));
        assert!(kdv1().bracket(&h3, &h4).unwrap().is_zero());
    }

    #[test]
    fn second_kdv_flow() {
        let h = lf(u().pow(2).scale(&rat(1, 2)));
        let flow = kdv2().ham_flow(&h).unwrap();
        let expect = &(&u() * &DiffPoly::jet(1, 0, 1)).scale(&rat(3, 2))
            + &DiffPoly::jet(1, 0, 3).mul_eps(2).scale(&rat(1, 8));
        assert_eq!(flow[0], expect);
    }

    #[test]
    fn antisymmetry_examples() {
        assert!(kdv1().check_antisymmetry(4).passed);
        assert!(kdv2().check_antisymmetry(4).passed);
        let mut bad = PoissonOperator::zero(1);
        bad.set(0, 0, 1, u());
        assert!(!bad.check_antisymmetry(0).passed);
    }

    #[test]
    fn dn_examples() {
        let point = kdv2().hydro_part();
        assert_eq!(point.gamma[0][0][0], CoeffFn::constant(1, rat(1, 2)));
        assert!(point.dn_check().unwrap().passed());
        let flat = kdv1().hydro_part();
        assert!(flat.dn_check().unwrap().passed());
        let toda = HydroBracket {
            n: 2,
            g: vec![
                vec![CoeffFn::exp_var(2, 1, int(1)).scale(&int(2)), CoeffFn::var(2, 0)],
                vec![CoeffFn::var(2, 0), CoeffFn::constant(2, int(2))],
            ],
            gamma: vec![
                vec![
                    vec![CoeffFn::zero(2), CoeffFn::exp_var(2, 1, int(1))],
                    vec![CoeffFn::zero(2), CoeffFn::zero(2)],
                ],
                vec![vec![CoeffFn::one(2), CoeffFn::zero(2)], vec![CoeffFn::zero(2), CoeffFn::zero(2)]],
            ],
        };
        let rep = toda.dn_check().unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn curvature_formula_detects_curved_metric() {
        // conformal metric (1 + u^2) delta on R^2 with its Levi-Civita Gamma
        let n = 2;
        let f = &CoeffFn::one(n) + &CoeffFn::var(n, 0).pow(2);
        let df = [f.partial(0), f.partial(1)];
        let delta = |a: usize, b: usize| if a == b { Rat::one() } else { Rat::zero() };
        let half = rat(1, 2);
        let g = (0..n).map(|a| (0..n).map(|b| f.scale(&delta(a, b))).collect()).collect();
        let gamma = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        (0..n)
                            .map(|c| {
                                let t = &(&df[c].scale(&delta(a, b)) + &df[a].scale(&delta(b, c)))
                                    - &df[b].scale(&delta(a, c));
                                t.scale(&half)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let hb = HydroBracket { n, g, gamma };
        let rep = hb.dn_check().unwrap();
        assert!(rep.christoffel, "{:?}", rep.failures);
        assert!(!rep.flat);
    }

    #[test]
    fn flat_metric_in_curvilinear_coordinates() {
        // g^{uu}=1, g^{uv}=2u, g^{vv}=4u^2+1 (pull back of the identity by v = w + u^2)
        let n = 2;
        let u = CoeffFn::var(n, 0);
        let g = vec![
            vec![CoeffFn::one(n), u.scale(&int(2))],
            vec![u.scale(&int(2)), &u.pow(2).scale(&int(4)) + &CoeffFn::one(n)],
        ];
        let mut hb = HydroBracket { n, g, gamma: vec![vec![vec![CoeffFn::zero(n); n]; n]; n] };
        let (det, lc) = hb.scaled_levi_civita();
        assert_eq!(det, CoeffFn::one(n));
        hb.gamma = lc;
        assert!(hb.dn_check().unwrap().passed());
    }

    #[test]
    fn composition_and_adjoint() {
        let d = kdv1();
        let dd = d.compose(&d);
        assert_eq!(dd.entry(0, 0, 2), DiffPoly::one(1));
        // (u d)^dag = -d o u = -u d - u_x
        let mut ud = PoissonOperator::zero(1);
        ud.set(0, 0, 1, u());
        let adj = ud.adjoint();
        assert_eq!(adj.entry(0, 0, 1), -&u());
        assert_eq!(adj.entry(0, 0, 0), -&DiffPoly::jet(1, 0, 1));
        assert_eq!(adj.adjoint(), ud);
    }
}
