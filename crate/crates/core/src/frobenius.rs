//! Frobenius manifolds defined by a potential `F` and a linear Euler field.

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::jetring::CoeffFn;
use crate::linalg::{self, RatMatrix};
use crate::rat::{self, Rat};

/// Normalization in which the Euler data are supplied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EulerConvention {
    /// `E = sum d_a u^a d_a + r^a d_a` with `d_1 = 1`.
    #[default]
    Dubrovin,
    /// The same field scaled by `-2`.
    Sft,
}

/// `E = sum (d_a u^a + r^a) d/du^a` with `E(F) = d_F F + quadratic`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerField {
    pub d: Vec<Rat>,
    pub r: Vec<Rat>,
    pub d_f: Rat,
}

impl EulerField {
    pub fn new(d: Vec<Rat>, r: Vec<Rat>, d_f: Rat) -> Self {
        EulerField { d, r, d_f }
    }

    /// Converts to the Dubrovin normalization.
    pub fn normalized(&self, conv: EulerConvention) -> EulerField {
        match conv {
            EulerConvention::Dubrovin => self.clone(),
            EulerConvention::Sft => {
                let k = rat::rat(-1, 2);
                EulerField {
                    d: self.d.iter().map(|x| x * &k).collect(),
                    r: self.r.iter().map(|x| x * &k).collect(),
                    d_f: &self.d_f * &k,
                }
            }
        }
    }

    /// Component `E^a` as a function.
    pub fn component(&self, a: usize) -> CoeffFn {
        let n = self.d.len();
        &CoeffFn::var(n, a).scale(&self.d[a]) + &CoeffFn::constant(n, self.r[a].clone())
    }

    pub fn apply(&self, f: &CoeffFn) -> CoeffFn {
        f.apply_linear_field(&self.d, &self.r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WdvvReport {
    pub passed: bool,
    /// Index quadruples `(a, b, c, d)` where `c_{abm} eta^{mn} c_{ncd} != c_{acm} eta^{mn} c_{nbd}`.
    pub failures: Vec<(usize, usize, usize, usize)>,
}

/// Remainder `E(F) - d_F F = A_{ab} u^a u^b + B_a u^a + C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiHomogeneity {
    pub d_f: Rat,
    /// Symmetric matrix with `sum A_{ab} u^a u^b` equal to the quadratic part.
    pub a: RatMatrix,
    pub b: Vec<Rat>,
    pub c: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyData {
    pub v: RatMatrix,
    pub r: RatMatrix,
}

#[derive(Clone, Debug)]
pub struct FrobeniusManifold {
    n: usize,
    potential: CoeffFn,
    euler: EulerField,
    eta: RatMatrix,
    eta_inv: RatMatrix,
    c_lower: Vec<Vec<Vec<CoeffFn>>>,
    classical: Vec<Vec<Vec<Rat>>>,
}

impl FrobeniusManifold {
    /// Builds the manifold, computing and validating the metric.
    pub fn new(potential: CoeffFn, euler: EulerField, conv: EulerConvention) -> Result<Self> {
        let n = potential.n();
        if euler.d.len() != n || euler.r.len() != n {
            return Err(Error::DimensionMismatch { left: n, right: euler.d.len() });
        }
        let euler = euler.normalized(conv);
        if euler.d[0].is_zero() {
            return Err(Error::DegenerateManifold);
        }
        let mut c_lower = vec![vec![vec![CoeffFn::zero(n); n]; n]; n];
        for a in 0..n {
            let fa = potential.partial(a);
            for b in a..n {
                let fab = fa.partial(b);
                for c in b..n {
                    let v = fab.partial(c);
                    for (i, j, k) in permutations(a, b, c) {
                        c_lower[i][j][k] = v.clone();
                    }
                }
            }
        }
        let mut eta = linalg::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                eta[a][b] = c_lower[0][a][b].as_constant().ok_or_else(|| {
                    Error::NonConstantMetric(format!("eta_{}{} = {}", a + 1, b + 1, c_lower[0][a][b]))
                })?;
            }
        }
        let eta_inv = linalg::inverse(&eta).ok_or(Error::DegenerateMetric)?;
        let classical = default_classical(&c_lower);
        Ok(FrobeniusManifold { n, potential, euler, eta, eta_inv, c_lower, classical })
    }

    /// `F = u^3/6`, `E = u d_u`, `d_F = 3`.
    pub fn point() -> Self {
        let f = CoeffFn::var(1, 0).pow(3).scale(&rat::rat(1, 6));
        let e = EulerField::new(vec![rat::int(1)], vec![rat::int(0)], rat::int(3));
        Self::new(f, e, EulerConvention::Dubrovin).expect("point preset")
    }

    /// `F = u^2 v/2 + e^v`, `E = u d_u + 2 d_v`, `d_F = 2`.
    pub fn p1() -> Self {
        let u = CoeffFn::var(2, 0);
        let v = CoeffFn::var(2, 1);
        let f = &(&u.pow(2) * &v).scale(&rat::rat(1, 2)) + &CoeffFn::exp_var(2, 1, rat::int(1));
        let e = EulerField::new(vec![rat::int(1), rat::int(0)], vec![rat::int(0), rat::int(2)], rat::int(2));
        Self::new(f, e, EulerConvention::Dubrovin).expect("P1 preset")
    }

    /// Replaces the classical cup product (lowered constants `c_{abc}`).
    pub fn with_classical_cup(mut self, cup: Vec<Vec<Vec<Rat>>>) -> Result<Self> {
        if cup.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: cup.len() });
        }
        self.classical = cup;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn potential(&self) -> &CoeffFn {
        &self.potential
    }

    pub fn euler(&self) -> &EulerField {
        &self.euler
    }

    pub fn metric(&self) -> &RatMatrix {
        &self.eta
    }

    pub fn metric_inverse(&self) -> &RatMatrix {
        &self.eta_inv
    }

    /// `c_{abc} = d^3 F`.
    pub fn c_lower(&self, a: usize, b: usize, c: usize) -> &CoeffFn {
        &self.c_lower[a][b][c]
    }

    /// `c^a_{bc} = eta^{am} c_{mbc}`.
    pub fn c_raised(&self, a: usize, b: usize, c: usize) -> CoeffFn {
        let mut acc = CoeffFn::zero(self.n);
        for m in 0..self.n {
            if !self.eta_inv[a][m].is_zero() {
                acc = &acc + &self.c_lower[m][b][c].scale(&self.eta_inv[a][m]);
            }
        }
        acc
    }

    /// `c^{ab}_c = eta^{am} c^b_{mc}`.
    pub fn c_upper2(&self, a: usize, b: usize, c: usize) -> CoeffFn {
        let mut acc = CoeffFn::zero(self.n);
        for m in 0..self.n {
            if !self.eta_inv[a][m].is_zero() {
                acc = &acc + &self.c_raised(b, m, c).scale(&self.eta_inv[a][m]);
            }
        }
        acc
    }

    /// Lowered classical cup product constants.
    pub fn classical_cup(&self) -> &Vec<Vec<Vec<Rat>>> {
        &self.classical
    }

    /// `c^{cl}_i{}^k{}_a = eta^{km} c^{cl}_{ima}`.
    pub fn classical_raised(&self, i: usize, k: usize, a: usize) -> Rat {
        (0..self.n).map(|m| &self.eta_inv[k][m] * &self.classical[i][m][a]).sum()
    }

    pub fn wdvv_check(&self) -> WdvvReport {
        let n = self.n;
        let raised: Vec<Vec<Vec<CoeffFn>>> =
            (0..n).map(|m| (0..n).map(|c| (0..n).map(|d| self.c_raised(m, c, d)).collect()).collect()).collect();
        let mut failures = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut lhs = CoeffFn::zero(n);
                        let mut rhs = CoeffFn::zero(n);
                        for m in 0..n {
                            lhs = &lhs + &(&self.c_lower[a][b][m] * &raised[m][c][d]);
                            rhs = &rhs + &(&self.c_lower[a][c][m] * &raised[m][b][d]);
                        }
                        if lhs != rhs {
                            failures.push((a, b, c, d));
                        }
                    }
                }
            }
        }
        WdvvReport { passed: failures.is_empty(), failures }
    }

    pub fn quasihomogeneity_check(&self) -> Result<QuasiHomogeneity> {
        let n = self.n;
        let rem = &self.euler.apply(&self.potential) - &self.potential.scale(&self.euler.d_f);
        let mut a = linalg::zeros(n, n);
        let mut b = vec![Rat::zero(); n];
        let mut c = Rat::zero();
        for (k, v) in rem.terms() {
            if k.has_exp() || k.surd || k.degree() > 2 {
                return Err(Error::NotQuasiHomogeneous(format!(
                    "E(F) - d_F F contains {}",
                    CoeffFn::from_key(k.clone(), v.clone())
                )));
            }
            let idx: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, k.powers[i] as usize)).collect();
            match idx.as_slice() {
                [] => c = v.clone(),
                [i] => b[*i] = v.clone(),
                [i, j] if i == j => a[*i][*i] = v.clone(),
                [i, j] => {
                    let h = v * rat::rat(1, 2);
                    a[*i][*j] = h.clone();
                    a[*j][*i] = h;
                }
                _ => unreachable!(),
            }
        }
        Ok(QuasiHomogeneity { d_f: self.euler.d_f.clone(), a, b, c })
    }

    /// Matrix of multiplication by `E`: `(E*)^a_b = E^g c^a_{gb}` at a point.
    pub fn euler_multiplication(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for g in 0..n {
                    s += self.euler.component(g).eval(u)? * self.c_raised(a, g, b).eval(u)?;
                }
                m[(a, b)] = s;
            }
        }
        Ok(m)
    }

    /// Pairwise distinct eigenvalues of `E*` at `u`.
    pub fn semisimple_at(&self, u: &[f64]) -> Result<bool> {
        let m = self.euler_multiplication(u)?;
        let ev = m.complex_eigenvalues();
        let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..ev.len() {
            for j in i + 1..ev.len() {
                if (ev[i] - ev[j]).norm() <= 1e-9 * scale {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Complex dimension `3 - d_F`.
    pub fn charge_dimension(&self) -> Rat {
        rat::int(3) - &self.euler.d_f
    }

    /// `V = (2-n)/2 + 1/2 dE_sft`, `R^g_e = -1/2 r_sft^i c_i{}^g{}_e` with
    /// `E_sft = -2 E`.
    pub fn monodromy(&self) -> MonodromyData {
        let n = self.n;
        let dim = self.charge_dimension();
        let base = (rat::int(2) - dim) * rat::rat(1, 2);
        let mut v = linalg::zeros(n, n);
        let mut r = linalg::zeros(n, n);
        for g in 0..n {
            v[g][g] = &base - &self.euler.d[g];
            for e in 0..n {
                let mut acc = Rat::zero();
                for i in 0..n {
                    acc += &self.euler.r[i] * self.classical_raised(i, g, e);
                }
                r[g][e] = acc;
            }
        }
        MonodromyData { v, r }
    }

    /// Second metric `g^{ab} = E^g c^{ab}_g`.
    pub fn intersection_form(&self) -> Vec<Vec<CoeffFn>> {
        let n = self.n;
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut acc = CoeffFn::zero(n);
                        for g in 0..n {
                            acc = &acc + &(&self.euler.component(g) * &self.c_upper2(a, b, g));
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// Lowered form `g_{ab} = E_g c^g_{ab}` with `E_g = eta_{gm} E^m`.
    pub fn lowered_second_metric(&self) -> Vec<Vec<CoeffFn>> {
        let n = self.n;
        let e_low: Vec<CoeffFn> = (0..n)
            .map(|g| {
                let mut acc = CoeffFn::zero(n);
                for m in 0..n {
                    acc = &acc + &self.euler.component(m).scale(&self.eta[g][m]);
                }
                acc
            })
            .collect();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut acc = CoeffFn::zero(n);
                        for g in 0..n {
                            acc = &acc + &(&e_low[g] * &self.c_raised(g, a, b));
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// Evaluates the product `x * y` of tangent vectors at `u`.
    pub fn multiply_at(&self, u: &[f64], x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (a, o) in out.iter_mut().enumerate() {
            for b in 0..n {
                for c in 0..n {
                    if x[b] != 0.0 && y[c] != 0.0 {
                        *o += self.c_raised(a, b, c).eval(u)? * x[b] * y[c];
                    }
                }
            }
        }
        Ok(out)
    }
}

fn permutations(a: usize, b: usize, c: usize) -> [(usize, usize, usize); 6] {
    [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
}

/// The constant, exponential-free part of `c_{abc}` at the origin.
fn default_classical(c: &[Vec<Vec<CoeffFn>>]) -> Vec<Vec<Vec<Rat>>> {
    c.iter()
        .map(|m| {
            m.iter()
                .map(|row| {
                    row.iter()
                        .map(|f| f.exp_free_part().at_origin().as_constant().unwrap_or_else(Rat::zero))
                        .collect()
                })
                .collect()
        })
        .collect()
}

impl Default for FrobeniusManifold {
    fn default() -> Self {
        Self::point()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn metrics() {
        assert_eq!(FrobeniusManifold::point().metric(), &vec![vec![int(1)]]);
        assert_eq!(FrobeniusManifold::p1().metric(), &vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
        let f = CoeffFn::var(1, 0).pow(4).scale(&rat(1, 24));
        let e = EulerField::new(vec![int(1)], vec![int(0)], int(4));
        assert!(matches!(
            FrobeniusManifold::new(f, e, EulerConvention::Dubrovin),
            Err(Error::NonConstantMetric(_))
        ));
    }

    #[test]
    fn structure_constants() {
        let p = FrobeniusManifold::point();
        assert_eq!(p.c_raised(0, 0, 0), CoeffFn::one(1));
        let q = FrobeniusManifold::p1();
        assert_eq!(q.c_lower(1, 1, 1), &CoeffFn::exp_var(2, 1, int(1)));
        assert_eq!(q.c_lower(0, 0, 1), &CoeffFn::one(2));
        assert!(q.c_lower(0, 0, 0).is_zero());
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(q.c_lower(0, a, b).as_constant().unwrap(), q.metric()[a][b]);
            }
        }
    }

    #[test]
    fn wdvv_and_homogeneity() {
        assert!(FrobeniusManifold::point().wdvv_check().passed);
        assert!(FrobeniusManifold::p1().wdvv_check().passed);
        let qh = FrobeniusManifold::p1().quasihomogeneity_check().unwrap();
        assert_eq!(qh.a, vec![vec![int(1), int(0)], vec![int(0), int(0)]]);
        let qp = FrobeniusManifold::point().quasihomogeneity_check().unwrap();
        assert_eq!(qp.a, vec![vec![int(0)]]);
        let wrong = FrobeniusManifold::new(
            FrobeniusManifold::p1().potential().clone(),
            EulerField::new(vec![int(1), int(0)], vec![int(0), int(1)], int(2)),
            EulerConvention::Dubrovin,
        )
        .unwrap();
        assert!(matches!(wrong.quasihomogeneity_check(), Err(Error::NotQuasiHomogeneous(_))));
    }

    #[test]
    fn semisimplicity() {
        assert!(FrobeniusManifold::point().semisimple_at(&[1.0]).unwrap());
        assert!(FrobeniusManifold::p1().semisimple_at(&[0.0, 0.0]).unwrap());
        // F = u^2 v/2 + v^3/6 with E = u du + v dv: E* = u + v c_v, nilpotent part at v = 0
        let u = CoeffFn::var(2, 0);
        let v = CoeffFn::var(2, 1);
        let f = &(&u.pow(2) * &v).scale(&rat(1, 2)) + &v.pow(3).scale(&rat(1, 6));
        let m = FrobeniusManifold::new(
            f,
            EulerField::new(vec![int(1), int(1)], vec![int(0), int(0)], int(3)),
            EulerConvention::Dubrovin,
        )
        .unwrap();
        assert!(!m.semisimple_at(&[1.0, 0.0]).unwrap());
        assert!(m.semisimple_at(&[1.0, 1.0]).unwrap());
    }

    #[test]
    fn monodromy_matrices() {
        let p = FrobeniusManifold::point().monodromy();
        assert_eq!(p.v, vec![vec![int(0)]]);
        assert_eq!(p.r, vec![vec![int(0)]]);
        let q = FrobeniusManifold::p1().monodromy();
        assert_eq!(q.v, vec![vec![rat(-1, 2), int(0)], vec![int(0), rat(1, 2)]]);
        assert_eq!(q.r, vec![vec![int(0), int(0)], vec![int(2), int(0)]]);
        assert_eq!(linalg::mat_mul(&q.r, &q.r), linalg::zeros(2, 2));
    }

    #[test]
    fn sft_convention_rescales() {
        let q = FrobeniusManifold::p1();
        let e = EulerField::new(vec![int(-2), int(0)], vec![int(0), int(-4)], int(-4));
        let s = FrobeniusManifold::new(q.potential().clone(), e, EulerConvention::Sft).unwrap();
        assert_eq!(s.euler(), q.euler());
    }

    #[test]
    fn second_metric_symmetric() {
        let q = FrobeniusManifold::p1();
        let g = q.lowered_second_metric();
        assert_eq!(g[0][1], g[1][0]);
        let gi = q.intersection_form();
        assert_eq!(gi[1][1], CoeffFn::constant(2, int(2)));
        assert_eq!(gi[0][1], CoeffFn::var(2, 0));
        assert_eq!(gi[0][0], CoeffFn::exp_var(2, 1, int(1)).scale(&int(2)));
    }
}
