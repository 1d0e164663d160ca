//! Dispersionless tau-symmetric hierarchy built from a Frobenius manifold.
//!
//! Densities `h_{a,p}` (`p >= -1`) start from `h_{a,-1} = eta_{ab} u^b`,
//! `h_{a,0} = dF/du^a` and satisfy
//!
//! - `d_a d_s h_{b,j} = c^k_{as} d_k h_{b,j-1}`,
//! - `d_1 h_{b,j} = h_{b,j-1}`,
//! - `E(h_{a,j}) - r^i c_i{}^k{}_a h_{k,j-1} = (d_F + j - d_a) h_{a,j}`, with
//!   `c_i{}^k{}_a` the classical cup product.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::frobenius::FrobeniusManifold;
use crate::jetring::{CoeffFn, DiffPoly};
use crate::localfunc::{antiderivative, is_total_derivative, LocalFunctional};
use crate::par::{self, Execution};
use crate::poisson::PoissonOperator;
use crate::rat::{self, Rat};

/// A normalization term that the grading could not fix; set to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizationAmbiguity {
    pub alpha: usize,
    pub level: i64,
    /// `Some(s)` for the coefficient of `u^s`, `None` for the constant term.
    pub direction: Option<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct CommuteReport {
    pub pairs: usize,
    pub criterion_failures: Vec<((usize, i64), (usize, i64))>,
    pub bracket_checked: usize,
    pub bracket_failures: Vec<((usize, i64), (usize, i64))>,
}

impl CommuteReport {
    pub fn passed(&self) -> bool {
        self.criterion_failures.is_empty() && self.bracket_failures.is_empty()
    }
}

#[derive(Debug)]
pub struct Hierarchy {
    fm: FrobeniusManifold,
    /// `levels[p + 1][a] = h_{a,p}`.
    levels: Vec<Vec<CoeffFn>>,
    warnings: Vec<NormalizationAmbiguity>,
    omega: Mutex<BTreeMap<(usize, i64, usize, i64), CoeffFn>>,
}

impl Clone for Hierarchy {
    fn clone(&self) -> Self {
        Hierarchy {
            fm: self.fm.clone(),
            levels: self.levels.clone(),
            warnings: self.warnings.clone(),
            omega: Mutex::new(self.omega.lock().map(|m| m.clone()).unwrap_or_default()),
        }
    }
}

/// Seeds `h_{a,-1} = eta_{ab} u^b` and `h_{a,0} = dF/du^a`.
pub fn seed(fm: &FrobeniusManifold) -> (Vec<CoeffFn>, Vec<CoeffFn>) {
    let n = fm.n();
    let eta = fm.metric();
    let lin = (0..n)
        .map(|a| {
            (0..n).fold(CoeffFn::zero(n), |acc, b| &acc + &CoeffFn::var(n, b).scale(&eta[a][b]))
        })
        .collect();
    let grad = (0..n).map(|a| fm.potential().partial(a)).collect();
    (lin, grad)
}

/// Recovers `P` (up to a constant) from its gradient along the coordinates
/// `vars`, failing when the data are not a gradient.
pub fn potential_from_gradient(w: &[CoeffFn], vars: &[usize], n: usize) -> Result<CoeffFn> {
    let mut p = CoeffFn::zero(n);
    for (i, &v) in vars.iter().enumerate() {
        let rest = &w[i] - &p.partial(v);
        p = &p + &rest.integrate(v);
    }
    for (i, &v) in vars.iter().enumerate() {
        if p.partial(v) != w[i] {
            return Err(Error::IntegrabilityFailure(format!(
                "gradient data are not closed in direction {}",
                v + 1
            )));
        }
    }
    Ok(p)
}

fn level_index(p: i64) -> usize {
    (p + 1) as usize
}

impl Hierarchy {
    /// Builds `h_{a,p}` for `-1 <= p <= pmax`.
    pub fn build(fm: FrobeniusManifold, pmax: i64) -> Result<Self> {
        Self::build_with(fm, pmax, Execution::Parallel)
    }

    pub fn build_with(fm: FrobeniusManifold, pmax: i64, exec: Execution) -> Result<Self> {
        let (h_m1, h_0) = seed(&fm);
        let mut h = Hierarchy {
            fm,
            levels: vec![h_m1, h_0],
            warnings: Vec::new(),
            omega: Mutex::new(BTreeMap::new()),
        };
        for j in 1..=pmax {
            h.extend(j, exec)?;
        }
        Ok(h)
    }

    pub fn manifold(&self) -> &FrobeniusManifold {
        &self.fm
    }

    pub fn n(&self) -> usize {
        self.fm.n()
    }

    pub fn pmax(&self) -> i64 {
        self.levels.len() as i64 - 2
    }

    pub fn warnings(&self) -> &[NormalizationAmbiguity] {
        &self.warnings
    }

    /// `h_{a,p}`.
    pub fn density(&self, a: usize, p: i64) -> Result<&CoeffFn> {
        if p < -1 || p > self.pmax() || a >= self.n() {
            return Err(Error::InvalidInput(format!("density ({}, {p}) not built", a + 1)));
        }
        Ok(&self.levels[level_index(p)][a])
    }

    /// Replaces one density (used for negative controls).
    pub fn with_density(mut self, a: usize, p: i64, h: CoeffFn) -> Self {
        self.levels[level_index(p)][a] = h;
        self.omega = Mutex::new(BTreeMap::new());
        self
    }

    /// Grading eigenvalue `d_F + j - d_a`.
    pub fn grading_weight(&self, a: usize, j: i64) -> Rat {
        &self.fm.euler().d_f + rat::int(j) - &self.fm.euler().d[a]
    }

    /// `E(h) - r^i c_i{}^k{}_a h_{k,j-1} - lambda h` for a candidate `h = h_{a,j}`.
    pub fn grading_defect(&self, a: usize, j: i64, h: &CoeffFn, prev: &[CoeffFn]) -> CoeffFn {
        let fm = &self.fm;
        let n = fm.n();
        let mut out = &fm.euler().apply(h) - &h.scale(&self.grading_weight(a, j));
        for i in 0..n {
            if fm.euler().r[i].is_zero() {
                continue;
            }
            for (k, hk) in prev.iter().enumerate() {
                let c = fm.classical_raised(i, k, a);
                if !c.is_zero() {
                    out = &out - &hk.scale(&(&fm.euler().r[i] * &c));
                }
            }
        }
        out
    }

    fn extend(&mut self, j: i64, exec: Execution) -> Result<()> {
        let n = self.n();
        let prev = self.levels[level_index(j - 1)].clone();
        let alphas: Vec<usize> = (0..n).collect();
        let results = par::map(exec, &alphas, |&a| self.step(a, j, &prev));
        let mut level = Vec::with_capacity(n);
        for r in results {
            let (h, w) = r?;
            level.push(h);
            self.warnings.extend(w);
        }
        self.levels.push(level);
        Ok(())
    }

    fn step(&self, a: usize, j: i64, prev: &[CoeffFn]) -> Result<(CoeffFn, Vec<NormalizationAmbiguity>)> {
        let fm = &self.fm;
        let n = fm.n();
        let hp = &prev[a];
        let grad_prev: Vec<CoeffFn> = (0..n).map(|k| hp.partial(k)).collect();
        // target Hessian c^k_{as} d_k h_{j-1}
        let hess = |x: usize, s: usize| -> CoeffFn {
            (0..n).fold(CoeffFn::zero(n), |acc, k| &acc + &(&fm.c_raised(k, x, s) * &grad_prev[k]))
        };
        let mut h = hp.integrate(0);
        let others: Vec<usize> = (1..n).collect();
        if !others.is_empty() {
            let mut phi = Vec::with_capacity(others.len());
            for &x in &others {
                let row: Vec<CoeffFn> =
                    others.iter().map(|&s| &hess(x, s) - &h.partial(x).partial(s)).collect();
                phi.push(potential_from_gradient(&row, &others, n)?);
            }
            h = &h + &potential_from_gradient(&phi, &others, n)?;
        }
        for x in 0..n {
            for s in x..n {
                if h.partial(x).partial(s) != hess(x, s) {
                    return Err(Error::IntegrabilityFailure(format!(
                        "h_({},{j}): mixed partial ({}, {}) disagrees",
                        a + 1,
                        x + 1,
                        s + 1
                    )));
                }
            }
        }
        // fix the affine part from the grading identity
        let lambda = self.grading_weight(a, j);
        let defect = self.grading_defect(a, j, &h, prev);
        let mut lin = vec![Rat::zero(); n];
        let mut cst = Rat::zero();
        for (k, c) in defect.terms() {
            if k.has_exp() || k.surd || k.degree() > 1 || k.powers[0] > 0 {
                return Err(Error::IntegrabilityFailure(format!(
                    "h_({},{j}): grading defect {} is not affine in u^2..u^n",
                    a + 1,
                    defect
                )));
            }
            match k.powers.iter().position(|&p| p == 1) {
                Some(s) => lin[s] = c.clone(),
                None => cst = c.clone(),
            }
        }
        let mut warnings = Vec::new();
        let euler = fm.euler();
        let mut fix = CoeffFn::zero(n);
        let mut coeffs = vec![Rat::zero(); n];
        for s in 1..n {
            // (d_s - lambda) a_s = -defect_s
            let w = &euler.d[s] - &lambda;
            if w.is_zero() {
                if !lin[s].is_zero() {
                    return Err(Error::IntegrabilityFailure(format!(
                        "h_({},{j}): resonant direction u^{} cannot absorb the grading defect",
                        a + 1,
                        s + 1
                    )));
                }
                warnings.push(NormalizationAmbiguity { alpha: a, level: j, direction: Some(s) });
                continue;
            }
            coeffs[s] = -&lin[s] / w;
            fix = &fix + &CoeffFn::var(n, s).scale(&coeffs[s]);
        }
        // sum a_s r^s - lambda b = -defect_1
        let drift: Rat = (1..n).map(|s| &coeffs[s] * &euler.r[s]).sum();
        let rhs = -&cst - drift;
        if lambda.is_zero() {
            if !rhs.is_zero() {
                return Err(Error::IntegrabilityFailure(format!(
                    "h_({},{j}): resonant constant term cannot absorb the grading defect",
                    a + 1
                )));
            }
            warnings.push(NormalizationAmbiguity { alpha: a, level: j, direction: None });
        } else {
            fix = &fix + &CoeffFn::constant(n, -rhs / &lambda);
        }
        Ok((&h + &fix, warnings))
    }

    /// The Hamiltonian vector field matrix `A^g_v = eta^{gm} d_m d_v h_{a,p}`.
    pub fn flow(&self, a: usize, p: i64) -> Result<Vec<Vec<CoeffFn>>> {
        let n = self.n();
        let h = self.density(a, p)?;
        let eta_inv = self.fm.metric_inverse();
        Ok((0..n)
            .map(|g| {
                (0..n)
                    .map(|v| {
                        (0..n).fold(CoeffFn::zero(n), |acc, m| {
                            &acc + &h.partial(m).partial(v).scale(&eta_inv[g][m])
                        })
                    })
                    .collect()
            })
            .collect())
    }

    /// The first bracket `eta^{ab} delta'`.
    pub fn first_bracket(&self) -> PoissonOperator {
        PoissonOperator::constant(self.fm.metric_inverse())
    }

    /// Density of `{h_{a,p-1}, H_{b,q}}_1`.
    pub fn omega_density(&self, a: usize, p: i64, b: usize, q: i64) -> Result<DiffPoly> {
        let n = self.n();
        let f = self.density(a, p - 1)?;
        let g = self.density(b, q)?;
        let eta_inv = self.fm.metric_inverse();
        let mut out = DiffPoly::zero(n);
        for c in 0..n {
            let fc = f.partial(c);
            if fc.is_zero() {
                continue;
            }
            for m in 0..n {
                if eta_inv[c][m].is_zero() {
                    continue;
                }
                let dg = DiffPoly::from_coeff(g.partial(m)).d_x();
                out = &out + &dg.mul_coeff(&fc.scale(&eta_inv[c][m]));
            }
        }
        Ok(out)
    }

    /// `Omega_{a,p;b,q}` with `d_x Omega = {h_{a,p-1}, H_{b,q}}_1`.
    pub fn omega(&self, a: usize, p: i64, b: usize, q: i64) -> Result<CoeffFn> {
        if let Some(v) = self.omega.lock().ok().and_then(|m| m.get(&(a, p, b, q)).cloned()) {
            return Ok(v);
        }
        let dens = self.omega_density(a, p, b, q)?;
        let anti = antiderivative(&dens)?;
        let val = anti.as_coeff().ok_or(Error::NotATotalDerivative)?;
        if let Ok(mut m) = self.omega.lock() {
            m.insert((a, p, b, q), val.clone());
        }
        Ok(val)
    }

    /// Criterion `d_j d_i f d_k d^i g = d_k d_i f d_j d^i g` for all `j, k`.
    pub fn criterion(&self, f: &CoeffFn, g: &CoeffFn) -> bool {
        let n = self.n();
        let eta_inv = self.fm.metric_inverse();
        let hf: Vec<Vec<CoeffFn>> =
            (0..n).map(|j| (0..n).map(|i| f.partial(i).partial(j)).collect()).collect();
        // raised Hessian of g: d_k d^i g
        let hg: Vec<Vec<CoeffFn>> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        (0..n).fold(CoeffFn::zero(n), |acc, m| {
                            &acc + &g.partial(m).partial(k).scale(&eta_inv[i][m])
                        })
                    })
                    .collect()
            })
            .collect();
        for j in 0..n {
            for k in j + 1..n {
                let mut lhs = CoeffFn::zero(n);
                let mut rhs = CoeffFn::zero(n);
                for i in 0..n {
                    lhs = &lhs + &(&hf[j][i] * &hg[k][i]);
                    rhs = &rhs + &(&hf[k][i] * &hg[j][i]);
                }
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// Checks all pairs `(a,p), (b,q)` with `p, q <= pmax` by the criterion and
    /// by the bracket under `eta delta'` followed by the total-derivative test.
    pub fn commute_check(&self, pmax: i64, exec: Execution) -> Result<CommuteReport> {
        let n = self.n();
        if pmax > self.pmax() {
            return Err(Error::InvalidInput(format!("pmax {pmax} exceeds built level {}", self.pmax())));
        }
        let mut pairs = Vec::new();
        for a in 0..n {
            for p in -1..=pmax {
                for b in 0..n {
                    for q in -1..=pmax {
                        if (a, p) < (b, q) {
                            pairs.push(((a, p), (b, q)));
                        }
                    }
                }
            }
        }
        let first = self.first_bracket();
        let results = par::map(exec, &pairs, |&((a, p), (b, q))| {
            let f = &self.levels[level_index(p)][a];
            let g = &self.levels[level_index(q)][b];
            let crit = self.criterion(f, g);
            let lf = LocalFunctional::new(DiffPoly::from_coeff(f.clone()));
            let lg = LocalFunctional::new(DiffPoly::from_coeff(g.clone()));
            let br = first.bracket_density(&lf, &lg).map(|d| is_total_derivative(&d));
            (crit, br)
        });
        let mut rep = CommuteReport { pairs: pairs.len(), ..Default::default() };
        for (pair, (crit, br)) in pairs.into_iter().zip(results) {
            if !crit {
                rep.criterion_failures.push(pair);
            }
            rep.bracket_checked += 1;
            if !br? {
                rep.bracket_failures.push(pair);
            }
        }
        Ok(rep)
    }

    /// Evaluates the symbolic flow matrix at a point.
    pub fn flow_at(&self, a: usize, p: i64, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.flow(a, p)?
            .iter()
            .map(|row| row.iter().map(|f| f.eval(u)).collect())
            .collect()
    }

    /// `dh_{a,p}/du^g` as functions, used by the hodograph equations.
    pub fn gradient(&self, a: usize, p: i64) -> Result<Vec<CoeffFn>> {
        let h = self.density(a, p)?;
        Ok((0..self.n()).map(|g| h.partial(g)).collect())
    }

    /// Variational gradient of `H_{a,p}` viewed as a local functional.
    pub fn functional(&self, a: usize, p: i64) -> Result<LocalFunctional> {
        Ok(LocalFunctional::new(DiffPoly::from_coeff(self.density(a, p)?.clone())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn point_seeds_and_levels() {
        let h = Hierarchy::build(FrobeniusManifold::point(), 4).unwrap();
        for p in -1..=4 {
            let expect = CoeffFn::var(1, 0).pow((p + 2) as u32).scale(&rat::inv_factorial((p + 2) as u32));
            assert_eq!(h.density(0, p).unwrap(), &expect);
        }
        assert!(h.warnings().is_empty());
    }

    #[test]
    fn p1_low_levels() {
        let h = Hierarchy::build(FrobeniusManifold::p1(), 1).unwrap();
        let u = CoeffFn::var(2, 0);
        let v = CoeffFn::var(2, 1);
        let ev = CoeffFn::exp_var(2, 1, int(1));
        assert_eq!(h.density(0, -1).unwrap(), &v);
        assert_eq!(h.density(1, -1).unwrap(), &u);
        assert_eq!(h.density(0, 0).unwrap(), &(&u * &v));
        assert_eq!(h.density(1, 0).unwrap(), &(&u.pow(2).scale(&rat(1, 2)) + &ev));
        let hv1 = &u.pow(3).scale(&rat(1, 6)) + &(&u * &ev);
        assert_eq!(h.density(1, 1).unwrap(), &hv1);
        let hu1 = &(&u.pow(2) * &v).scale(&rat(1, 2)) + &(&(&v - &CoeffFn::constant(2, int(2))) * &ev);
        assert_eq!(h.density(0, 1).unwrap(), &hu1);
    }

    #[test]
    fn omega_examples() {
        let h = Hierarchy::build(FrobeniusManifold::point(), 2).unwrap();
        assert_eq!(h.omega(0, 0, 0, 0).unwrap(), CoeffFn::var(1, 0));
        assert_eq!(h.omega(0, 1, 0, 0).unwrap(), CoeffFn::var(1, 0).pow(2).scale(&rat(1, 2)));
        assert_eq!(h.omega(0, 1, 0, 2).unwrap(), h.omega(0, 2, 0, 1).unwrap());
        let q = Hierarchy::build(FrobeniusManifold::p1(), 1).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let f = q.manifold().potential().partial(a).partial(b);
                assert_eq!(q.omega(a, 0, b, 0).unwrap(), f);
            }
        }
    }

    #[test]
    fn flows() {
        let h = Hierarchy::build(FrobeniusManifold::point(), 1).unwrap();
        assert_eq!(h.flow(0, 1).unwrap()[0][0], CoeffFn::var(1, 0));
        assert_eq!(h.flow(0, 0).unwrap()[0][0], CoeffFn::one(1));
        let q = Hierarchy::build(FrobeniusManifold::p1(), 0).unwrap();
        let a = q.flow(1, 0).unwrap();
        // u_t = e^v v_x, v_t = u_x
        assert_eq!(a[0][1], CoeffFn::exp_var(2, 1, int(1)));
        assert!(a[0][0].is_zero());
        assert_eq!(a[1][0], CoeffFn::one(2));
        assert!(a[1][1].is_zero());
    }

    #[test]
    fn gradient_reconstruction_rejects_non_gradients() {
        let n = 2;
        let w = [CoeffFn::var(n, 1), CoeffFn::zero(n)];
        assert!(potential_from_gradient(&w, &[0, 1], n).is_err());
    }
}
