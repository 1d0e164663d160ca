//! Bihamiltonian pencils: the second bracket of a Frobenius manifold, pencil
//! checks, Magri recursion, and the KdV and Toda examples.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::frobenius::FrobeniusManifold;
use crate::jetring::{CoeffFn, CoeffKey, DiffPoly, TermKey};
use crate::linalg;
use crate::localfunc::{is_total_derivative, LocalFunctional};
use crate::par::{self, Execution};
use crate::poisson::{HydroBracket, PoissonOperator};
use crate::rat::{self, Rat};

#[derive(Clone, Debug)]
pub struct PoissonPencil {
    pub first: PoissonOperator,
    pub second: PoissonOperator,
}

impl PoissonPencil {
    pub fn new(first: PoissonOperator, second: PoissonOperator) -> Self {
        PoissonPencil { first, second }
    }

    /// `second - lambda * first`.
    pub fn at(&self, lambda: &Rat) -> PoissonOperator {
        self.second.sub(&self.first.scale(lambda))
    }
}

/// `g^{ab} = E^g c^{ab}_g` and `Gamma^{ab}_g = ((2 - d_F)/2 + d_b) c^{ab}_g`,
/// checked against the Levi-Civita connection of `g`.
pub fn second_bracket_from_frobenius(fm: &FrobeniusManifold) -> Result<HydroBracket> {
    let n = fm.n();
    let g = fm.intersection_form();
    let half = rat::rat(1, 2);
    let base = (rat::int(2) - &fm.euler().d_f) * &half;
    let gamma = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let k = &base + &fm.euler().d[b];
                    (0..n).map(|c| fm.c_upper2(a, b, c).scale(&k)).collect()
                })
                .collect()
        })
        .collect();
    let hb = HydroBracket { n, g, gamma };
    let (det, lc) = hb.scaled_levi_civita();
    if det.is_zero() {
        return Err(Error::DegenerateMetric);
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if &det * &hb.gamma[a][b][c] != lc[a][b][c] {
                    return Err(Error::IntegrabilityFailure(format!(
                        "Gamma^{{{}{}}}_{} is not the Levi-Civita connection of the intersection form",
                        a + 1,
                        b + 1,
                        c + 1
                    )));
                }
            }
        }
    }
    Ok(hb)
}

#[derive(Clone, Debug)]
pub struct PencilReport {
    pub lambdas: Vec<Rat>,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Default generic sample values of `lambda`.
pub fn generic_lambdas() -> Vec<Rat> {
    vec![rat::rat(3, 7), rat::rat(-5, 2), rat::rat(11, 13)]
}

/// Antisymmetry and Dubrovin–Novikov conditions for `second - lambda first`
/// at each supplied `lambda`.
pub fn pencil_is_poisson(p: &PoissonPencil, lambdas: &[Rat]) -> Result<PencilReport> {
    let mut failures = Vec::new();
    for l in lambdas {
        let op = p.at(l);
        let anti = op.check_antisymmetry(0);
        if !anti.passed {
            failures.push(format!("lambda = {}: not skew-adjoint", rat::render(l)));
        }
        let dn = op.hydro_part().dn_check()?;
        for f in dn.failures {
            failures.push(format!("lambda = {}: {f}", rat::render(l)));
        }
    }
    Ok(PencilReport { lambdas: lambdas.to_vec(), passed: failures.is_empty(), failures })
}

/// `delta'` in one dimension.
pub fn kdv_first() -> PoissonOperator {
    PoissonOperator::constant(&vec![vec![Rat::one()]])
}

/// `u delta' + 1/2 u_x delta + k eps^2 delta'''`.
pub fn kdv_second(k: &Rat) -> PoissonOperator {
    let mut p = PoissonOperator::zero(1);
    p.set(0, 0, 1, DiffPoly::coord(1, 0));
    p.set(0, 0, 0, DiffPoly::jet(1, 0, 1).scale(&rat::rat(1, 2)));
    p.set(0, 0, 3, DiffPoly::eps(1).pow(2).scale(k));
    p
}

/// Dispersive coefficient `k = 1/8` of the usual second KdV bracket.
pub fn kdv_standard_dispersion() -> Rat {
    rat::rat(1, 8)
}

/// Dispersive coefficient `k = -1/8` for which the Riccati Casimirs below
/// (with the factor `i`) are Casimirs of `P_2 - lambda P_1`.
pub fn kdv_riccati_dispersion() -> Rat {
    rat::rat(-1, 8)
}

#[derive(Clone, Debug)]
pub struct MagriReport {
    /// Row `p`: coefficients `T_{p,q}` with `P_2 dH_p = sum_q T_{p,q} P_1 dH_q`.
    pub triangular: Vec<Vec<Rat>>,
    pub recursion_ok: bool,
    pub commute_first: bool,
    pub commute_second: bool,
    pub failures: Vec<String>,
}

impl MagriReport {
    pub fn passed(&self) -> bool {
        self.recursion_ok && self.commute_first && self.commute_second
    }
}

type Flat = BTreeMap<(usize, TermKey, CoeffKey), Rat>;

fn flatten(v: &[DiffPoly]) -> Flat {
    let mut out = Flat::new();
    for (a, p) in v.iter().enumerate() {
        for (k, c) in p.terms() {
            for (ck, r) in c.terms() {
                out.insert((a, k.clone(), ck.clone()), r.clone());
            }
        }
    }
    out
}

/// Solves `target = sum_q c_q basis_q` exactly.
pub fn express_in_span(target: &[DiffPoly], basis: &[Vec<DiffPoly>]) -> Option<Vec<Rat>> {
    let t = flatten(target);
    let b: Vec<Flat> = basis.iter().map(|x| flatten(x)).collect();
    let mut keys: Vec<&(usize, TermKey, CoeffKey)> = t.keys().collect();
    for f in &b {
        keys.extend(f.keys());
    }
    keys.sort();
    keys.dedup();
    let zero = Rat::zero();
    let m: Vec<Vec<Rat>> = keys
        .iter()
        .map(|k| b.iter().map(|f| f.get(*k).unwrap_or(&zero).clone()).collect())
        .collect();
    let rhs: Vec<Rat> = keys.iter().map(|k| t.get(*k).unwrap_or(&zero).clone()).collect();
    if m.is_empty() {
        return Some(vec![Rat::zero(); basis.len()]);
    }
    linalg::solve_consistent(&m, &rhs)
}

/// Verifies `{., H_{p+1}}_1 = {., H_p}_2` up to a triangular change of basis,
/// and pairwise commutation under both brackets up to `eps^order`.
pub fn magri_verify(
    pencil: &PoissonPencil,
    seq: &[LocalFunctional],
    order: u32,
    exec: Execution,
) -> Result<MagriReport> {
    let first = pencil.first.clone().with_truncation(order);
    let second = pencil.second.clone().with_truncation(order);
    let flows1: Vec<Vec<DiffPoly>> =
        par::map(exec, seq, |h| first.ham_flow(h)).into_iter().collect::<Result<_>>()?;
    let flows2: Vec<Vec<DiffPoly>> =
        par::map(exec, seq, |h| second.ham_flow(h)).into_iter().collect::<Result<_>>()?;
    let mut failures = Vec::new();
    let mut triangular = Vec::new();
    let mut recursion_ok = true;
    for p in 0..seq.len().saturating_sub(1) {
        match express_in_span(&flows2[p], &flows1[..=p + 1]) {
            Some(c) if !c[p + 1].is_zero() => triangular.push(c),
            Some(c) => {
                recursion_ok = false;
                failures.push(format!("p = {p}: leading coefficient vanishes"));
                triangular.push(c);
            }
            None => {
                recursion_ok = false;
                failures.push(format!("p = {p}: P2 dH_p is not in the span of P1 dH_0..P1 dH_{}", p + 1));
                triangular.push(Vec::new());
            }
        }
    }
    let mut pairs = Vec::new();
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            pairs.push((i, j));
        }
    }
    let results = par::map(exec, &pairs, |&(i, j)| -> Result<(bool, bool)> {
        let b1 = first.bracket_density(&seq[i], &seq[j])?;
        let b2 = second.bracket_density(&seq[i], &seq[j])?;
        Ok((is_total_derivative(&b1), is_total_derivative(&b2)))
    });
    let (mut c1, mut c2) = (true, true);
    for ((i, j), r) in pairs.into_iter().zip(results) {
        let (a, b) = r?;
        if !a {
            c1 = false;
            failures.push(format!("{{H_{i}, H_{j}}}_1 != 0"));
        }
        if !b {
            c2 = false;
            failures.push(format!("{{H_{i}, H_{j}}}_2 != 0"));
        }
    }
    Ok(MagriReport { triangular, recursion_ok, commute_first: c1, commute_second: c2, failures })
}

/// Coefficients `u~_m` of the Riccati expansion and the Casimirs `F_p`.
#[derive(Clone, Debug)]
pub struct CasimirExpansion {
    /// `u~_m`, possibly containing the formal generator `theta` for odd `m`.
    pub coefficients: Vec<DiffPoly>,
    /// Whether `u~_m` is a total x-derivative.
    pub total_derivative: Vec<bool>,
    /// `F_p = int u~_{2p+2}` for `p = -1, 0, 1, ...`.
    pub casimirs: Vec<LocalFunctional>,
}

impl CasimirExpansion {
    /// `F_p`, `p >= -1`.
    pub fn casimir(&self, p: i64) -> &LocalFunctional {
        &self.casimirs[(p + 1) as usize]
    }
}

/// Solves `c u~_x / sqrt(lambda) - u~^2/(4 lambda) = u - lambda` with
/// `u~ = sum_m u~_m lambda^{-m/2} + 2 lambda` and `c = i eps/(2 sqrt 2) = theta eps/4`:
/// `u~_0 = -u`, `u~_m = c u~_{m-1,x} - 1/4 sum_{a+b=m-2} u~_a u~_b`.
pub fn kdv_riccati_casimirs(order_eps: u32, order_lambda: usize) -> Result<CasimirExpansion> {
    if order_eps < 2 || order_lambda < 2 {
        return Err(Error::InvalidInput("truncation orders must be at least 2".into()));
    }
    let c = DiffPoly::from_coeff(CoeffFn::theta(1).scale(&rat::rat(1, 4))).mul_eps(1);
    let quarter = rat::rat(1, 4);
    let mut us: Vec<DiffPoly> = vec![-&DiffPoly::coord(1, 0)];
    for m in 1..=order_lambda {
        let mut next = (&c * &us[m - 1].d_x()).truncate(order_eps);
        if m >= 2 {
            let mut sq = DiffPoly::zero(1);
            for a in 0..=m - 2 {
                sq = &sq + &(&us[a] * &us[m - 2 - a]);
            }
            next = &next - &sq.scale(&quarter).truncate(order_eps);
        }
        us.push(next);
    }
    let total_derivative = us.iter().map(is_total_derivative).collect();
    let mut casimirs = Vec::new();
    for m in (0..=order_lambda).step_by(2) {
        if us[m].has_theta() {
            return Err(Error::Unsupported(format!("Casimir density u~_{m} is not real")));
        }
        casimirs.push(LocalFunctional::new(us[m].clone()));
    }
    Ok(CasimirExpansion { coefficients: us, total_derivative, casimirs })
}

/// Riccati residual `c u~_x lambda^{-1/2} - u~^2/(4 lambda) - u + lambda`
/// (the `lambda` terms cancel identically), returned as coefficients of `lambda^{-m/2}` for `m <= order_lambda`.
pub fn riccati_residual(exp: &CasimirExpansion, order_eps: u32, order_lambda: usize) -> Vec<DiffPoly> {
    let c = DiffPoly::from_coeff(CoeffFn::theta(1).scale(&rat::rat(1, 4))).mul_eps(1);
    let us = &exp.coefficients;
    let get = |m: usize| us.get(m).cloned().unwrap_or_else(|| DiffPoly::zero(1));
    (0..=order_lambda)
        .map(|m| {
            let mut r = if m == 0 { -&DiffPoly::coord(1, 0) } else { &c * &get(m - 1).d_x() };
            r = &r - &get(m);
            if m >= 2 {
                for a in 0..=m - 2 {
                    r = &r - &(&get(a) * &get(m - 2 - a)).scale(&rat::rat(1, 4));
                }
            }
            r.truncate(order_eps)
        })
        .collect()
}

/// Bernoulli numbers `B_0..B_m` (with `B_1 = -1/2`).
pub fn bernoulli(m: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(m + 1);
    for k in 0..=m {
        if k == 0 {
            b.push(Rat::one());
            continue;
        }
        // sum_{j<k} C(k+1, j) B_j + (k+1) B_k = 0
        let s: Rat = (0..k).map(|j| Rat::from_integer(rat::binomial(k as u32 + 1, j as u32)) * &b[j]).sum();
        b.push(-s / rat::int(k as i64 + 1));
    }
    b
}

/// Expansion of `(1/eps) f(x + a eps) delta(x - y + b eps)` into
/// `sum eps^{j+k-1} a^j b^k/(j! k!) d^j f delta^{(k)}`, accumulated into `op`
/// multiplied by `eps` (so the caller divides by `eps` afterwards).
fn add_shifted(op: &mut PoissonOperator, a_idx: usize, b_idx: usize, f: &DiffPoly, a: i64, b: i64, order: u32, sign: i64) {
    let n = f.n();
    for j in 0..=order + 1 {
        let fj = f.d_x_n(j);
        for k in 0..=(order + 1 - j) {
            let coef = rat::int(sign)
                * Rat::from_integer(num_bigint::BigInt::from(a).pow(j))
                * Rat::from_integer(num_bigint::BigInt::from(b).pow(k))
                * rat::inv_factorial(j)
                * rat::inv_factorial(k);
            if coef.is_zero() {
                continue;
            }
            let term = fj.mul_eps(j + k).scale(&coef);
            op.add_to(a_idx, b_idx, k, &term);
            let _ = n;
        }
    }
}

/// Builds `op / eps` after checking that the `eps^0` part cancels, then adds
/// the skew partners of the listed entries.
fn finish_toda(op: PoissonOperator, order: u32, given: &[(usize, usize)]) -> Result<PoissonOperator> {
    let n = op.n();
    let mut out = PoissonOperator::zero(n);
    for ((a, b, s), c) in op.entries() {
        if !c.eps_coeff(0).is_zero() {
            return Err(Error::Unsupported(format!("singular 1/eps term in entry ({a},{b},{s})")));
        }
        out.set(*a, *b, *s, c.div_eps(1)?.truncate(order));
    }
    // reverse entries from skew-adjointness
    let mut partner = PoissonOperator::zero(n);
    for &(a, b) in given {
        if a == b {
            continue;
        }
        for s in 0..=out.max_order() {
            let c = out.entry(a, b, s);
            if c.is_zero() {
                continue;
            }
            for j in 0..=s {
                let sign = if s % 2 == 0 { -Rat::one() } else { Rat::one() };
                let coef = sign * Rat::from_integer(rat::binomial(s, j));
                partner.add_to(b, a, j, &c.d_x_n(s - j).scale(&coef).truncate(order));
            }
        }
    }
    Ok(out.add(&partner).with_truncation(order))
}

/// First Toda bracket expanded to `eps^order`:
/// `{u(x), v(y)}_1 = (delta(x-y+eps) - delta(x-y))/eps`.
pub fn toda_first(order: u32) -> Result<PoissonOperator> {
    let mut op = PoissonOperator::zero(2);
    let one = DiffPoly::one(2);
    add_shifted(&mut op, 0, 1, &one, 0, 1, order, 1);
    add_shifted(&mut op, 0, 1, &one, 0, 0, order, -1);
    finish_toda(op, order, &[(0, 1)])
}

/// Second Toda bracket expanded to `eps^order`:
/// `{u,u}_2 = (e^{v(x+eps)} delta(x-y+eps) - e^{v(x)} delta(x-y-eps))/eps`,
/// `{v,v}_2 = (delta(x-y+eps) - delta(x-y-eps))/eps`,
/// `{u,v}_2 = u(x)(delta(x-y+eps) - delta(x-y))/eps`.
pub fn toda_second(order: u32) -> Result<PoissonOperator> {
    let mut op = PoissonOperator::zero(2);
    let ev = DiffPoly::from_coeff(CoeffFn::exp_var(2, 1, Rat::one()));
    let one = DiffPoly::one(2);
    let u = DiffPoly::coord(2, 0);
    add_shifted(&mut op, 0, 0, &ev, 1, 1, order, 1);
    add_shifted(&mut op, 0, 0, &ev, 0, -1, order, -1);
    add_shifted(&mut op, 1, 1, &one, 0, 1, order, 1);
    add_shifted(&mut op, 1, 1, &one, 0, -1, order, -1);
    add_shifted(&mut op, 0, 1, &u, 0, 1, order, 1);
    add_shifted(&mut op, 0, 1, &u, 0, 0, order, -1);
    finish_toda(op, order, &[(0, 0), (1, 1), (0, 1)])
}

/// The Toda Hamiltonian `int (u^2/2 + e^v)`.
pub fn toda_hamiltonian() -> LocalFunctional {
    let u = DiffPoly::coord(2, 0);
    let ev = DiffPoly::from_coeff(CoeffFn::exp_var(2, 1, Rat::one()));
    LocalFunctional::new(&u.pow(2).scale(&rat::rat(1, 2)) + &ev)
}

#[derive(Clone, Debug)]
pub struct TodaNormal {
    /// `u~ = sum_n B_n/n! (eps d_x)^n u` up to `eps^order`.
    pub u_tilde: DiffPoly,
    pub v_tilde: DiffPoly,
    /// `B_n / n!` for `n <= order`.
    pub coefficients: Vec<Rat>,
    /// Whether `sum_{k>=1} eps^{k-1}/k! d_x^{k-1} u~` reproduces `u` to `eps^order`.
    pub inversion_ok: bool,
    /// `int v` and `int u`.
    pub casimirs: Vec<LocalFunctional>,
    pub casimirs_ok: bool,
}

/// Normal coordinates of the first Toda bracket and their Casimirs.
pub fn toda_normal_coordinates(order: u32) -> Result<TodaNormal> {
    if order < 2 {
        return Err(Error::InvalidInput("order must be at least 2".into()));
    }
    let b = bernoulli(order as usize);
    let coefficients: Vec<Rat> = (0..=order).map(|k| &b[k as usize] * rat::inv_factorial(k)).collect();
    let u_tilde = (0..=order).fold(DiffPoly::zero(2), |acc, k| {
        &acc + &DiffPoly::jet(2, 0, k).mul_eps(k).scale(&coefficients[k as usize])
    });
    let forward = (1..=order + 1).fold(DiffPoly::zero(2), |acc, k| {
        &acc + &u_tilde.d_x_n(k - 1).mul_eps(k - 1).scale(&rat::inv_factorial(k))
    });
    let inversion_ok = forward.truncate(order) == DiffPoly::coord(2, 0);
    let casimirs = vec![
        LocalFunctional::new(DiffPoly::coord(2, 1)),
        LocalFunctional::new(DiffPoly::coord(2, 0)),
    ];
    let first = toda_first(order)?;
    let casimirs_ok = casimirs.iter().all(|c| {
        first.ham_flow(c).map(|f| f.iter().all(DiffPoly::is_zero)).unwrap_or(false)
    });
    Ok(TodaNormal {
        u_tilde,
        v_tilde: DiffPoly::coord(2, 1),
        coefficients,
        inversion_ok,
        casimirs,
        casimirs_ok,
    })
}

/// Whether `F` is a Casimir of `P`: its Hamiltonian vector field vanishes.
pub fn is_casimir(p: &PoissonOperator, f: &LocalFunctional) -> Result<bool> {
    Ok(p.ham_flow(f)?.iter().all(DiffPoly::is_zero))
}
