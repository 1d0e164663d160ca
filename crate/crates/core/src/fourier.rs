//! Formal Fourier modes `u^a(x) = u0^a + sum_k (p_k^a e^{ikx} + q_k^a e^{-ikx})`,
//! their `{p, q}` bracket and the lift of densities to mode Hamiltonians.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::jetring::{CoeffFn, DiffPoly};
use crate::linalg::RatMatrix;
use crate::localfunc::LocalFunctional;
use crate::par::{self, Execution};
use crate::poisson::PoissonOperator;
use crate::rat::{self, Rat};

/// Gaussian rational `re + im i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gauss {
    pub re: Rat,
    pub im: Rat,
}

impl Gauss {
    pub fn new(re: Rat, im: Rat) -> Self {
        Gauss { re, im }
    }

    pub fn real(re: Rat) -> Self {
        Gauss { re, im: Rat::zero() }
    }

    pub fn zero() -> Self {
        Gauss::real(Rat::zero())
    }

    pub fn one() -> Self {
        Gauss::real(Rat::one())
    }

    pub fn i() -> Self {
        Gauss::new(Rat::zero(), Rat::one())
    }

    /// `(i k)^m`.
    pub fn ik_pow(k: i64, m: u32) -> Self {
        let mag = num_traits::pow(rat::int(k), m as usize);
        match m % 4 {
            0 => Gauss::real(mag),
            1 => Gauss::new(Rat::zero(), mag),
            2 => Gauss::real(-mag),
            _ => Gauss::new(Rat::zero(), -mag),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn scale(&self, r: &Rat) -> Gauss {
        Gauss::new(&self.re * r, &self.im * r)
    }
}

impl fmt::Display for Gauss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", rat::render(&self.re)),
            (true, false) => write!(f, "{}*i", rat::render(&self.im)),
            _ => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{} {} {}*i", rat::render(&self.re), sign, rat::render(&self.im.abs()))
            }
        }
    }
}

impl Add for &Gauss {
    type Output = Gauss;
    fn add(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &Gauss {
    type Output = Gauss;
    fn sub(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &Gauss {
    type Output = Gauss;
    fn mul(self, o: &Gauss) -> Gauss {
        Gauss::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl Neg for &Gauss {
    type Output = Gauss;
    fn neg(self) -> Gauss {
        Gauss::new(-&self.re, -&self.im)
    }
}

/// A formal variable of the mode algebra. `T` is the constant shift of the lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    T(usize),
    U0(usize),
    P(usize, u32),
    Q(usize, u32),
}

impl Mode {
    pub fn weight(self) -> i64 {
        match self {
            Mode::P(_, k) => k as i64,
            Mode::Q(_, k) => -(k as i64),
            _ => 0,
        }
    }

    pub fn index(self) -> u32 {
        match self {
            Mode::P(_, k) | Mode::Q(_, k) => k,
            _ => 0,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::T(a) => write!(f, "t{a}"),
            Mode::U0(a) => write!(f, "u0_{a}"),
            Mode::P(a, k) => write!(f, "p{k}_{a}"),
            Mode::Q(a, k) => write!(f, "q{k}_{a}"),
        }
    }
}

/// Sorted product of modes with positive exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeMono(Vec<(Mode, u32)>);

impl ModeMono {
    pub fn one() -> Self {
        ModeMono(Vec::new())
    }

    pub fn single(m: Mode) -> Self {
        ModeMono(vec![(m, 1)])
    }

    pub fn from_factors(fs: &[(Mode, u32)]) -> Self {
        fs.iter().fold(ModeMono::one(), |acc, &(m, e)| acc.mul(&ModeMono(vec![(m, e)])))
    }

    pub fn factors(&self) -> &[(Mode, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn weight(&self) -> i64 {
        self.0.iter().map(|(m, e)| m.weight() * *e as i64).sum()
    }

    pub fn max_index(&self) -> u32 {
        self.0.iter().map(|(m, _)| m.index()).max().unwrap_or(0)
    }

    pub fn exponent(&self, m: Mode) -> u32 {
        self.0.iter().find(|(x, _)| *x == m).map_or(0, |(_, e)| *e)
    }

    pub fn mul(&self, other: &ModeMono) -> ModeMono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        ModeMono(out)
    }

    /// `d/dm` of the monomial: the exponent of `m` and the reduced monomial.
    fn derivative(&self, m: Mode) -> Option<(u32, ModeMono)> {
        let pos = self.0.iter().position(|(x, _)| *x == m)?;
        let e = self.0[pos].1;
        let mut v = self.0.clone();
        if e == 1 {
            v.remove(pos);
        } else {
            v[pos].1 -= 1;
        }
        Some((e, ModeMono(v)))
    }
}

impl fmt::Display for ModeMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(m, e)| if *e == 1 { m.to_string() } else { format!("{m}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Truncated polynomial in the mode variables with Gaussian rational
/// coefficients; modes `<= K`, total degree `<= D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierPolynomial {
    n: usize,
    modes: u32,
    degree: u32,
    terms: BTreeMap<ModeMono, Gauss>,
}

impl FourierPolynomial {
    pub fn zero(n: usize, modes: u32, degree: u32) -> Self {
        FourierPolynomial { n, modes, degree, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, modes: u32, degree: u32, c: Gauss) -> Self {
        let mut out = Self::zero(n, modes, degree);
        out.add_term(ModeMono::one(), c);
        out
    }

    pub fn generator(n: usize, modes: u32, degree: u32, m: Mode) -> Self {
        let mut out = Self::zero(n, modes, degree);
        out.add_term(ModeMono::single(m), Gauss::one());
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modes(&self) -> u32 {
        self.modes
    }

    pub fn degree_cutoff(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModeMono, &Gauss)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &ModeMono) -> Gauss {
        self.terms.get(m).cloned().unwrap_or_else(Gauss::zero)
    }

    pub fn add_term(&mut self, m: ModeMono, c: Gauss) {
        use std::collections::btree_map::Entry;
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let v = e.get() + &c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &FourierPolynomial) -> FourierPolynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &FourierPolynomial) -> FourierPolynomial {
        self.add(&other.scale(&Gauss::real(-Rat::one())))
    }

    pub fn scale(&self, c: &Gauss) -> FourierPolynomial {
        let mut out = Self::zero(self.n, self.modes, self.degree);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Product truncated at the degree cutoff.
    pub fn mul(&self, other: &FourierPolynomial) -> FourierPolynomial {
        let mut out = Self::zero(self.n, self.modes, self.degree);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let m = a.mul(b);
                if m.degree() <= self.degree {
                    out.add_term(m, x * y);
                }
            }
        }
        out
    }

    pub fn partial(&self, v: Mode) -> FourierPolynomial {
        let mut out = Self::zero(self.n, self.modes, self.degree);
        for (m, c) in &self.terms {
            if let Some((e, r)) = m.derivative(v) {
                out.add_term(r, c.scale(&rat::int(e as i64)));
            }
        }
        out
    }

    /// Keeps the monomials satisfying `keep`.
    pub fn restrict(&self, keep: impl Fn(&ModeMono) -> bool) -> FourierPolynomial {
        FourierPolynomial {
            n: self.n,
            modes: self.modes,
            degree: self.degree,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Monomials whose every mode index is `<= limit`.
    pub fn retained(&self, limit: u32) -> FourierPolynomial {
        self.restrict(|m| m.max_index() <= limit)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(Gauss::is_real)
    }

    /// Every monomial has Fourier weight zero.
    pub fn is_weight_zero(&self) -> bool {
        self.terms.keys().all(|m| m.weight() == 0)
    }
}

impl fmt::Display for FourierPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c})*{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

type Partial = BTreeMap<ModeMono, Gauss>;

/// Multiplies `acc` by the series `factor`, discarding monomials above degree
/// `degree` or whose weight can no longer return to zero with `room` more
/// factors of weight at most `modes`.
fn mul_pruned(acc: &Partial, factor: &[(Mode, Gauss)], degree: u32, room: impl Fn(u32) -> u32, modes: u32) -> Partial {
    let mut out = Partial::new();
    for (m, c) in acc {
        for (v, x) in factor {
            let nm = m.mul(&ModeMono::single(*v));
            let d = nm.degree();
            if d > degree || nm.weight().unsigned_abs() > room(d) as u64 * modes as u64 {
                continue;
            }
            let slot = out.entry(nm).or_insert_with(Gauss::zero);
            *slot = &*slot + &(c * x);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn field_series(alpha: usize, jet: u32, modes: u32, shift: bool) -> Vec<(Mode, Gauss)> {
    let mut out = Vec::new();
    if jet == 0 {
        if shift {
            out.push((Mode::T(alpha), Gauss::one()));
        }
        out.push((Mode::U0(alpha), Gauss::one()));
    }
    for k in 1..=modes {
        out.push((Mode::P(alpha, k), Gauss::ik_pow(k as i64, jet)));
        out.push((Mode::Q(alpha, k), Gauss::ik_pow(-(k as i64), jet)));
    }
    out
}

fn plain_key(c: &CoeffFn) -> Result<()> {
    if c.has_exp() {
        return Err(Error::Unsupported("exponential coefficient in a mode expansion".into()));
    }
    if c.has_theta() {
        return Err(Error::Unsupported("theta coefficient in a mode expansion".into()));
    }
    Ok(())
}

/// Substitutes the Fourier series into `f` and keeps the weight-zero part
/// (the normalized x-integral). Terms above total degree `degree` are dropped.
pub fn to_fourier(f: &DiffPoly, modes: u32, degree: u32) -> Result<FourierPolynomial> {
    let n = f.n();
    let mut out = FourierPolynomial::zero(n, modes, degree);
    for (key, c) in f.terms() {
        if key.eps > 0 {
            return Err(Error::Unsupported("eps-dependent density in a mode expansion".into()));
        }
        plain_key(c)?;
        for (ck, r) in c.terms() {
            let mut factors: Vec<(usize, u32)> = Vec::new();
            for (a, &p) in ck.powers.iter().enumerate() {
                factors.extend(std::iter::repeat_n((a, 0), p as usize));
            }
            for (v, e) in key.mono.factors() {
                factors.extend(std::iter::repeat_n((v.coord, v.order), *e as usize));
            }
            let total = factors.len() as u32;
            if total > degree {
                continue;
            }
            let mut acc = Partial::new();
            acc.insert(ModeMono::one(), Gauss::real(r.clone()));
            for (a, j) in &factors {
                let series = field_series(*a, *j, modes, false);
                acc = mul_pruned(&acc, &series, degree, |d| total - d, modes);
            }
            for (m, x) in acc {
                if m.weight() == 0 {
                    out.add_term(m, x);
                }
            }
        }
    }
    Ok(out)
}

/// The lift `h(t + u(x))` integrated over the circle, expanded to total
/// degree `degree` (exponentials are Taylor expanded).
pub fn sft_lift(h: &CoeffFn, modes: u32, degree: u32) -> Result<FourierPolynomial> {
    if h.has_theta() {
        return Err(Error::Unsupported("theta coefficient in a lift".into()));
    }
    let n = h.n();
    let room = |d: u32| degree.saturating_sub(d);
    let mut out = FourierPolynomial::zero(n, modes, degree);
    for (key, r) in h.terms() {
        let mut acc = Partial::new();
        acc.insert(ModeMono::one(), Gauss::real(r.clone()));
        for (a, &p) in key.powers.iter().enumerate() {
            let series = field_series(a, 0, modes, true);
            for _ in 0..p {
                acc = mul_pruned(&acc, &series, degree, room, modes);
            }
        }
        if key.has_exp() {
            let linear: Vec<(Mode, Gauss)> = key
                .exps
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.is_zero())
                .flat_map(|(a, m)| {
                    field_series(a, 0, modes, true).into_iter().map(move |(v, x)| (v, x.scale(m)))
                })
                .collect();
            let mut expo = Partial::new();
            let mut power = Partial::new();
            power.insert(ModeMono::one(), Gauss::one());
            for j in 0..=degree {
                for (m, x) in &power {
                    let slot = expo.entry(m.clone()).or_insert_with(Gauss::zero);
                    *slot = &*slot + &x.scale(&rat::inv_factorial(j));
                }
                power = mul_pruned(&power, &linear, degree, room, modes);
            }
            let mut next = Partial::new();
            for (a, x) in &acc {
                for (b, y) in &expo {
                    let m = a.mul(b);
                    if m.degree() > degree || m.weight().unsigned_abs() > room(m.degree()) as u64 * modes as u64 {
                        continue;
                    }
                    let slot = next.entry(m).or_insert_with(Gauss::zero);
                    *slot = &*slot + &(x * y);
                }
            }
            acc = next;
        }
        for (m, x) in acc {
            if m.weight() == 0 {
                out.add_term(m, x);
            }
        }
    }
    Ok(out)
}

/// `{p_k^a, q_l^b} = c k delta_{kl} eta^{ab}`, all other generator brackets zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeBracket {
    pub eta_inv: RatMatrix,
    pub c: Gauss,
}

/// Convention constant reproducing the `delta'` formalism (see
/// [`determine_convention`]).
pub fn bracket_constant() -> Gauss {
    Gauss::i()
}

impl ModeBracket {
    pub fn new(eta_inv: RatMatrix, c: Gauss) -> Self {
        ModeBracket { eta_inv, c }
    }

    /// Scalar bracket with the frozen convention constant.
    pub fn scalar() -> Self {
        ModeBracket { eta_inv: vec![vec![Rat::one()]], c: bracket_constant() }
    }

    pub fn bracket(&self, a: &FourierPolynomial, b: &FourierPolynomial) -> FourierPolynomial {
        self.bracket_where(a, b, |_| true, Execution::Sequential)
    }

    /// Bracket restricted to output monomials built from factors satisfying
    /// `keep` (a multiplicative predicate such as "all indices <= L").
    pub fn bracket_where(
        &self,
        a: &FourierPolynomial,
        b: &FourierPolynomial,
        keep: impl Fn(&ModeMono) -> bool + Sync,
        exec: Execution,
    ) -> FourierPolynomial {
        let n = self.eta_inv.len();
        let modes = a.modes.max(b.modes);
        let degree = a.degree + b.degree;
        let ks: Vec<u32> = (1..=modes).collect();
        let parts = par::map(exec, &ks, |&k| {
            let mut acc = FourierPolynomial::zero(n, modes, degree);
            for al in 0..n {
                for be in 0..n {
                    let e = &self.eta_inv[al][be];
                    if e.is_zero() {
                        continue;
                    }
                    let w = self.c.scale(&(e * rat::int(k as i64)));
                    let part = |p: &FourierPolynomial, m| raise_degree(p.partial(m).restrict(&keep), degree);
                    let ap = part(a, Mode::P(al, k));
                    let bq = part(b, Mode::Q(be, k));
                    let aq = part(a, Mode::Q(be, k));
                    let bp = part(b, Mode::P(al, k));
                    let term = ap.mul(&bq).sub(&aq.mul(&bp));
                    acc = acc.add(&term.scale(&w));
                }
            }
            acc
        });
        parts.into_iter().fold(FourierPolynomial::zero(n, modes, degree), |x, y| x.add(&y))
    }
}

/// Outcome of comparing the `delta'` bracket with the mode bracket.
#[derive(Clone, Debug)]
pub struct CrosscheckReport {
    /// Number of retained monomials in either side.
    pub retained: usize,
    pub agree: bool,
    /// The retained `delta'` side vanished identically.
    pub trivial: bool,
    pub mismatches: Vec<String>,
}

fn raise_degree(p: FourierPolynomial, degree: u32) -> FourierPolynomial {
    FourierPolynomial { degree, ..p }
}

/// Both sides of the cross-check on monomials with all indices `<= K/3`:
/// `(to_fourier of the delta' density, mode bracket)`.
pub fn crosscheck_sides(
    f: &DiffPoly,
    g: &DiffPoly,
    bracket: &ModeBracket,
    modes: u32,
    degree: u32,
    exec: Execution,
) -> Result<(FourierPolynomial, FourierPolynomial)> {
    let limit = modes / 3;
    let op = PoissonOperator::constant(&bracket.eta_inv);
    let density = op.bracket_density(&LocalFunctional::new(f.clone()), &LocalFunctional::new(g.clone()))?;
    let out_degree = 2 * degree;
    let lhs = to_fourier(&density, modes, out_degree)?.retained(limit);
    let ff = raise_degree(to_fourier(f, modes, degree)?, degree);
    let gg = to_fourier(g, modes, degree)?;
    let rhs = bracket.bracket_where(&ff, &gg, |m| m.max_index() <= limit, exec).retained(limit);
    Ok((lhs, raise_degree(rhs, out_degree)))
}

pub fn bracket_crosscheck(
    f: &DiffPoly,
    g: &DiffPoly,
    bracket: &ModeBracket,
    modes: u32,
    degree: u32,
    exec: Execution,
) -> Result<CrosscheckReport> {
    let (lhs, rhs) = crosscheck_sides(f, g, bracket, modes, degree, exec)?;
    let diff = lhs.sub(&rhs);
    let mismatches = diff.terms().take(8).map(|(m, c)| format!("{m}: {c}")).collect();
    Ok(CrosscheckReport {
        retained: lhs.len().max(rhs.len()),
        agree: diff.is_zero(),
        trivial: lhs.is_zero(),
        mismatches,
    })
}

/// Scans `c in {1, i, -i}` on the pair `(int u_x^2/2, int u^3/6)`, whose bracket
/// is nonzero, and returns the candidates that reproduce the `delta'` side.
pub fn convention_candidates(modes: u32) -> Result<Vec<Gauss>> {
    let u = DiffPoly::coord(1, 0);
    let f = DiffPoly::jet(1, 0, 1).pow(2).scale(&rat::rat(1, 2));
    let g = u.pow(3).scale(&rat::rat(1, 6));
    let unit = ModeBracket::new(vec![vec![Rat::one()]], Gauss::one());
    let (lhs, rhs) = crosscheck_sides(&f, &g, &unit, modes, 4, Execution::Sequential)?;
    if lhs.is_zero() {
        return Err(Error::IntegrabilityFailure("calibration bracket vanished".into()));
    }
    let cands = [Gauss::one(), Gauss::i(), -&Gauss::i()];
    Ok(cands.into_iter().filter(|c| rhs.scale(c) == lhs).collect())
}

/// The unique convention constant, or an error if none or several fit.
pub fn determine_convention(modes: u32) -> Result<Gauss> {
    let c = convention_candidates(modes)?;
    match c.as_slice() {
        [one] => Ok(one.clone()),
        _ => Err(Error::IntegrabilityFailure(format!("{} convention constants fit", c.len()))),
    }
}

/// Jacobi identity on all triples of monomials of degree `<= 2` in the modes
/// `u0, p_1, q_1, p_2, q_2`. Returns the number of nonzero Jacobiators.
pub fn jacobi_single_modes(bracket: &ModeBracket) -> usize {
    let n = bracket.eta_inv.len();
    let mut vars = Vec::new();
    for a in 0..n {
        vars.extend([Mode::U0(a), Mode::P(a, 1), Mode::Q(a, 1), Mode::P(a, 2), Mode::Q(a, 2)]);
    }
    let mut monos: Vec<FourierPolynomial> = Vec::new();
    for (i, &x) in vars.iter().enumerate() {
        monos.push(FourierPolynomial::generator(n, 2, 6, x));
        for &y in &vars[i..] {
            let mut p = FourierPolynomial::zero(n, 2, 6);
            p.add_term(ModeMono::from_factors(&[(x, 1), (y, 1)]), Gauss::one());
            monos.push(p);
        }
    }
    let br = |a: &FourierPolynomial, b: &FourierPolynomial| raise_degree(bracket.bracket(a, b), 6);
    let mut bad = 0;
    for a in &monos {
        for b in &monos {
            let ab = br(a, b);
            for c in &monos {
                let j = br(a, &br(b, c)).add(&br(b, &br(c, a))).add(&br(c, &ab));
                if !j.is_zero() {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// Degrees of the formal variables: `deg t^a = deg u0^a = deg(Delta_a) - 2`,
/// `deg q_k^a = deg(Delta_a) - 2 + 2ck`, `deg p_k^a = deg(Delta_a) - 2 - 2ck`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SftGrading {
    pub deg_delta: Vec<Rat>,
    pub c: Rat,
}

impl SftGrading {
    /// Trivial bundle (`c = 0`).
    pub fn trivial(deg_delta: Vec<Rat>) -> Self {
        SftGrading { deg_delta, c: Rat::zero() }
    }

    pub fn degree(&self, m: Mode) -> Rat {
        let two = rat::int(2);
        match m {
            Mode::T(a) | Mode::U0(a) => &self.deg_delta[a] - &two,
            Mode::Q(a, k) => &self.deg_delta[a] - &two + &two * &self.c * rat::int(k as i64),
            Mode::P(a, k) => &self.deg_delta[a] - &two - &two * &self.c * rat::int(k as i64),
        }
    }

    pub fn mono_degree(&self, m: &ModeMono) -> Rat {
        m.factors().iter().map(|(v, e)| self.degree(*v) * rat::int(*e as i64)).sum()
    }

    /// The common degree of all monomials, if homogeneous.
    pub fn homogeneous_degree(&self, p: &FourierPolynomial) -> Option<Rat> {
        let mut it = p.terms().map(|(m, _)| self.mono_degree(m));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Expected degree `2(dim - 3) - 2(j - 1) - deg(Delta_a)` of the lift of `h_{a,j}`.
    pub fn expected_lift_degree(&self, complex_dim: i64, alpha: usize, j: i64) -> Rat {
        rat::int(2 * (complex_dim - 3) - 2 * (j - 1)) - &self.deg_delta[alpha]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn u() -> DiffPoly {
        DiffPoly::coord(1, 0)
    }

    fn pq(k: u32) -> ModeMono {
        ModeMono::from_factors(&[(Mode::P(0, k), 1), (Mode::Q(0, k), 1)])
    }

    #[test]
    fn quadratic_and_cubic_expansions() {
        let k = 5;
        let f = to_fourier(&u().pow(2).scale(&rat(1, 2)), k, 4).unwrap();
        assert_eq!(f.coeff(&ModeMono::from_factors(&[(Mode::U0(0), 2)])), Gauss::real(rat(1, 2)));
        for i in 1..=k {
            assert_eq!(f.coeff(&pq(i)), Gauss::one());
        }
        assert_eq!(f.len(), k as usize + 1);
        assert!(to_fourier(&DiffPoly::jet(1, 0, 1), k, 4).unwrap().is_zero());

        let g = to_fourier(&u().pow(3).scale(&rat(1, 6)), k, 4).unwrap();
        let mut expect = FourierPolynomial::zero(1, k, 4);
        expect.add_term(ModeMono::from_factors(&[(Mode::U0(0), 3)]), Gauss::real(rat(1, 6)));
        for i in 1..=k {
            expect.add_term(pq(i).mul(&ModeMono::single(Mode::U0(0))), Gauss::one());
            for j in 1..=k {
                if i + j <= k {
                    let p = ModeMono::from_factors(&[(Mode::P(0, i), 1), (Mode::P(0, j), 1), (Mode::Q(0, i + j), 1)]);
                    let q = ModeMono::from_factors(&[(Mode::Q(0, i), 1), (Mode::Q(0, j), 1), (Mode::P(0, i + j), 1)]);
                    expect.add_term(p, Gauss::real(rat(1, 2)));
                    expect.add_term(q, Gauss::real(rat(1, 2)));
                }
            }
        }
        assert_eq!(g, expect);
    }

    #[test]
    fn generator_brackets() {
        let br = ModeBracket::new(vec![vec![int(1)]], Gauss::one());
        let p = FourierPolynomial::generator(1, 4, 4, Mode::P(0, 3));
        let q = FourierPolynomial::generator(1, 4, 4, Mode::Q(0, 3));
        let q2 = FourierPolynomial::generator(1, 4, 4, Mode::Q(0, 2));
        let z = FourierPolynomial::generator(1, 4, 4, Mode::U0(0));
        assert_eq!(br.bracket(&p, &q).coeff(&ModeMono::one()), Gauss::real(int(3)));
        assert!(br.bracket(&p, &q2).is_zero());
        assert!(br.bracket(&z, &p).is_zero());
        let h = to_fourier(&u().pow(2).scale(&rat(1, 2)), 4, 4).unwrap();
        assert!(br.bracket(&h, &h).is_zero());
    }

    #[test]
    fn convention_is_unique() {
        assert_eq!(determine_convention(6).unwrap(), bracket_constant());
    }

    #[test]
    fn jacobi_vanishes() {
        assert_eq!(jacobi_single_modes(&ModeBracket::scalar()), 0);
    }

    #[test]
    fn lift_of_cubic() {
        let h = CoeffFn::var(1, 0).pow(3).scale(&rat(1, 6));
        let k = 3;
        let lift = sft_lift(&h, k, 3).unwrap();
        let t = ModeMono::single(Mode::T(0));
        let u0 = ModeMono::single(Mode::U0(0));
        assert_eq!(lift.coeff(&ModeMono::from_factors(&[(Mode::T(0), 3)])), Gauss::real(rat(1, 6)));
        assert_eq!(lift.coeff(&t.mul(&u0).mul(&u0)), Gauss::real(rat(1, 2)));
        assert_eq!(lift.coeff(&t.mul(&pq(2))), Gauss::one());
        let zero_mode = sft_lift(&h, 0, 3).unwrap();
        let direct = {
            let mut p = FourierPolynomial::zero(1, 0, 3);
            for (e, c) in [(0u32, rat(1, 6)), (1, rat(1, 2)), (2, rat(1, 2)), (3, rat(1, 6))] {
                let mut m = ModeMono::one();
                if 3 - e > 0 {
                    m = m.mul(&ModeMono::from_factors(&[(Mode::T(0), 3 - e)]));
                }
                if e > 0 {
                    m = m.mul(&ModeMono::from_factors(&[(Mode::U0(0), e)]));
                }
                p.add_term(m, Gauss::real(c));
            }
            p
        };
        assert_eq!(zero_mode, direct);
        let g = SftGrading::trivial(vec![int(0)]);
        assert_eq!(g.homogeneous_degree(&lift), Some(g.expected_lift_degree(0, 0, 1)));
    }

    #[test]
    fn lift_with_exponential() {
        let h = CoeffFn::exp_var(1, 0, int(1));
        let lift = sft_lift(&h, 2, 2).unwrap();
        assert_eq!(lift.coeff(&ModeMono::one()), Gauss::one());
        assert_eq!(lift.coeff(&pq(1)), Gauss::one());
        assert_eq!(lift.coeff(&ModeMono::from_factors(&[(Mode::T(0), 1), (Mode::U0(0), 1)])), Gauss::one());
    }
}
