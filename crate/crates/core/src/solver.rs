//! Hodograph solutions of dispersionless hierarchies and tau-function checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::jetring::CoeffFn;
use crate::par::{self, Execution};
use crate::rat::{self, Rat};

/// A time `t^{a,p}` (zero-based `a`, `p >= 0`).
pub type TimeIndex = (usize, i64);

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Maximum number of step halvings when continuation from the previous
    /// slice fails.
    pub max_halvings: u32,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings { tol: 1e-12, max_iter: 50, max_halvings: 8 }
    }
}

/// `x eta_{g1} + sum (t^{a,p}(s) - c^{a,p}) d_g h_{a,p-1}(u) = 0` along the
/// one-parameter family `t^{a,p}(s) = s * times[(a,p)]`, `s` ranging over `ts`.
#[derive(Clone, Debug, PartialEq)]
pub struct HodographProblem {
    pub times: BTreeMap<TimeIndex, f64>,
    pub constants: BTreeMap<TimeIndex, f64>,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub newton: NewtonSettings,
}

impl HodographProblem {
    /// Topological constants via the dilaton shift: `c^{1,1} = 1`.
    pub fn topological(times: BTreeMap<TimeIndex, f64>, xs: Vec<f64>, ts: Vec<f64>) -> Self {
        let mut constants = BTreeMap::new();
        constants.insert((0, 1), 1.0);
        HodographProblem { times, constants, xs, ts, newton: NewtonSettings::default() }
    }

    /// Single active time `t^{a,p} = s` with topological constants.
    pub fn single_time(t: TimeIndex, xs: Vec<f64>, ts: Vec<f64>) -> Self {
        Self::topological(BTreeMap::from([(t, 1.0)]), xs, ts)
    }

    fn validate(&self) -> Result<()> {
        if !(self.newton.tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if self.xs.is_empty() || self.ts.is_empty() {
            return Err(Error::InvalidInput("empty grid".into()));
        }
        if self.times.keys().chain(self.constants.keys()).any(|&(_, p)| p < 0) {
            return Err(Error::InvalidInput("time levels start at 0".into()));
        }
        Ok(())
    }
}

/// `n` evenly spaced samples on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointStatus {
    Converged,
    Diverged,
    /// Singular Jacobian (gradient catastrophe).
    Singular,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionGrid {
    pub n: usize,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// `values[t][x][a]`.
    pub values: Vec<Vec<Vec<f64>>>,
    pub status: Vec<Vec<PointStatus>>,
    /// Norm of the implicit system at the returned point.
    pub residuals: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveSummary {
    pub points: usize,
    pub converged: usize,
    pub diverged: usize,
    pub singular: usize,
    pub max_residual: f64,
    /// `(x, t)` of every singular point.
    pub singular_at: Vec<(f64, f64)>,
}

impl SolutionGrid {
    pub fn all_converged(&self) -> bool {
        self.status.iter().flatten().all(|s| *s == PointStatus::Converged)
    }

    pub fn value(&self, ti: usize, xi: usize, a: usize) -> f64 {
        self.values[ti][xi][a]
    }

    pub fn summary(&self) -> SolveSummary {
        let mut s = SolveSummary {
            points: 0,
            converged: 0,
            diverged: 0,
            singular: 0,
            max_residual: 0.0,
            singular_at: Vec::new(),
        };
        for (ti, row) in self.status.iter().enumerate() {
            for (xi, st) in row.iter().enumerate() {
                s.points += 1;
                match st {
                    PointStatus::Converged => {
                        s.converged += 1;
                        s.max_residual = s.max_residual.max(self.residuals[ti][xi]);
                    }
                    PointStatus::Diverged => s.diverged += 1,
                    PointStatus::Singular => {
                        s.singular += 1;
                        s.singular_at.push((self.xs[xi], self.ts[ti]));
                    }
                }
            }
        }
        s
    }

    /// CSV with columns `x, t, u1..un, residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,t");
        for a in 0..self.n {
            let _ = write!(out, ",u{}", a + 1);
        }
        out.push_str(",residual\n");
        for (ti, t) in self.ts.iter().enumerate() {
            for (xi, x) in self.xs.iter().enumerate() {
                let _ = write!(out, "{},{}", fmt17(*x), fmt17(*t));
                for v in &self.values[ti][xi] {
                    let _ = write!(out, ",{}", fmt17(*v));
                }
                let _ = writeln!(out, ",{}", fmt17(self.residuals[ti][xi]));
            }
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Precomputed gradient and Hessian of the hodograph system.
struct System {
    n: usize,
    eta_row: Vec<f64>,
    /// `(time, constant, d_g h, d_g d_v h)` per active level.
    terms: Vec<(f64, f64, Vec<CoeffFn>, Vec<Vec<CoeffFn>>)>,
}

impl System {
    fn new(h: &Hierarchy, p: &HodographProblem) -> Result<Self> {
        let n = h.n();
        let eta = h.manifold().metric();
        let eta_row = (0..n).map(|g| rat::to_f64(&eta[g][0])).collect();
        let mut keys: Vec<TimeIndex> = p.times.keys().chain(p.constants.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        let mut terms = Vec::new();
        for (a, lvl) in keys {
            let dens = h.density(a, lvl - 1)?;
            let grad: Vec<CoeffFn> = (0..n).map(|g| dens.partial(g)).collect();
            let hess = grad.iter().map(|d| (0..n).map(|v| d.partial(v)).collect()).collect();
            let w = p.times.get(&(a, lvl)).copied().unwrap_or(0.0);
            let c = p.constants.get(&(a, lvl)).copied().unwrap_or(0.0);
            terms.push((w, c, grad, hess));
        }
        Ok(System { n, eta_row, terms })
    }

    fn eval(&self, x: f64, s: f64, u: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n;
        let mut g = DVector::from_iterator(n, self.eta_row.iter().map(|e| x * e));
        let mut j = DMatrix::zeros(n, n);
        for (w, c, grad, hess) in &self.terms {
            let k = s * w - c;
            if k == 0.0 {
                continue;
            }
            for a in 0..n {
                g[a] += k * grad[a].eval(u)?;
                for b in 0..n {
                    j[(a, b)] += k * hess[a][b].eval(u)?;
                }
            }
        }
        Ok((g, j))
    }

    fn newton(&self, x: f64, s: f64, guess: &[f64], cfg: &NewtonSettings) -> (Vec<f64>, PointStatus, f64) {
        let mut u = guess.to_vec();
        let mut last = f64::INFINITY;
        for _ in 0..cfg.max_iter {
            let Ok((g, j)) = self.eval(x, s, &u) else {
                return (u, PointStatus::Diverged, f64::INFINITY);
            };
            last = g.norm();
            if !last.is_finite() {
                return (u, PointStatus::Diverged, last);
            }
            if last < cfg.tol {
                return (u, PointStatus::Converged, last);
            }
            let scale = j.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            let lu = j.lu();
            let det = lu.determinant();
            if det.abs() < 1e-14 * scale.powi(self.n as i32) {
                return (u, PointStatus::Singular, last);
            }
            let Some(step) = lu.solve(&g) else {
                return (u, PointStatus::Singular, last);
            };
            for a in 0..self.n {
                u[a] -= step[a];
            }
        }
        (u, PointStatus::Diverged, last)
    }

    /// Newton from `guess` at `s0` to `s1`, halving the step on failure.
    fn continue_to(&self, x: f64, s0: f64, s1: f64, guess: &[f64], cfg: &NewtonSettings) -> (Vec<f64>, PointStatus, f64) {
        let direct = self.newton(x, s1, guess, cfg);
        if direct.1 == PointStatus::Converged {
            return direct;
        }
        let mut pieces = 2u32;
        for _ in 0..cfg.max_halvings {
            let mut u = guess.to_vec();
            let mut ok = true;
            let mut res = (u.clone(), PointStatus::Converged, 0.0);
            for i in 1..=pieces {
                let s = s0 + (s1 - s0) * i as f64 / pieces as f64;
                res = self.newton(x, s, &u, cfg);
                if res.1 != PointStatus::Converged {
                    ok = false;
                    break;
                }
                u = res.0.clone();
            }
            if ok {
                return res;
            }
            if res.1 == PointStatus::Singular {
                return res;
            }
            pieces *= 2;
        }
        direct
    }
}

/// Solves the hodograph system at every grid point. Slices in `ts` are
/// visited in order and warm-started from the previous slice; the first slice
/// starts from `u = (x, 0, ..., 0)`.
pub fn hodograph_solve(h: &Hierarchy, problem: &HodographProblem, exec: Execution) -> Result<SolutionGrid> {
    problem.validate()?;
    let sys = System::new(h, problem)?;
    let n = h.n();
    let cfg = &problem.newton;
    let mut values = Vec::with_capacity(problem.ts.len());
    let mut status = Vec::with_capacity(problem.ts.len());
    let mut residuals = Vec::with_capacity(problem.ts.len());
    let mut prev: Option<(f64, Vec<Vec<f64>>)> = None;
    for &s in &problem.ts {
        let idx: Vec<usize> = (0..problem.xs.len()).collect();
        let row = par::map(exec, &idx, |&i| {
            let x = problem.xs[i];
            match &prev {
                None => {
                    let mut seed = vec![0.0; n];
                    seed[0] = x;
                    sys.continue_to(x, 0.0, s, &seed, cfg)
                }
                Some((s0, vals)) => sys.continue_to(x, *s0, s, &vals[i], cfg),
            }
        });
        let vals: Vec<Vec<f64>> = row.iter().map(|r| r.0.clone()).collect();
        status.push(row.iter().map(|r| r.1).collect());
        residuals.push(row.iter().map(|r| r.2).collect());
        values.push(vals.clone());
        prev = Some((s, vals));
    }
    Ok(SolutionGrid { n, xs: problem.xs.clone(), ts: problem.ts.clone(), values, status, residuals })
}

/// Hodograph solve with the topological constants.
pub fn topological_solution(
    h: &Hierarchy,
    times: BTreeMap<TimeIndex, f64>,
    xs: Vec<f64>,
    ts: Vec<f64>,
    exec: Execution,
) -> Result<SolutionGrid> {
    hodograph_solve(h, &HodographProblem::topological(times, xs, ts), exec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub max_residual: f64,
    /// `(x, t)` of the maximum.
    pub location: (f64, f64),
    /// Interior points examined.
    pub points: usize,
    /// Residual exceeded the blow-up threshold.
    pub blowup: bool,
}

/// Centered differences of the solution compared with the flow
/// `u^g_t = A^g_v(u) u^v_x` of the given time, at interior points whose
/// stencil converged. Requires uniform spacing in both directions.
pub fn residual_check(h: &Hierarchy, grid: &SolutionGrid, time: TimeIndex, blowup_threshold: f64) -> Result<ResidualReport> {
    if grid.xs.len() < 3 || grid.ts.len() < 3 {
        return Err(Error::InvalidInput("residual check needs at least 3 samples per direction".into()));
    }
    let a = h.flow(time.0, time.1)?;
    let n = grid.n;
    let dx = grid.xs[1] - grid.xs[0];
    let dt = grid.ts[1] - grid.ts[0];
    let ok = |ti: usize, xi: usize| grid.status[ti][xi] == PointStatus::Converged;
    let mut rep = ResidualReport { max_residual: 0.0, location: (0.0, 0.0), points: 0, blowup: false };
    for ti in 1..grid.ts.len() - 1 {
        for xi in 1..grid.xs.len() - 1 {
            if ![(ti, xi), (ti - 1, xi), (ti + 1, xi), (ti, xi - 1), (ti, xi + 1)].iter().all(|&(t, x)| ok(t, x)) {
                continue;
            }
            let u = &grid.values[ti][xi];
            let mut r = 0.0f64;
            for g in 0..n {
                let ut = (grid.values[ti + 1][xi][g] - grid.values[ti - 1][xi][g]) / (2.0 * dt);
                let mut rhs = 0.0;
                for v in 0..n {
                    let ux = (grid.values[ti][xi + 1][v] - grid.values[ti][xi - 1][v]) / (2.0 * dx);
                    rhs += a[g][v].eval(u)? * ux;
                }
                r = r.max((ut - rhs).abs());
            }
            rep.points += 1;
            if r > rep.max_residual || r.is_nan() {
                rep.max_residual = r;
                rep.location = (grid.xs[xi], grid.ts[ti]);
            }
        }
    }
    rep.blowup = !(rep.max_residual <= blowup_threshold);
    Ok(rep)
}

/// Genus-0 intersection numbers `<tau_{d_1} ... tau_{d_k}>` from the string
/// equation with `<tau_0^3> = 1`.
pub fn genus0_intersection(ds: &[u32]) -> Rat {
    let k = ds.len();
    if k < 3 || ds.iter().sum::<u32>() as usize + 3 != k {
        return Rat::from_integer(0.into());
    }
    if k == 3 {
        return Rat::from_integer(1.into());
    }
    let pos = ds.iter().position(|&d| d == 0).expect("dimension count forces a tau_0");
    let rest: Vec<u32> = ds.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &d)| d).collect();
    let mut acc = Rat::from_integer(0.into());
    for j in 0..rest.len() {
        if rest[j] > 0 {
            let mut r = rest.clone();
            r[j] -= 1;
            acc += genus0_intersection(&r);
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct TauReport {
    /// Largest `|FD Hessian of reconstructed log tau - Omega|` over the
    /// interior box points, per entry `(aa, ab, bb)`.
    pub hessian_errors: [f64; 3],
    /// `|d_a d_b log tau - d_b d_a log tau|` at interior points.
    pub mixed_asymmetry: f64,
    /// Third derivative in the first time at the box center.
    pub third_derivative: f64,
    /// `<tau_0^3>` from the string equation.
    pub third_oracle: f64,
    /// Restriction identity error along the first time axis.
    pub restriction_error: f64,
}

impl TauReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.hessian_errors.iter().all(|e| *e < tol)
            && self.mixed_asymmetry < tol
            && (self.third_derivative - self.third_oracle).abs() < tol
            && self.restriction_error < tol
    }
}

/// Reconstructs `log tau` on a 5x5 box in the times `(t^{1,0}, t^{1,1})`
/// centered at zero from the topological solution and `Omega`, then compares
/// its finite-difference derivatives with `Omega` on the solution.
pub fn tau_consistency(h: &Hierarchy, half_width: f64, newton: &NewtonSettings) -> Result<TauReport> {
    let ta: TimeIndex = (0, 0);
    let tb: TimeIndex = (0, 1);
    let m = 5usize;
    let step = half_width / 2.0;
    let grid: Vec<f64> = (0..m).map(|i| -half_width + step * i as f64).collect();
    let n = h.n();
    let solve = |a: f64, b: f64| -> Result<Vec<f64>> {
        let mut times = BTreeMap::new();
        times.insert(ta, a);
        times.insert(tb, b);
        let mut p = HodographProblem::topological(times, vec![0.0], vec![1.0]);
        p.newton = newton.clone();
        let g = hodograph_solve(h, &p, Execution::Sequential)?;
        if !g.all_converged() {
            return Err(Error::IntegrabilityFailure(format!("Newton failed at ({a}, {b})")));
        }
        Ok(g.values[0][0].clone())
    };
    let om_aa = h.omega(ta.0, ta.1, ta.0, ta.1)?;
    let om_ab = h.omega(ta.0, ta.1, tb.0, tb.1)?;
    let om_bb = h.omega(tb.0, tb.1, tb.0, tb.1)?;
    let mut u = vec![vec![vec![0.0; n]; m]; m];
    let mut omega = vec![vec![[0.0; 3]; m]; m];
    for (i, &a) in grid.iter().enumerate() {
        for (j, &b) in grid.iter().enumerate() {
            u[i][j] = solve(a, b)?;
            omega[i][j] = [om_aa.eval(&u[i][j])?, om_ab.eval(&u[i][j])?, om_bb.eval(&u[i][j])?];
        }
    }
    let c = m / 2;
    let trap = |f: &dyn Fn(usize) -> f64, from: usize, to: usize| -> f64 {
        let (lo, hi, sign) = if from <= to { (from, to, 1.0) } else { (to, from, -1.0) };
        let mut s = 0.0;
        for k in lo..hi {
            s += 0.5 * step * (f(k) + f(k + 1));
        }
        sign * s
    };
    // gradient: along a at b = 0, then along b
    let mut grad_a = vec![vec![0.0; m]; m];
    let mut grad_b = vec![vec![0.0; m]; m];
    for i in 0..m {
        let ga0 = trap(&|k| omega[k][c][0], c, i);
        let gb0 = trap(&|k| omega[k][c][1], c, i);
        for j in 0..m {
            grad_a[i][j] = ga0 + trap(&|k| omega[i][k][1], c, j);
            grad_b[i][j] = gb0 + trap(&|k| omega[i][k][2], c, j);
        }
    }
    let mut log_tau = vec![vec![0.0; m]; m];
    for i in 0..m {
        let l0 = trap(&|k| grad_a[k][c], c, i);
        for j in 0..m {
            log_tau[i][j] = l0 + trap(&|k| grad_b[i][k], c, j);
        }
    }
    let h2 = step * step;
    let mut errs = [0.0f64; 3];
    let mut asym = 0.0f64;
    let mut hess_aa = vec![vec![0.0; m]; m];
    for i in 1..m - 1 {
        for j in 1..m - 1 {
            let f = &log_tau;
            let aa = (f[i + 1][j] - 2.0 * f[i][j] + f[i - 1][j]) / h2;
            let bb = (f[i][j + 1] - 2.0 * f[i][j] + f[i][j - 1]) / h2;
            let ab = (f[i + 1][j + 1] - f[i + 1][j - 1] - f[i - 1][j + 1] + f[i - 1][j - 1]) / (4.0 * h2);
            hess_aa[i][j] = aa;
            errs[0] = errs[0].max((aa - omega[i][j][0]).abs());
            errs[1] = errs[1].max((ab - omega[i][j][1]).abs());
            errs[2] = errs[2].max((bb - omega[i][j][2]).abs());
            let ab_alt = ((grad_b[i + 1][j] - grad_b[i - 1][j]) - (grad_a[i][j + 1] - grad_a[i][j - 1])) / (2.0 * step);
            asym = asym.max(ab_alt.abs());
        }
    }
    let third = (hess_aa[c + 1][c] - hess_aa[c - 1][c]) / (2.0 * step);
    let oracle = rat::to_f64(&genus0_intersection(&[0, 0, 0]));
    // restriction: log tau(a, 0) against F(u(a)) with the same affine gauge
    let pot = h.manifold().potential();
    let f_at = |v: &[f64]| pot.eval(v);
    let f0 = f_at(&u[c][c])?;
    let df0 = (f_at(&u[c + 1][c])? - f_at(&u[c - 1][c])?) / (2.0 * step);
    let mut restr = 0.0f64;
    for i in 0..m {
        let a = grid[i];
        let expect = f_at(&u[i][c])? - f0 - df0 * a;
        restr = restr.max((log_tau[i][c] - expect).abs());
    }
    Ok(TauReport {
        hessian_errors: errs,
        mixed_asymmetry: asym,
        third_derivative: third,
        third_oracle: oracle,
        restriction_error: restr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FrobeniusManifold;

    fn point(pmax: i64) -> Hierarchy {
        Hierarchy::build(FrobeniusManifold::point(), pmax).unwrap()
    }

    #[test]
    fn point_first_time() {
        let h = point(2);
        let xs = linspace(-1.0, 1.0, 101);
        let p = HodographProblem::single_time((0, 1), xs.clone(), vec![0.0, 0.1, 0.2, 0.3]);
        let g = hodograph_solve(&h, &p, Execution::Sequential).unwrap();
        assert!(g.all_converged());
        for (ti, t) in g.ts.iter().enumerate() {
            for (xi, x) in xs.iter().enumerate() {
                assert!((g.value(ti, xi, 0) - x / (1.0 - t)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn point_second_time_branch() {
        let h = point(2);
        let xs = linspace(-0.5, 0.5, 11);
        let g = hodograph_solve(&h, &HodographProblem::single_time((0, 2), xs.clone(), linspace(0.0, 0.4, 5)), Execution::Sequential)
            .unwrap();
        for (ti, &t) in g.ts.iter().enumerate().skip(1) {
            for (xi, &x) in xs.iter().enumerate() {
                let exact = (1.0 - (1.0 - 2.0 * t * x).sqrt()) / t;
                assert!((g.value(ti, xi, 0) - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn p1_topological_datum() {
        let h = Hierarchy::build(FrobeniusManifold::p1(), 1).unwrap();
        let xs = linspace(-1.0, 1.0, 5);
        let g = topological_solution(&h, BTreeMap::new(), xs.clone(), vec![0.0], Execution::Sequential).unwrap();
        for (xi, x) in xs.iter().enumerate() {
            assert!((g.value(0, xi, 0) - x).abs() < 1e-12);
            assert!(g.value(0, xi, 1).abs() < 1e-12);
        }
    }

    #[test]
    fn catastrophe_is_flagged() {
        let h = point(2);
        let xs = linspace(0.5, 1.0, 11);
        let g = hodograph_solve(&h, &HodographProblem::single_time((0, 1), xs, vec![0.0, 0.5, 1.0]), Execution::Sequential)
            .unwrap();
        let s = g.summary();
        assert!(s.singular > 0);
        assert!(s.singular_at.iter().all(|&(_, t)| t == 1.0));
    }

    #[test]
    fn string_equation() {
        assert_eq!(genus0_intersection(&[0, 0, 0]), rat::int(1));
        assert_eq!(genus0_intersection(&[0, 0, 0, 1]), rat::int(1));
        // (k-3)! / prod d_i!
        assert_eq!(genus0_intersection(&[0, 0, 0, 1, 1]), rat::int(2));
        assert_eq!(genus0_intersection(&[0, 0, 0, 0, 1, 2]), rat::int(3));
        assert_eq!(genus0_intersection(&[0, 0, 0, 0, 2]), rat::int(1));
        assert_eq!(genus0_intersection(&[0, 0, 1]), rat::int(0));
    }

    #[test]
    fn csv_layout() {
        let h = point(1);
        let g = hodograph_solve(&h, &HodographProblem::single_time((0, 1), vec![0.0, 1.0], vec![0.0]), Execution::Sequential)
            .unwrap();
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,t,u1,residual");
        assert_eq!(lines.len(), 3);
    }
}
