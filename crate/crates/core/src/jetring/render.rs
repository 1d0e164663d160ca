//! Canonical textual rendering in the expression grammar understood by the
//! command line parser.

use num_traits::{One, Signed, Zero};

use super::coeff::{CoeffFn, CoeffKey};
use super::diffpoly::{DiffPoly, JetMono, JetVar};
use crate::rat::{self, Rat};

/// Name of the jet variable: `u_x`, `u_xx`, `u_xxx`, then `u_x4`, `u_x5`, ...
pub fn jet_name(name: &str, order: u32) -> String {
    match order {
        0 => name.to_string(),
        1..=3 => format!("{name}_{}", "x".repeat(order as usize)),
        k => format!("{name}_x{k}"),
    }
}

fn power(base: String, e: u32) -> String {
    if e == 1 {
        base
    } else {
        format!("{base}^{e}")
    }
}

/// Renders `sum m_a u^a`.
pub fn render_linear(ms: &[Rat], names: &[String]) -> String {
    let parts: Vec<(Rat, String)> = ms
        .iter()
        .zip(names)
        .filter(|(m, _)| !m.is_zero())
        .map(|(m, name)| (m.clone(), name.clone()))
        .collect();
    join_terms(parts)
}

fn key_factors(key: &CoeffKey, names: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    if key.surd {
        out.push("isqrt2".to_string());
    }
    for (p, name) in key.powers.iter().zip(names) {
        if *p > 0 {
            out.push(power(name.clone(), *p));
        }
    }
    if key.has_exp() {
        out.push(format!("exp({})", render_linear(&key.exps, names)));
    }
    out
}

fn mono_factors(eps: u32, mono: &JetMono, names: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    if eps > 0 {
        out.push(power("eps".into(), eps));
    }
    for (JetVar { coord, order }, e) in mono.factors() {
        out.push(power(jet_name(&names[*coord], *order), *e));
    }
    out
}

/// Joins `(coefficient, factor string)` pairs into a signed sum.
fn join_terms(parts: Vec<(Rat, String)>) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (c, factors)) in parts.into_iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        let body = if factors.is_empty() {
            rat::render(&a)
        } else if a.is_one() {
            factors
        } else {
            format!("{}*{}", rat::render(&a), factors)
        };
        match (i, neg) {
            (0, true) => s.push_str(&format!("-{body}")),
            (0, false) => s.push_str(&body),
            (_, true) => s.push_str(&format!(" - {body}")),
            (_, false) => s.push_str(&format!(" + {body}")),
        }
    }
    s
}

pub fn render_coeff(f: &CoeffFn, names: &[String]) -> String {
    join_terms(f.terms().map(|(k, c)| (c.clone(), key_factors(k, names).join("*"))).collect())
}

pub fn render_diffpoly(p: &DiffPoly, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (key, coeff) in p.terms() {
        let tail = mono_factors(key.eps, &key.mono, names);
        for (ck, c) in coeff.terms() {
            let mut f = key_factors(ck, names);
            f.extend(tail.iter().cloned());
            parts.push((c.clone(), f.join("*")));
        }
    }
    join_terms(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn names() -> Vec<String> {
        vec!["u".into(), "v".into()]
    }

    #[test]
    fn p1_potential() {
        let u = CoeffFn::var(2, 0);
        let f = &(&u.pow(2) * &CoeffFn::var(2, 1)).scale(&rat(1, 2)) + &CoeffFn::exp_var(2, 1, int(1));
        assert_eq!(render_coeff(&f, &names()), "exp(v) + 1/2*u^2*v");
    }

    #[test]
    fn jets_and_signs() {
        let p = &DiffPoly::jet(2, 0, 4).mul_eps(2).scale(&rat(-1, 720)) + &DiffPoly::jet(2, 1, 1);
        assert_eq!(render_diffpoly(&p, &names()), "v_x - 1/720*eps^2*u_x4");
        assert_eq!(render_diffpoly(&DiffPoly::zero(2), &names()), "0");
        let e = CoeffFn::exp_linear(&[int(1), rat(-1, 2)]);
        assert_eq!(render_coeff(&e, &names()), "exp(u - 1/2*v)");
    }
}
