//! Exact rational linear algebra on small dense matrices.

use num_traits::{One, Zero};

use crate::rat::Rat;

pub type RatMatrix = Vec<Vec<Rat>>;

pub fn identity(n: usize) -> RatMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect()
}

pub fn zeros(r: usize, c: usize) -> RatMatrix {
    vec![vec![Rat::zero(); c]; r]
}

pub fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = zeros(n, p);
    for i in 0..n {
        for k in 0..m {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..p {
                out[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    out
}

pub fn transpose(a: &RatMatrix) -> RatMatrix {
    let c = a.first().map_or(0, Vec::len);
    (0..c).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn det(a: &RatMatrix) -> Rat {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Rat::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rat::zero();
        };
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        d *= &m[col][col];
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
        }
    }
    d
}

pub fn inverse(a: &RatMatrix) -> Option<RatMatrix> {
    let n = a.len();
    let cols = identity(n);
    let sol = solve_many(a, &cols)?;
    Some(sol)
}

/// Solves `a x = b` column by column for square nonsingular `a`.
fn solve_many(a: &RatMatrix, b: &RatMatrix) -> Option<RatMatrix> {
    let n = a.len();
    let p = b.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rat>> = a.iter().zip(b).map(|(r, s)| r.iter().chain(s).cloned().collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(piv, col);
        let inv = Rat::one() / &m[col][col];
        for c in col..n + p {
            m[col][c] = &m[col][c] * &inv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..n + p {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Finds some solution of a possibly rectangular system `a x = b`, or `None`
/// when it is inconsistent. Free variables are set to zero.
pub fn solve_consistent(a: &RatMatrix, b: &[Rat]) -> Option<Vec<Rat>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| r.iter().cloned().chain(std::iter::once(v.clone())).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(piv) = (row..rows).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(piv, row);
        let inv = Rat::one() / &m[row][col];
        for c in col..=cols {
            m[row][c] = &m[row][c] * &inv;
        }
        for r in 0..rows {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..=cols {
                let t = &f * &m[row][c];
                m[r][c] -= t;
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    if m[row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    #[test]
    fn inverse_roundtrip() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(1)]];
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert_eq!(det(&a), int(1));
        assert!(inverse(&vec![vec![int(1), int(2)], vec![int(2), int(4)]]).is_none());
    }

    #[test]
    fn overdetermined_systems() {
        let a = vec![vec![int(1), int(0)], vec![int(0), int(2)], vec![int(1), int(2)]];
        assert_eq!(solve_consistent(&a, &[int(1), int(1), int(2)]), Some(vec![int(1), rat(1, 2)]));
        assert_eq!(solve_consistent(&a, &[int(1), int(1), int(3)]), None);
    }
}
