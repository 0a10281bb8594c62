//! Small dense linear algebra: Gaussian elimination and Perron–Frobenius helpers.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n);
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum()).collect()
    }

    /// Principal submatrix on the given indices.
    pub fn submatrix(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    let scale = a.max_abs().max(1e-300);
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs()))?;
        if !(m[p * n + c].abs() > 1e-14 * scale) {
            return None;
        }
        if p != c {
            for j in 0..n {
                m.swap(c * n + j, p * n + j);
            }
            x.swap(c, p);
        }
        let d = m[c * n + c];
        for i in c + 1..n {
            let f = m[i * n + c] / d;
            if f != 0.0 {
                for j in c..n {
                    m[i * n + j] -= f * m[c * n + j];
                }
                x[i] -= f * x[c];
            }
        }
    }
    for c in (0..n).rev() {
        let mut s = x[c];
        for j in c + 1..n {
            s -= m[c * n + j] * x[j];
        }
        x[c] = s / m[c * n + c];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// `true` iff the nonnegative matrix `m` has spectral radius `< 1`.
///
/// Uses the M-matrix characterisation: `I - m` is a nonsingular M-matrix iff
/// `(I - m) x = 1` has a solution with `x > 0`.
pub fn is_subcritical(m: &Matrix) -> bool {
    let n = m.n;
    if n == 0 {
        return true;
    }
    let mut a = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= m[(i, j)];
        }
    }
    match solve(&a, &vec![1.0; n]) {
        Some(x) => x.iter().all(|&v| v > 0.0),
        None => false,
    }
}

/// Irreducibility of the nonnegative pattern of `m` (strong connectivity).
pub fn is_irreducible(m: &Matrix) -> bool {
    let n = m.n;
    if n == 0 {
        return false;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let e = if forward { m[(i, j)] } else { m[(j, i)] };
                if e > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    if n == 1 {
        return m[(0, 0)] > 0.0;
    }
    reach(true) && reach(false)
}

/// Perron–Frobenius eigenvalue and right eigenvector (first component 1) of an
/// irreducible nonnegative matrix, by power iteration on `m + I`.
///
/// The shift makes the iteration converge for periodic matrices too.
pub fn frobenius_eigenvalue(m: &Matrix, tol: f64) -> Result<(f64, Vec<f64>), Error> {
    let n = m.n;
    if !is_irreducible(m) {
        return Err(Error::NoConvergence { iterations: 0 });
    }
    let mut v = vec![1.0; n];
    let max_iter = 1_000_000;
    for _ in 0..max_iter {
        let mut w = m.mul_vec(&v);
        for i in 0..n {
            w[i] += v[i];
        }
        // Collatz–Wielandt bounds on the eigenvalue of m + I.
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let r = w[i] / v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let norm = w.iter().fold(0.0f64, |a, &x| a.max(x));
        for x in w.iter_mut() {
            *x /= norm;
        }
        v = w;
        let lambda = 0.5 * (lo + hi) - 1.0;
        if hi - lo <= tol * hi.max(1.0) {
            let v0 = v[0];
            for x in v.iter_mut() {
                *x /= v0;
            }
            return Ok((lambda, v));
        }
        if !lambda.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}

/// Spectral radius estimate of a nonnegative matrix (reducible allowed), by power
/// iteration on `m + I`.
pub fn spectral_radius(m: &Matrix) -> f64 {
    let n = m.n;
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0; n];
    let mut est = 0.0;
    for _ in 0..20_000 {
        let mut w = m.mul_vec(&v);
        for i in 0..n {
            w[i] += v[i];
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            num += w[i] * w[i];
            den += w[i] * v[i];
        }
        let next = if den > 0.0 { num / den - 1.0 } else { 0.0 };
        let norm = w.iter().fold(0.0f64, |a, &x| a.max(x));
        if norm == 0.0 {
            return 0.0;
        }
        for x in w.iter_mut() {
            *x /= norm;
        }
        v = w;
        if (next - est).abs() <= 1e-14 * next.abs().max(1.0) {
            return next.max(0.0);
        }
        est = next;
    }
    est.max(0.0)
}
