//! Small dense factorizations: Cholesky, Householder QR with column
//! pivoting, and an append-only Gram-Schmidt QR used by orthogonal boosting.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm_sq, Matrix};

/// Relative pivot tolerance shared by every rank decision in the crate.
pub const PIVOT_TOL: f64 = 1e-12;

/// Lower-triangular `L` with `L L' = a`.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "cholesky (square)",
            expected: n,
            found: a.ncols(),
        });
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = libm::sqrt(d);
        l.set(j, j, d);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}

/// Householder QR with column pivoting, `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    n: usize,
    k: usize,
    reflectors: Vec<Vec<f64>>,
    betas: Vec<f64>,
    /// Upper triangle, stored by pivoted column.
    r: Matrix,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &Matrix) -> Self {
        Self::with_tolerance(a, PIVOT_TOL)
    }

    pub fn with_tolerance(a: &Matrix, rel_tol: f64) -> Self {
        let n = a.nrows();
        let k = a.ncols();
        let mut work = a.clone();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut reflectors = Vec::new();
        let mut betas = Vec::new();
        let mut rank = 0;
        let mut first_pivot = 0.0;

        for step in 0..n.min(k) {
            // remaining column norms, recomputed exactly each step
            let (best, best_norm) = (step..k)
                .map(|j| (j, norm_sq(&work.col(j)[step..])))
                .fold((step, -1.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
            if best != step {
                swap_columns(&mut work, step, best);
                perm.swap(step, best);
            }
            let norm = libm::sqrt(best_norm.max(0.0));
            if step == 0 {
                first_pivot = norm;
            }
            if norm == 0.0 || norm <= rel_tol * first_pivot {
                break;
            }
            let x = &work.col(step)[step..];
            let alpha = if x[0] >= 0.0 { -norm } else { norm };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let beta = 2.0 / norm_sq(&v);
            for j in step + 1..k {
                let col = &mut work.col_mut(j)[step..];
                let s = beta * dot(&v, col);
                axpy(-s, &v, col);
            }
            let col = work.col_mut(step);
            col[step] = alpha;
            for c in &mut col[step + 1..] {
                *c = 0.0;
            }
            reflectors.push(v);
            betas.push(beta);
            rank += 1;
        }

        let mut r = Matrix::zeros(rank, k);
        for j in 0..k {
            for i in 0..rank.min(j + 1) {
                r.set(i, j, work.get(i, j));
            }
        }
        Self {
            n,
            k,
            reflectors,
            betas,
            r,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.k
    }

    /// Original indices of the columns left outside the numerical rank.
    pub fn dependent_columns(&self) -> Vec<usize> {
        let mut cols = self.perm[self.rank..].to_vec();
        cols.sort_unstable();
        cols
    }

    fn require_full_rank(&self) -> Result<()> {
        if self.is_full_rank() {
            Ok(())
        } else {
            Err(Error::RankDeficient {
                columns: self.dependent_columns(),
            })
        }
    }

    pub fn apply_qt(&self, b: &[f64]) -> Vec<f64> {
        let mut out = b.to_vec();
        for (step, (v, &beta)) in self.reflectors.iter().zip(&self.betas).enumerate() {
            let tail = &mut out[step..];
            let s = beta * dot(v, tail);
            axpy(-s, v, tail);
        }
        out
    }

    pub fn apply_q(&self, c: &[f64]) -> Vec<f64> {
        let mut out = c.to_vec();
        for (step, (v, &beta)) in self.reflectors.iter().zip(&self.betas).enumerate().rev() {
            let tail = &mut out[step..];
            let s = beta * dot(v, tail);
            axpy(-s, v, tail);
        }
        out
    }

    /// Least-squares coefficients in the original column order.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "least-squares right-hand side",
                expected: self.n,
                found: b.len(),
            });
        }
        self.require_full_rank()?;
        let qtb = self.apply_qt(b);
        let z = back_substitute(&self.r, &qtb[..self.k]);
        let mut coef = vec![0.0; self.k];
        for (i, &j) in self.perm.iter().enumerate() {
            coef[j] = z[i];
        }
        Ok(coef)
    }

    /// Row `column` of `(A'A)^{-1} A'`: the weights mapping the response to
    /// that coefficient.
    pub fn influence_row(&self, column: usize) -> Result<Vec<f64>> {
        if column >= self.k {
            return Err(Error::ColumnOutOfRange {
                index: column,
                p: self.k,
            });
        }
        self.require_full_rank()?;
        let pos = self.perm.iter().position(|&j| j == column).unwrap();
        // R' w = e_pos
        let mut w = vec![0.0; self.n];
        for i in 0..self.k {
            let mut s = if i == pos { 1.0 } else { 0.0 };
            for l in 0..i {
                s -= self.r.get(l, i) * w[l];
            }
            w[i] = s / self.r.get(i, i);
        }
        Ok(self.apply_q(&w))
    }
}

fn swap_columns(m: &mut Matrix, a: usize, b: usize) {
    for i in 0..m.nrows() {
        let t = m.get(i, a);
        m.set(i, a, m.get(i, b));
        m.set(i, b, t);
    }
}

/// Solves `R z = rhs` for the leading square upper triangle of `r`.
fn back_substitute(r: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let k = rhs.len();
    let mut z = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = rhs[i];
        for j in i + 1..k {
            s -= r.get(i, j) * z[j];
        }
        z[i] = s / r.get(i, i);
    }
    z
}

/// Thin QR grown one column at a time by classical Gram-Schmidt with a
/// second orthogonalization pass.
#[derive(Debug, Clone, Default)]
pub struct IncrementalQr {
    q: Vec<Vec<f64>>,
    /// `r[j]` holds column `j` of R (length `j + 1`).
    r: Vec<Vec<f64>>,
}

impl IncrementalQr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q(&self, i: usize) -> &[f64] {
        &self.q[i]
    }

    /// Appends a column. Returns `false`, leaving the factorization
    /// untouched, when the column is numerically in the current span.
    pub fn push(&mut self, col: &[f64]) -> bool {
        let k = self.q.len();
        let col_norm = libm::sqrt(norm_sq(col));
        let mut v = col.to_vec();
        let mut coeffs = vec![0.0; k + 1];
        for _ in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let c = dot(qi, &v);
                axpy(-c, qi, &mut v);
                coeffs[i] += c;
            }
        }
        let rnorm = libm::sqrt(norm_sq(&v));
        if col_norm == 0.0 || rnorm <= PIVOT_TOL * col_norm {
            return false;
        }
        for vi in &mut v {
            *vi /= rnorm;
        }
        coeffs[k] = rnorm;
        self.q.push(v);
        self.r.push(coeffs);
        true
    }

    pub fn pop(&mut self) {
        self.q.pop();
        self.r.pop();
    }

    /// Coefficients `z` with `Q R z = Q Q' y`, given `qty = Q' y`.
    pub fn solve(&self, qty: &[f64]) -> Vec<f64> {
        let k = self.q.len();
        let mut z = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for j in i + 1..k {
                s -= self.r[j][i] * z[j];
            }
            z[i] = s / self.r[i][i];
        }
        z
    }
}
