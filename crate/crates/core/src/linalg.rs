//! Dense column-major linear algebra used by the HAVOK pipeline.
//!
//! Only what the pipeline needs: Householder QR, a QR-preconditioned
//! one-sided Jacobi SVD for tall/wide matrices with a small dimension,
//! and least squares through QR.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "ragged columns");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let w = rhs[(k, j)];
                if w == 0.0 {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.col(k)) {
                    *d += w * a;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Householder QR of an m×n matrix with m ≥ n.
///
/// Reflector vectors are kept below the diagonal with an implicit unit
/// leading entry; R occupies the upper triangle.
#[derive(Debug, Clone)]
pub struct Qr {
    factors: Matrix,
    tau: Vec<f64>,
}

impl Qr {
    pub fn new(mut a: Matrix) -> Result<Self> {
        let (m, n) = (a.rows, a.cols);
        if m < n {
            return Err(Error::NumericalFailure("QR requires rows >= cols"));
        }
        if !a.is_finite() {
            return Err(Error::NumericalFailure("non-finite entry in QR input"));
        }
        let mut tau = vec![0.0; n];
        for k in 0..n {
            let (head, tail) = a.data.split_at_mut((k + 1) * m);
            let col = &mut head[k * m + k..];
            let alpha = col[0];
            let tail_norm = norm2(&col[1..]);
            if tail_norm == 0.0 {
                // already upper-triangular in this column
                continue;
            }
            let norm = libm::hypot(alpha, tail_norm);
            let beta = if alpha >= 0.0 { -norm } else { norm };
            let scale = 1.0 / (alpha - beta);
            for x in &mut col[1..] {
                *x *= scale;
            }
            col[0] = beta;
            tau[k] = (beta - alpha) / beta;
            let v = &col[1..];
            for j in 0..(n - k - 1) {
                let target = &mut tail[j * m + k..(j + 1) * m];
                let s = tau[k] * (target[0] + dot(v, &target[1..]));
                target[0] -= s;
                for (t, vi) in target[1..].iter_mut().zip(v) {
                    *t -= s * vi;
                }
            }
        }
        Ok(Self { factors: a, tau })
    }

    pub fn rows(&self) -> usize {
        self.factors.rows
    }

    pub fn cols(&self) -> usize {
        self.factors.cols
    }

    /// The n×n upper-triangular factor.
    pub fn r(&self) -> Matrix {
        let n = self.cols();
        Matrix::from_fn(n, n, |i, j| if i <= j { self.factors[(i, j)] } else { 0.0 })
    }

    fn reflect(&self, k: usize, x: &mut [f64]) {
        let m = self.rows();
        let v = &self.factors.col(k)[k + 1..m];
        let s = self.tau[k] * (x[k] + dot(v, &x[k + 1..]));
        if s == 0.0 {
            return;
        }
        x[k] -= s;
        for (xi, vi) in x[k + 1..].iter_mut().zip(v) {
            *xi -= s * vi;
        }
    }

    /// Overwrites `x` (length m) with Qᵀx.
    pub fn apply_qt(&self, x: &mut [f64]) {
        for k in 0..self.cols() {
            self.reflect(k, x);
        }
    }

    /// Overwrites `x` (length m) with Qx.
    pub fn apply_q(&self, x: &mut [f64]) {
        for k in (0..self.cols()).rev() {
            self.reflect(k, x);
        }
    }

    /// Ratio of the largest to the smallest |R_ii|; infinite when a pivot vanishes.
    pub fn condition_estimate(&self) -> f64 {
        let diag = (0..self.cols()).map(|i| libm::fabs(self.factors[(i, i)]));
        let (lo, hi) = diag.fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Solves R x = (Qᵀ b)[..n]; returns the solution and the residual norm.
    pub fn solve_least_squares(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let n = self.cols();
        let mut y = b.to_vec();
        self.apply_qt(&mut y);
        let residual = norm2(&y[n..]);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = y[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                acc -= self.factors[(i, j)] * xj;
            }
            x[i] = acc / self.factors[(i, i)];
        }
        (x, residual)
    }
}

/// Thin SVD of an m×n matrix (m ≤ n): `a = u · diag(s) · vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// m×m, orthonormal columns.
    pub u: Matrix,
    /// Nonincreasing, nonnegative.
    pub s: Vec<f64>,
    /// n×m, orthonormal columns.
    pub v: Matrix,
}

const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 80;

/// SVD of a wide matrix given through its transpose `at` (n×m, n ≥ m).
///
/// `at = Q R` first, then one-sided Jacobi on the small R. Singular vector
/// signs are fixed so the largest-magnitude entry of every `u` column is
/// positive.
pub fn svd_of_transpose(at: Matrix) -> Result<Svd> {
    let (n, m) = (at.rows, at.cols);
    let qr = Qr::new(at)?;
    // R = W Σ Jᵀ  =>  A = Aᵀᵀ = J Σ (Q W)ᵀ
    let mut b = qr.r();
    let mut j = Matrix::identity(m);
    // columns below this norm are roundoff and are left unrotated
    let negligible = m as f64 * f64::EPSILON * b.frobenius_norm();
    let floor = negligible * negligible;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let alpha = dot(b.col(p), b.col(p));
                let beta = dot(b.col(q), b.col(q));
                let gamma = dot(b.col(p), b.col(q));
                if gamma == 0.0
                    || alpha <= floor
                    || beta <= floor
                    || libm::fabs(gamma) <= JACOBI_TOL * libm::sqrt(alpha * beta)
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::hypot(1.0, zeta));
                let c = 1.0 / libm::hypot(1.0, t);
                let s = c * t;
                rotate_columns(&mut b, p, q, c, s);
                rotate_columns(&mut j, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure("Jacobi SVD did not converge"));
    }

    let mut sigma: Vec<f64> = (0..m).map(|k| norm2(b.col(k))).collect();
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::NumericalFailure("non-finite singular value"));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));

    let mut u = Matrix::zeros(m, m);
    let mut w = Matrix::zeros(m, m);
    let mut filled = vec![false; m];
    for (dst, &src) in order.iter().enumerate() {
        u.col_mut(dst).copy_from_slice(j.col(src));
        let sv = sigma[src];
        if sv > f64::MIN_POSITIVE {
            for (wi, bi) in w.col_mut(dst).iter_mut().zip(b.col(src)) {
                *wi = bi / sv;
            }
            // roundoff-level directions are kept only as a seed
            filled[dst] = sv > negligible;
        }
    }
    sigma = order.iter().map(|&k| sigma[k]).collect();
    complete_orthonormal(&mut w, &filled);

    for k in 0..m {
        let col = u.col(k);
        let mut idx = 0;
        for (i, x) in col.iter().enumerate() {
            if libm::fabs(*x) > libm::fabs(col[idx]) {
                idx = i;
            }
        }
        if col[idx] < 0.0 {
            u.col_mut(k).iter_mut().for_each(|x| *x = -*x);
            w.col_mut(k).iter_mut().for_each(|x| *x = -*x);
        }
    }

    let mut v = Matrix::zeros(n, m);
    for k in 0..m {
        let col = v.col_mut(k);
        col[..m].copy_from_slice(w.col(k));
        qr.apply_q(col);
    }
    Ok(Svd { u, s: sigma, v })
}

fn rotate_columns(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = a.rows;
    let (lo, hi) = a.data.split_at_mut(q * rows);
    let cp = &mut lo[p * rows..(p + 1) * rows];
    let cq = &mut hi[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fills the columns not marked in `filled` with unit vectors orthogonal to
/// every other column. The column's current content is tried first, then the
/// standard basis; Gram–Schmidt is applied twice.
fn complete_orthonormal(w: &mut Matrix, filled: &[bool]) {
    let m = w.rows;
    let mut candidate = 0;
    for k in 0..w.cols {
        if filled[k] {
            continue;
        }
        let mut seed = Some(w.col(k).to_vec()).filter(|c| norm2(c) > 0.0);
        loop {
            let mut e = match seed.take() {
                Some(c) => c,
                None => {
                    assert!(candidate < m, "cannot complete orthonormal basis");
                    let mut e = vec![0.0; m];
                    e[candidate] = 1.0;
                    candidate += 1;
                    e
                }
            };
            for _ in 0..2 {
                for (other, &done) in filled.iter().enumerate() {
                    if other == k || !(done || other < k) {
                        continue;
                    }
                    let proj = dot(&e, w.col(other));
                    for (ei, oi) in e.iter_mut().zip(w.col(other)) {
                        *ei -= proj * oi;
                    }
                }
            }
            let nrm = norm2(&e);
            if nrm > 0.5 {
                for (dst, x) in w.col_mut(k).iter_mut().zip(&e) {
                    *dst = x / nrm;
                }
                break;
            }
        }
    }
}
