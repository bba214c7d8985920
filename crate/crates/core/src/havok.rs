//! Hankel alternative view of Koopman (HAVOK) analysis of a sampled current.
//!
//! The trace is delay-embedded into a Hankel matrix, factored with the SVD,
//! and the leading `r - 1` eigen-time-delay coordinates are regressed on
//! their own derivatives with the `r`-th coordinate `v_r` as an input. Bursts
//! in `v_r` mark intermittent, strongly nonlinear events.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{svd_of_transpose, Matrix, Qr};

pub const DEFAULT_EMBEDDING: usize = 40;

/// Regressors with a larger condition estimate are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Samples dropped at each end by the derivative stencil.
pub const DERIVATIVE_TRIM: usize = 2;

/// q×p delay embedding with `entry(i, j) = x[i + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    q: usize,
    p: usize,
    data: Vec<f64>,
}

impl HankelMatrix {
    pub fn rows(&self) -> usize {
        self.q
    }

    pub fn cols(&self) -> usize {
        self.p
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.q && j < self.p, "Hankel index out of range");
        self.data[i + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i..i + self.p]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.q, self.p, |i, j| self.data[i + j])
    }

    /// The p×q transpose, whose columns are the rows of the embedding.
    pub fn transposed(&self) -> Matrix {
        Matrix::from_fn(self.p, self.q, |j, i| self.data[i + j])
    }
}

pub fn build_hankel(samples: &[f64], q: usize) -> Result<HankelMatrix> {
    let n = samples.len();
    if q == 0 || n < 2 * q {
        return Err(Error::TraceTooShort {
            len: n,
            required: 2 * q.max(1),
        });
    }
    Ok(HankelMatrix {
        q,
        p: n - q + 1,
        data: samples.to_vec(),
    })
}

/// `H = U diag(S) Vᵀ` in economy form.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    /// q×q.
    pub u: Matrix,
    pub s: Vec<f64>,
    /// p×min(q, p).
    pub v: Matrix,
}

impl SvdFactors {
    /// `U_k diag(S_k) V_kᵀ` using the leading `k` triplets.
    pub fn reconstruct(&self, k: usize) -> Matrix {
        let k = k.min(self.s.len());
        let (q, p) = (self.u.rows(), self.v.rows());
        Matrix::from_fn(q, p, |i, j| {
            (0..k).map(|l| self.u[(i, l)] * self.s[l] * self.v[(j, l)]).sum()
        })
    }
}

pub fn decompose(h: &HankelMatrix) -> Result<SvdFactors> {
    if h.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite Hankel entry"));
    }
    let svd = svd_of_transpose(h.transposed())?;
    if svd.s.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite singular value"));
    }
    Ok(SvdFactors {
        u: svd.u,
        s: svd.s,
        v: svd.v,
    })
}

/// `ω(β) = 0.56β³ − 0.95β² + 1.82β + 1.43` for aspect ratio `β ≤ 1`.
pub fn threshold_coefficient(beta: f64) -> f64 {
    ((0.56 * beta - 0.95) * beta + 1.82) * beta + 1.43
}

/// Number of singular values above `ω(q/p) · median(s)`, clamped to
/// `[2, s.len()]`.
///
/// Values below `len · ε · max(s)` are numerically zero and count as 0 in both
/// the median and the comparison.
pub fn select_rank(s: &[f64], q: usize, p: usize) -> usize {
    if s.is_empty() {
        return 0;
    }
    let n = s.len();
    let largest = s.iter().copied().fold(0.0, f64::max);
    let floor = n as f64 * f64::EPSILON * largest;
    let cleaned: Vec<f64> = s.iter().map(|&x| if x <= floor { 0.0 } else { x }).collect();
    let mut sorted = cleaned.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let tau = threshold_coefficient(q as f64 / p as f64) * median;
    let count = cleaned.iter().filter(|&&x| x > tau).count();
    count.clamp(2.min(n), n)
}

/// Time derivatives of each column, valid on rows `trim..len - trim` of the
/// input.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub values: Matrix,
    pub trim: usize,
}

/// Fourth-order central difference down every column of `series`.
pub fn differentiate(series: &Matrix, dt: f64) -> Result<Derivatives> {
    let n = series.rows();
    if n < 5 {
        return Err(Error::SeriesTooShort { len: n, required: 5 });
    }
    let m = n - 2 * DERIVATIVE_TRIM;
    let mut values = Matrix::zeros(m, series.cols());
    let scale = 1.0 / (12.0 * dt);
    for c in 0..series.cols() {
        let f = series.col(c);
        let out = values.col_mut(c);
        for (k, d) in out.iter_mut().enumerate() {
            let t = k + DERIVATIVE_TRIM;
            *d = (-f[t + 2] + 8.0 * f[t + 1] - 8.0 * f[t - 1] + f[t - 2]) * scale;
        }
    }
    Ok(Derivatives {
        values,
        trim: DERIVATIVE_TRIM,
    })
}

/// Forced linear model `dv/dt = A v + B v_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct HavokModel {
    pub rank: usize,
    /// (r−1)×(r−1), 1/s.
    pub a: Matrix,
    /// Length r−1, 1/s.
    pub b: Vec<f64>,
    /// p×(r−1) leading eigen-time-delay coordinates.
    pub v: Matrix,
    /// Unit-norm forcing coordinate, length p.
    pub v_r: Vec<f64>,
    /// Frobenius norm of the regression residual.
    pub residual: f64,
    pub singular_values: Vec<f64>,
    pub dt: f64,
    /// Timestamp given to column 0 of V, s.
    pub time_origin: f64,
}

/// Least-squares fit of `dv = A v + B v_r` over the trimmed window.
///
/// Identically zero regressors get zero coefficients; the remaining ones must
/// be well conditioned.
pub fn identify(v: &Matrix, dv: &Derivatives, v_r: &[f64], dt: f64) -> Result<HavokModel> {
    let (n, k) = (v.rows(), v.cols());
    if k == 0 {
        return Err(crate::error::invalid("at least one leading coordinate is required"));
    }
    if v_r.len() != n {
        return Err(crate::error::invalid("v_r length must match v"));
    }
    if dv.values.cols() != k || dv.values.rows() + 2 * dv.trim != n {
        return Err(crate::error::invalid("derivatives are not aligned with v"));
    }
    let m = dv.values.rows();
    let window = dv.trim..dv.trim + m;
    let mut columns: Vec<Vec<f64>> = (0..k).map(|c| v.col(c)[window.clone()].to_vec()).collect();
    columns.push(v_r[window].to_vec());
    // an identically zero regressor has a zero minimum-norm coefficient
    let active: Vec<usize> = (0..=k).filter(|&c| columns[c].iter().any(|x| *x != 0.0)).collect();

    let mut a = Matrix::zeros(k, k);
    let mut b = vec![0.0; k];
    let residual;
    if active.is_empty() {
        residual = dv.values.frobenius_norm();
    } else {
        let x = Matrix::from_columns(
            &active.iter().map(|&c| columns[c].clone()).collect::<Vec<_>>(),
        );
        let qr = Qr::new(x)?;
        let condition = qr.condition_estimate();
        if !(condition <= MAX_CONDITION) {
            return Err(Error::RankDeficient { condition });
        }
        let mut sq = 0.0;
        for row in 0..k {
            let (theta, res) = qr.solve_least_squares(dv.values.col(row));
            for (&col, value) in active.iter().zip(theta) {
                if col < k {
                    a[(row, col)] = value;
                } else {
                    b[row] = value;
                }
            }
            sq += res * res;
        }
        residual = libm::sqrt(sq);
    }
    if !residual.is_finite() || !a.is_finite() || b.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite regression result"));
    }
    Ok(HavokModel {
        rank: k + 1,
        a,
        b,
        v: v.clone(),
        v_r: v_r.to_vec(),
        residual,
        singular_values: Vec::new(),
        dt,
        time_origin: 0.0,
    })
}

/// Forcing samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSignal {
    pub start: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl ForcingSignal {
    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|k| self.time(k))
    }
}

/// `v_r` stamped on the trace clock.
///
/// Column j of V covers samples `j..j + q`; it is stamped at the window's
/// last sample so that no forcing value precedes the data it depends on.
pub fn forcing_signal(model: &HavokModel) -> ForcingSignal {
    ForcingSignal {
        start: model.time_origin,
        dt: model.dt,
        values: model.v_r.clone(),
    }
}

/// Full decomposition of a uniformly sampled trace with embedding depth `q`.
pub fn analyze(samples: &[f64], dt: f64, q: usize) -> Result<HavokModel> {
    if !(dt > 0.0) {
        return Err(crate::error::invalid("dt must be positive"));
    }
    if q < 2 {
        return Err(crate::error::invalid("embedding depth q must be at least 2"));
    }
    let h = build_hankel(samples, q)?;
    let svd = decompose(&h)?;
    let r = select_rank(&svd.s, h.rows(), h.cols());
    let leading: Vec<Vec<f64>> = (0..r - 1).map(|c| svd.v.col(c).to_vec()).collect();
    let v = Matrix::from_columns(&leading);
    let v_r = svd.v.col(r - 1).to_vec();
    let dv = differentiate(&v, dt)?;
    let mut model = identify(&v, &dv, &v_r, dt)?;
    model.singular_values = svd.s;
    model.time_origin = (q - 1) as f64 * dt;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hankel_of_short_sequence() {
        let h = build_hankel(&[1.0, 2.0, 3.0, 4.0, 5.0], 2).unwrap();
        assert_eq!(h.row(0), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(h.row(1), &[2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn hankel_needs_two_q_samples() {
        assert!(matches!(
            build_hankel(&[0.0; 79], 40),
            Err(Error::TraceTooShort { len: 79, required: 80 })
        ));
    }

    #[test]
    fn clamp_floor_is_two() {
        let mut s = vec![1e-14; 40];
        s[0] = 10.0;
        assert_eq!(select_rank(&s, 40, 9961), 2);
    }

    #[test]
    fn flat_spectrum_clamps_to_two() {
        // ω(β) ≥ 1.43 for β ≥ 0, so the threshold exceeds a flat spectrum
        assert_eq!(select_rank(&[3.0; 40], 40, 9961), 2);
    }

    #[test]
    fn zero_regressor_gives_zero_model() {
        let v = Matrix::zeros(20, 2);
        let dv = differentiate(&v, 1e-3).unwrap();
        let m = identify(&v, &dv, &[0.0; 20], 1e-3).unwrap();
        assert_eq!(m.a, Matrix::zeros(2, 2));
        assert_eq!(m.b, vec![0.0, 0.0]);
        assert_eq!(m.residual, 0.0);
    }

    #[test]
    fn derivative_of_a_line_is_exact() {
        let f = Matrix::from_fn(50, 1, |i, _| 0.3 + 2.0 * i as f64 * 0.01);
        let d = differentiate(&f, 0.01).unwrap();
        assert_eq!(d.values.rows(), 46);
        assert!(d.values.col(0).iter().all(|x| (x - 2.0).abs() < 1e-12));
    }

    #[test]
    fn four_samples_is_too_short() {
        assert!(differentiate(&Matrix::zeros(4, 1), 0.1).is_err());
    }
}
