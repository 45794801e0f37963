//! Small dense linear algebra: Householder QR least squares.
//!
//! Design matrices here are tiny (tens of columns at most), so a
//! straightforward column-major QR is plenty and keeps results bit-stable.

use alloc::vec::Vec;

use crate::math;

use super::RegressError;

/// Column-major design matrix with equal-length columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n_rows: usize,
    cols: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self, RegressError> {
        let Some(first) = cols.first() else {
            return Err(RegressError::EmptyDesign);
        };
        let n_rows = first.len();
        if cols.iter().any(|c| c.len() != n_rows) {
            return Err(RegressError::LengthMismatch {
                left: n_rows,
                right: cols.iter().map(|c| c.len()).find(|&l| l != n_rows).unwrap(),
            });
        }
        if cols.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RegressError::NonFinite);
        }
        Ok(DesignMatrix { n_rows, cols })
    }

    /// Prepends an all-ones intercept column.
    pub fn with_intercept(cols: Vec<Vec<f64>>) -> Result<Self, RegressError> {
        let n = cols.first().map(|c| c.len()).unwrap_or(0);
        let mut all = Vec::with_capacity(cols.len() + 1);
        all.push(alloc::vec![1.0; n]);
        all.extend(cols);
        Self::from_columns(all)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    /// Row-subset copy, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DesignMatrix {
        DesignMatrix {
            n_rows: rows.len(),
            cols: self
                .cols
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
        }
    }

    pub fn predict(&self, coeffs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.n_cols());
        let mut out = alloc::vec![0.0; self.n_rows];
        for (c, &b) in self.cols.iter().zip(coeffs.iter()) {
            for (o, &v) in out.iter_mut().zip(c.iter()) {
                *o += b * v;
            }
        }
        out
    }
}

/// Least-squares solution of `X b = y` by Householder QR, plus
/// `(X'X)^{-1} = R^{-1} R^{-T}` for standard errors.
pub(crate) struct QrLeastSquares {
    pub coeffs: Vec<f64>,
    /// Upper triangle of (X'X)^{-1}, full p x p row-major.
    pub xtx_inv: Vec<f64>,
}

pub(crate) fn qr_least_squares(x: &DesignMatrix, y: &[f64]) -> Result<QrLeastSquares, RegressError> {
    let n = x.n_rows();
    let p = x.n_cols();
    if y.len() != n {
        return Err(RegressError::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if n <= p {
        return Err(RegressError::TooFewRows { rows: n, cols: p });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::NonFinite);
    }

    // Working copies, column-major A and the target.
    let mut a: Vec<Vec<f64>> = x.cols.clone();
    let mut b: Vec<f64> = y.to_vec();

    // Householder triangularization.
    let mut r_diag = alloc::vec![0.0; p];
    for k in 0..p {
        let norm = math::sqrt(a[k][k..].iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            return Err(RegressError::RankDeficient { column: k });
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, applied in place; a[k][k] holds v_1.
        a[k][k] -= alpha;
        let vtv = a[k][k..].iter().map(|v| v * v).sum::<f64>();
        if vtv == 0.0 {
            return Err(RegressError::RankDeficient { column: k });
        }
        for j in (k + 1)..p {
            let dot: f64 = a[k][k..]
                .iter()
                .zip(a[j][k..].iter())
                .map(|(u, w)| u * w)
                .sum();
            let scale = 2.0 * dot / vtv;
            let (head, tail) = a.split_at_mut(j);
            for (u, w) in head[k][k..].iter().zip(tail[0][k..].iter_mut()) {
                *w -= scale * u;
            }
        }
        let dot: f64 = a[k][k..].iter().zip(b[k..].iter()).map(|(u, w)| u * w).sum();
        let scale = 2.0 * dot / vtv;
        for (u, w) in a[k][k..].iter().zip(b[k..].iter_mut()) {
            *w -= scale * u;
        }
        r_diag[k] = alpha;
    }

    // Relative rank test on R's diagonal.
    let max_diag = r_diag.iter().map(|v| math::abs(*v)).fold(0.0, f64::max);
    for (k, d) in r_diag.iter().enumerate() {
        if math::abs(*d) <= max_diag * 1e-12 {
            return Err(RegressError::RankDeficient { column: k });
        }
    }

    // Back-substitution: R coeffs = (Q'y)[..p]. R[i][j] lives in a[j][i] for
    // i < j, and r_diag[i] on the diagonal.
    let r = |i: usize, j: usize| -> f64 {
        if i == j {
            r_diag[i]
        } else {
            a[j][i]
        }
    };
    let mut coeffs = alloc::vec![0.0; p];
    for i in (0..p).rev() {
        let mut v = b[i];
        for j in (i + 1)..p {
            v -= r(i, j) * coeffs[j];
        }
        coeffs[i] = v / r_diag[i];
    }

    // R^{-1} by back-substitution on the identity, then (X'X)^{-1} = R^{-1} R^{-T}.
    let mut rinv = alloc::vec![0.0; p * p];
    for col in 0..p {
        for i in (0..=col).rev() {
            let mut v = if i == col { 1.0 } else { 0.0 };
            for j in (i + 1)..=col {
                v -= r(i, j) * rinv[j * p + col];
            }
            rinv[i * p + col] = v / r_diag[i];
        }
    }
    let mut xtx_inv = alloc::vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            let mut s = 0.0;
            for k in i.max(j)..p {
                s += rinv[i * p + k] * rinv[j * p + k];
            }
            xtx_inv[i * p + j] = s;
        }
    }

    Ok(QrLeastSquares { coeffs, xtx_inv })
}

/// Solves a symmetric positive-definite 2x2 system.
pub(crate) fn solve_2x2(m: [[f64; 2]; 2], v: [f64; 2]) -> Result<[f64; 2], RegressError> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if math::abs(det) < 1e-300 || !det.is_finite() {
        return Err(RegressError::SingularSystem);
    }
    Ok([
        (m[1][1] * v[0] - m[0][1] * v[1]) / det,
        (m[0][0] * v[1] - m[1][0] * v[0]) / det,
    ])
}
