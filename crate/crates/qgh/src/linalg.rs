//! Dense real linear algebra: symmetric matrices, a cyclic-Jacobi
//! eigendecomposition, and projection onto the positive-semidefinite cone.
//!
//! Sizes here stay small (a few hundred at most), so a dependency-free Jacobi
//! sweep is accurate and fast enough for everything downstream.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * out.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Dense real symmetric matrix. Symmetry is enforced on construction and the
/// storage keeps `entry(i, j) == entry(j, i)` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn ones(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![1.0; dim * dim],
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from row-major data, symmetrizing as `(A + A^T) / 2`.
    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self, LinalgError> {
        if data.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = 0.5 * (data[i * dim + j] + data[j * dim + i]);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Raw mutable access; callers must keep the storage symmetric.
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Frobenius inner product `sum_ij A_ij B_ij`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted ascending and the matching orthonormal
/// eigenvectors as columns of the returned matrix.
pub fn eig_sym(m: &SymMatrix) -> Result<(Vec<f64>, Matrix), LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    jacobi_inplace(n, &mut a, &mut v);

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new_col, v[row * n + old_col]);
        }
    }
    Ok((eigenvalues, vectors))
}

// Cyclic-by-rows Jacobi with a relative off-diagonal threshold of 1e-13 and at
// most 100 sweeps; quadratic convergence makes the cap generous.
fn jacobi_inplace(n: usize, a: &mut [f64], v: &mut [f64]) {
    if n <= 1 {
        return;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = 1e-13 * (1.0 + norm);
    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= threshold {
            return;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= threshold / (n as f64 * n as f64) {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for j in 0..n {
                    if j != p && j != q {
                        let ajp = a[j * n + p];
                        let ajq = a[j * n + q];
                        let new_jp = ajp - s * (ajq + tau * ajp);
                        let new_jq = ajq + s * (ajp - tau * ajq);
                        a[j * n + p] = new_jp;
                        a[p * n + j] = new_jp;
                        a[j * n + q] = new_jq;
                        a[q * n + j] = new_jq;
                    }
                }
                for j in 0..n {
                    let vjp = v[j * n + p];
                    let vjq = v[j * n + q];
                    v[j * n + p] = vjp - s * (vjq + tau * vjp);
                    v[j * n + q] = vjq + s * (vjp - tau * vjq);
                }
            }
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64, LinalgError> {
    let (eigenvalues, _) = eig_sym(m)?;
    Ok(eigenvalues.first().copied().unwrap_or(0.0))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(m: &SymMatrix) -> Result<f64, LinalgError> {
    let (eigenvalues, _) = eig_sym(m)?;
    Ok(eigenvalues.last().copied().unwrap_or(0.0))
}

/// Nearest positive-semidefinite matrix in Frobenius norm: negative
/// eigenvalues are truncated at zero.
pub fn psd_project(m: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    let n = m.dim;
    let (eigenvalues, vectors) = eig_sym(m)?;
    if eigenvalues.first().map_or(true, |&l| l >= 0.0) {
        return Ok(m.clone());
    }
    let mut out = SymMatrix::zeros(n);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        for i in 0..n {
            let vi = vectors.get(i, k) * lambda;
            if vi == 0.0 {
                continue;
            }
            for j in i..n {
                let add = vi * vectors.get(j, k);
                out.data[i * n + j] += add;
                if i != j {
                    out.data[j * n + i] += add;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reconstruct(eigenvalues: &[f64], vectors: &Matrix) -> SymMatrix {
        let n = eigenvalues.len();
        let mut out = SymMatrix::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let add = eigenvalues[k] * vectors.get(i, k) * vectors.get(j, k);
                    out.data[i * n + j] += add;
                }
            }
        }
        out
    }

    #[test]
    fn eig_identity() {
        let m = SymMatrix::identity(3);
        let (vals, _) = eig_sym(&m).unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_pauli_x() {
        let mut m = SymMatrix::zeros(2);
        m.set(0, 1, 1.0);
        let (vals, _) = eig_sym(&m).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_sorts_ascending() {
        let m = SymMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let (vals, _) = eig_sym(&m).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_finite() {
        let mut m = SymMatrix::zeros(2);
        m.set(0, 0, f64::NAN);
        assert!(eig_sym(&m).is_err());
    }

    #[test]
    fn eig_reconstruction_small_random() {
        // Deterministic pseudo-random fill; checks the reconstruction bound.
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for n in [2usize, 5, 9, 16] {
            let mut m = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    m.set(i, j, next());
                }
            }
            let (vals, vecs) = eig_sym(&m).unwrap();
            let err = reconstruct(&vals, &vecs).sub(&m).frobenius_norm();
            assert!(
                err <= 1e-10 * (1.0 + m.frobenius_norm()),
                "reconstruction error {err} at n={n}"
            );
        }
    }

    #[test]
    fn psd_project_truncates_negative_part() {
        let m = SymMatrix::diagonal(&[1.0, -1.0]);
        let p = psd_project(&m).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(p.get(1, 1).abs() < 1e-12);
        assert!(p.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn psd_project_pauli_x_rank_one() {
        // Eigenpairs of [[0,1],[1,0]] are (-1, (1,-1)/sqrt2) and (1, (1,1)/sqrt2);
        // keeping the positive part gives the all-half matrix.
        let mut m = SymMatrix::zeros(2);
        m.set(0, 1, 1.0);
        let p = psd_project(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p.get(i, j) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn psd_project_fixes_psd_input() {
        let m = SymMatrix::diagonal(&[0.5, 2.0, 0.0]);
        let p = psd_project(&m).unwrap();
        assert!(p.sub(&m).frobenius_norm() < 1e-12);
    }

    #[test]
    fn min_eigenvalue_trivials() {
        assert!((min_eigenvalue(&SymMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(&SymMatrix::zeros(3)).unwrap().abs() < 1e-12);
        let mut m = SymMatrix::zeros(2);
        m.set(0, 1, 1.0);
        assert!((min_eigenvalue(&m).unwrap() + 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn psd_project_is_idempotent(seed in 0u64..500) {
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            let n = 4 + (seed % 4) as usize;
            let mut m = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    m.set(i, j, next());
                }
            }
            let p1 = psd_project(&m).unwrap();
            let p2 = psd_project(&p1).unwrap();
            prop_assert!(p2.sub(&p1).frobenius_norm() <= 1e-10 * (1.0 + p1.frobenius_norm()));
            prop_assert!(min_eigenvalue(&p1).unwrap() >= -1e-10 * (1.0 + p1.frobenius_norm()));
        }
    }
}
