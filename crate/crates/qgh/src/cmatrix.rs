//! Dense complex matrices and the Hermitian wrapper used for game-algebra
//! projections. Eigenvalue questions are answered through the standard
//! 2d x 2d real symmetric embedding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError, SymMatrix};

#[derive(Debug, Error)]
pub enum CMatrixError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian: worst asymmetry {0:.3e}")]
    NotHermitian(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim, "matmul shape mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let d1 = self.dim;
        let d2 = other.dim;
        let mut out = CMatrix::zeros(d1 * d2);
        for i1 in 0..d1 {
            for j1 in 0..d1 {
                let a = self.data[i1 * d1 + j1];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for i2 in 0..d2 {
                    for j2 in 0..d2 {
                        out.set(i1 * d2 + i2, j1 * d2 + j2, a * other.get(i2, j2));
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// Worst deviation from `self == self.adjoint()`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Real symmetric embedding `[[Re, -Im], [Im, Re]]`; its spectrum is the
    /// spectrum of the Hermitian matrix with every eigenvalue doubled in
    /// multiplicity.
    pub fn real_embedding(&self) -> SymMatrix {
        let n = self.dim;
        let mut out = SymMatrix::zeros(2 * n);
        // The assignments below are globally consistent for a (symmetrized)
        // Hermitian input, so the mirrored writes of `set` agree.
        for i in 0..n {
            for j in 0..n {
                let z = 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj());
                out.set(i, j, z.re);
                out.set(n + i, n + j, z.re);
                out.set(n + i, j, z.im);
            }
        }
        out
    }
}

/// Hermitian complex matrix; conjugate symmetry is checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix {
    inner: CMatrix,
}

impl HermMatrix {
    pub fn new(m: CMatrix, tol: f64) -> Result<Self, CMatrixError> {
        let defect = m.hermitian_defect();
        if defect > tol {
            return Err(CMatrixError::NotHermitian(defect));
        }
        Ok(HermMatrix { inner: m })
    }

    pub fn zeros(dim: usize) -> Self {
        HermMatrix {
            inner: CMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermMatrix {
            inner: CMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner.get(i, j)
    }

    /// Sets `(i, j)` and mirrors the conjugate into `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.inner.set(i, j, value);
        if i != j {
            self.inner.set(j, i, value.conj());
        } else {
            self.inner.set(i, i, Complex64::new(value.re, 0.0));
        }
    }

    pub fn as_cmatrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_cmatrix(self) -> CMatrix {
        self.inner
    }
}

/// Smallest eigenvalue of a Hermitian matrix via the real embedding.
pub fn min_eigenvalue_herm(m: &CMatrix) -> Result<f64, LinalgError> {
    linalg::min_eigenvalue(&m.real_embedding())
}

/// Operator norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn operator_norm_herm(m: &CMatrix) -> Result<f64, LinalgError> {
    let (vals, _) = linalg::eig_sym(&m.real_embedding())?;
    let lo = vals.first().copied().unwrap_or(0.0);
    let hi = vals.last().copied().unwrap_or(0.0);
    Ok(lo.abs().max(hi.abs()))
}

/// JSON form of a complex matrix: separate row-major real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CMatrixJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CMatrixJson {
    pub fn from_cmatrix(m: &CMatrix) -> Self {
        CMatrixJson {
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_cmatrix(&self, dim: usize) -> Result<CMatrix, CMatrixError> {
        if self.re.len() != dim * dim || self.im.len() != dim * dim {
            return Err(CMatrixError::DimensionMismatch(format!(
                "expected {} entries, got re={} im={}",
                dim * dim,
                self.re.len(),
                self.im.len()
            )));
        }
        let data = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        Ok(CMatrix { dim, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_spectrum_matches_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let mut m = CMatrix::zeros(2);
        m.set(0, 0, Complex64::new(1.0, 0.0));
        m.set(1, 1, Complex64::new(1.0, 0.0));
        m.set(0, 1, Complex64::new(0.0, 1.0));
        m.set(1, 0, Complex64::new(0.0, -1.0));
        assert!(min_eigenvalue_herm(&m).unwrap().abs() < 1e-12);
        assert!((operator_norm_herm(&m).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_rejects_asymmetric() {
        let mut m = CMatrix::zeros(2);
        m.set(0, 1, Complex64::new(1.0, 0.0));
        assert!(HermMatrix::new(m, 1e-10).is_err());
    }

    #[test]
    fn kron_identity() {
        let a = CMatrix::identity(2);
        let b = CMatrix::identity(3);
        let k = a.kron(&b);
        assert_eq!(k.dim(), 6);
        assert!((k.sub(&CMatrix::identity(6))).frobenius_norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let mut m = CMatrix::zeros(2);
        m.set(0, 1, Complex64::new(0.25, -0.5));
        m.set(1, 0, Complex64::new(0.25, 0.5));
        let json = CMatrixJson::from_cmatrix(&m);
        let back = json.to_cmatrix(2).unwrap();
        assert!(m.sub(&back).frobenius_norm() < 1e-15);
    }
}
