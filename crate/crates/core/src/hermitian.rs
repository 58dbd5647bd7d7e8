//! Hermitian positive-definite matrices and the small dense kernels the rest
//! of the crate is built on.
//!
//! PolSAR covariance matrices are tiny (`p` is 1..4 in practice) but must be
//! complex Hermitian positive definite, and every determinant downstream is
//! needed in the log domain. The kernels here are deliberately direct
//! `O(p^3)` loops over row-major storage.

use num_complex::Complex64;

use crate::{Error, Result};

/// Relative tolerance for the conjugate-symmetry check in [`HermitianPD::validate`].
///
/// Covers f64 accumulation when covariances are formed by averaging hundreds
/// of looks; asymmetry beyond this is treated as data corruption, not noise.
pub const HERMITIAN_REL_TOL: f64 = 1e-9;

/// A `p x p` complex Hermitian positive-definite matrix in row-major storage.
///
/// Construction goes through [`HermitianPD::validate`], which enforces:
/// finite entries, conjugate symmetry within [`HERMITIAN_REL_TOL`] (relative
/// to the larger magnitude of the mirrored pair), strictly positive real
/// diagonal, and a successful Cholesky factorization. After validation the
/// stored lower triangle is exactly the conjugate of the upper triangle and
/// the diagonal is exactly real.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianPD {
    p: usize,
    data: Vec<Complex64>,
}

impl HermitianPD {
    /// Validates a raw square complex array as Hermitian positive definite.
    ///
    /// The upper triangle (including the diagonal's real part) is taken as
    /// authoritative; the lower triangle is rewritten as its conjugate.
    pub fn validate(raw: &[Vec<Complex64>]) -> Result<Self> {
        let p = raw.len();
        if p == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for (i, row) in raw.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: row.len(),
                });
            }
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        // Conjugate symmetry, relative to the larger magnitude of the pair.
        for i in 0..p {
            let d = raw[i][i];
            if d.im.abs() > HERMITIAN_REL_TOL * d.re.abs().max(1.0) {
                return Err(Error::NotHermitian { row: i, col: i });
            }
            if !(d.re > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: i + 1 });
            }
            for j in (i + 1)..p {
                let a = raw[i][j];
                let b = raw[j][i].conj();
                let scale = a.norm().max(b.norm());
                if (a - b).norm() > HERMITIAN_REL_TOL * scale.max(1e-300) && scale > 0.0 {
                    return Err(Error::NotHermitian { row: j, col: i });
                }
            }
        }
        let mut data = vec![Complex64::ZERO; p * p];
        for i in 0..p {
            data[i * p + i] = Complex64::new(raw[i][i].re, 0.0);
            for j in (i + 1)..p {
                data[i * p + j] = raw[i][j];
                data[j * p + i] = raw[i][j].conj();
            }
        }
        let m = HermitianPD { p, data };
        m.cholesky()?; // positive definiteness gate
        Ok(m)
    }

    /// Builds from entries already known to be exactly Hermitian (sums and
    /// positive combinations of validated matrices). Still checks positive
    /// definiteness via Cholesky.
    pub(crate) fn from_hermitian_parts(p: usize, data: Vec<Complex64>) -> Result<Self> {
        debug_assert_eq!(data.len(), p * p);
        let m = HermitianPD { p, data };
        m.cholesky()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.p + j]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.p)
            .map(|i| self.data[i * self.p..(i + 1) * self.p].to_vec())
            .collect()
    }

    /// The p x p identity.
    pub fn identity(p: usize) -> Self {
        let mut data = vec![Complex64::ZERO; p * p];
        for i in 0..p {
            data[i * p + i] = Complex64::ONE;
        }
        HermitianPD { p, data }
    }

    /// Lower-triangular Cholesky factor `T` with `T T* = A` and a real
    /// positive diagonal.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        let p = self.p;
        let mut t = vec![Complex64::ZERO; p * p];
        for j in 0..p {
            let mut d = self.get(j, j).re;
            for k in 0..j {
                d -= t[j * p + k].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j + 1 });
            }
            let tjj = d.sqrt();
            t[j * p + j] = Complex64::new(tjj, 0.0);
            for i in (j + 1)..p {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= t[i * p + k] * t[j * p + k].conj();
                }
                t[i * p + j] = s / tjj;
            }
        }
        Ok(CholeskyFactor { p, data: t })
    }

    /// `log |A|`, computed as twice the log-sum of the Cholesky diagonal.
    pub fn logdet(&self) -> Result<f64> {
        Ok(self.cholesky()?.logdet())
    }

    /// The inverse, still Hermitian positive definite.
    ///
    /// Computed as `W* W` with `W = T^{-1}` from the Cholesky factor, so the
    /// result is exactly Hermitian by construction.
    pub fn inverse(&self) -> Result<HermitianPD> {
        let chol = self.cholesky()?;
        let w = chol.invert_lower();
        let p = self.p;
        // A^{-1}[i][j] = sum_k conj(W[k][i]) W[k][j], k >= max(i, j)
        let mut data = vec![Complex64::ZERO; p * p];
        for i in 0..p {
            for j in i..p {
                let mut s = Complex64::ZERO;
                for k in j..p {
                    s += w[k * p + i].conj() * w[k * p + j];
                }
                if i == j {
                    data[i * p + i] = Complex64::new(s.re, 0.0);
                } else {
                    data[i * p + j] = s;
                    data[j * p + i] = s.conj();
                }
            }
        }
        Ok(HermitianPD { p, data })
    }

    /// `a*A + b*B` for positive coefficients; positive definiteness is
    /// re-checked by Cholesky.
    pub fn linear_combination(a: f64, ma: &HermitianPD, b: f64, mb: &HermitianPD) -> Result<Self> {
        if ma.p != mb.p {
            return Err(Error::DimensionMismatch {
                expected: ma.p,
                found: mb.p,
            });
        }
        let data = ma
            .data
            .iter()
            .zip(&mb.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_hermitian_parts(ma.p, data)
    }

    /// `a*A` for `a > 0`.
    pub fn scale(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("scale factor must be positive, got {a}")));
        }
        Ok(HermitianPD {
            p: self.p,
            data: self.data.iter().map(|z| a * z).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||A - B||_F`; errors on dimension mismatch.
    pub fn frobenius_distance(&self, other: &HermitianPD) -> Result<f64> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: other.p,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Conjugation `U A U*` by a square complex matrix `U` (row-major),
    /// re-validated as Hermitian positive definite. Used by the invariance
    /// tests with unitary `U`.
    pub fn conjugate_by(&self, u: &[Complex64]) -> Result<HermitianPD> {
        let p = self.p;
        if u.len() != p * p {
            return Err(Error::DimensionMismatch {
                expected: p * p,
                found: u.len(),
            });
        }
        // B = U A, then C = B U*
        let mut b = vec![Complex64::ZERO; p * p];
        for i in 0..p {
            for j in 0..p {
                let mut s = Complex64::ZERO;
                for k in 0..p {
                    s += u[i * p + k] * self.get(k, j);
                }
                b[i * p + j] = s;
            }
        }
        let mut rows = vec![vec![Complex64::ZERO; p]; p];
        for i in 0..p {
            for j in 0..p {
                let mut s = Complex64::ZERO;
                for k in 0..p {
                    s += b[i * p + k] * u[j * p + k].conj();
                }
                rows[i][j] = s;
            }
        }
        HermitianPD::validate(&rows)
    }
}

/// Lower-triangular Cholesky factor of a [`HermitianPD`] matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    p: usize,
    data: Vec<Complex64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.p + j]
    }

    /// `log |A| = 2 sum_j log T[j][j]`.
    pub fn logdet(&self) -> f64 {
        (0..self.p).map(|j| self.get(j, j).re.ln()).sum::<f64>() * 2.0
    }

    /// Reconstructs `T T*`; test and diagnostics helper.
    pub fn reconstruct(&self) -> Vec<Vec<Complex64>> {
        let p = self.p;
        let mut out = vec![vec![Complex64::ZERO; p]; p];
        for i in 0..p {
            for j in 0..p {
                let mut s = Complex64::ZERO;
                for k in 0..=i.min(j) {
                    s += self.get(i, k) * self.get(j, k).conj();
                }
                out[i][j] = s;
            }
        }
        out
    }

    /// `T v` for a length-p vector; the sampler's coloring step.
    pub fn mul_vector(&self, v: &[Complex64]) -> Vec<Complex64> {
        let p = self.p;
        debug_assert_eq!(v.len(), p);
        (0..p)
            .map(|i| (0..=i).map(|k| self.get(i, k) * v[k]).sum())
            .collect()
    }

    /// `T M` for a row-major p x p matrix.
    pub(crate) fn mul_matrix(&self, m: &[Complex64]) -> Vec<Complex64> {
        let p = self.p;
        debug_assert_eq!(m.len(), p * p);
        let mut out = vec![Complex64::ZERO; p * p];
        for i in 0..p {
            for j in 0..p {
                let mut s = Complex64::ZERO;
                for k in 0..=i {
                    s += self.get(i, k) * m[k * p + j];
                }
                out[i * p + j] = s;
            }
        }
        out
    }

    /// Inverse of the lower-triangular factor by forward substitution.
    fn invert_lower(&self) -> Vec<Complex64> {
        let p = self.p;
        let mut w = vec![Complex64::ZERO; p * p];
        for j in 0..p {
            w[j * p + j] = Complex64::new(1.0 / self.get(j, j).re, 0.0);
            for i in (j + 1)..p {
                let mut s = Complex64::ZERO;
                for k in j..i {
                    s += self.get(i, k) * w[k * p + j];
                }
                w[i * p + j] = -s / self.get(i, i).re;
            }
        }
        w
    }
}

/// `tr(A B)` without forming the product: `sum_{i,k} A[i][k] B[k][i]`.
pub fn trace_product(a: &HermitianPD, b: &HermitianPD) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let p = a.dim();
    let mut s = Complex64::ZERO;
    for i in 0..p {
        for k in 0..p {
            s += a.get(i, k) * b.get(k, i);
        }
    }
    Ok(s)
}
