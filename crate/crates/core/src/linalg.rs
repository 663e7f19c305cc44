//! Small dense complex matrices.
//!
//! Everything here is sized for single-qudit operators (d ≤ 31) and the
//! superoperators of two or three copies of a qubit or qutrit. Matrices are
//! immutable values: every operation returns a fresh matrix.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Default tolerance for structural checks (Hermiticity, unitarity, ...).
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Tolerance used when a matrix is required to be Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |A - A†| = {max_asymmetry:e} exceeds {tol:e}")]
    NotHermitian { max_asymmetry: f64, tol: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry count {len} does not match shape {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Eigenvalues sorted in descending order with matching orthonormal
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// The `i`-th eigenvector as an owned column.
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }

    /// `V diag(w) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.vectors.rows;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| {
                    self.vectors.get(i, k) * self.values[k] * self.vectors.get(j, k).conj()
                })
                .sum()
        })
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real diagonal matrix.
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// The rank-one operator `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::outer_pair(v, v)
    }

    /// `|a⟩⟨b|`.
    pub fn outer_pair(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `A - A†`; infinite for non-square input.
    pub fn max_hermitian_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_hermitian_asymmetry() <= tol
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            let (ia, ib) = (i / other.rows, i % other.rows);
            for j in 0..cols {
                let (ja, jb) = (j / other.cols, j % other.cols);
                data.push(self.get(ia, ja) * other.get(ib, jb));
            }
        }
        Self { rows, cols, data }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        inner(v, &self.mul_vec(v))
    }

    /// Column-stacking vectorization: entry `(i, j)` lands at `i + j·rows`.
    pub fn vec_columns(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Inverse of [`vec_columns`](Self::vec_columns) for a square `n × n` matrix.
    pub fn from_vec_columns(n: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), n * n);
        Self::from_fn(n, n, |i, j| v[i + j * n])
    }

    /// Hermitian eigendecomposition with the default symmetry tolerance.
    pub fn hermitian_eigensystem(&self) -> Result<HermitianEigen, LinalgError> {
        self.hermitian_eigensystem_tol(HERMITIAN_TOL)
    }

    pub fn hermitian_eigensystem_tol(&self, tol: f64) -> Result<HermitianEigen, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let asym = self.max_hermitian_asymmetry();
        if asym > tol {
            return Err(LinalgError::NotHermitian {
                max_asymmetry: asym,
                tol,
            });
        }
        let n = self.rows;
        // symmetrize so the solver sees an exactly Hermitian input
        let m = DMatrix::from_fn(n, n, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5);
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Self::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(HermitianEigen { values, vectors })
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        let eig = self.hermitian_eigensystem()?;
        Ok(*eig.values.last().expect("empty matrix"))
    }

    /// True iff the smallest eigenvalue is at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> Result<bool, LinalgError> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// Matrix exponential (Padé approximant with scaling and squaring).
    pub fn expm(&self) -> Result<ComplexMatrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let e = DMatrix::from_fn(n, n, |i, j| self.get(i, j)).exp();
        Ok(Self::from_fn(n, n, |i, j| e[(i, j)]))
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut data = vec![C64::new(0.0, 0.0); self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (out, b) in data[i * rhs.cols..(i + 1) * rhs.cols].iter_mut().zip(row) {
                    *out += a * b;
                }
            }
        }
        ComplexMatrix {
            rows: self.rows,
            cols: rhs.cols,
            data,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product of two state vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(-iθσ_x) = cos θ 𝕀 - i sin θ σ_x
        let th = 0.7;
        let e = sigma_x().scale(c(0.0, -th)).expm().unwrap();
        let expect = &ComplexMatrix::identity(2).scale_real(th.cos()) + &sigma_x().scale(c(0.0, -th.sin()));
        assert!(e.max_abs_diff(&expect) < 1e-14);
        let d = ComplexMatrix::diag(&[0.0, -1.0]).expm().unwrap();
        assert!((d.get(1, 1).re - (-1f64).exp()).abs() < 1e-15);
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&a + &a.adjoint()).scale_real(0.5)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2), ComplexMatrix::identity(4));
        let p = ComplexMatrix::diag(&[1.0, 0.0]);
        assert_eq!(p.kron(&i2), ComplexMatrix::diag(&[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_zz_on_00() {
        let zz = sigma_z().kron(&sigma_z());
        let ket00 = vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)];
        assert_eq!(zz.mul_vec(&ket00), ket00);
    }

    #[test]
    fn kron_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let m = random_hermitian(2, &mut rng);
        let left = a.kron(&b).kron(&m);
        let right = a.kron(&b.kron(&m));
        assert!(left.max_abs_diff(&right) < 1e-15);
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let eig = ComplexMatrix::diag(&[3.0, 1.0, 2.0])
            .hermitian_eigensystem()
            .unwrap();
        assert_eq!(eig.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn sigma_x_eigensystem() {
        let eig = sigma_x().hermitian_eigensystem().unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] + 1.0).abs() < 1e-14);
        let plus = eig.vector(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // up to a global phase
        let overlap = inner(&[c(s, 0.), c(s, 0.)], &plus).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        let minus = eig.vector(1);
        let overlap = inner(&[c(s, 0.), c(-s, 0.)], &minus).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_hermitian_9x9_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let h = random_hermitian(9, &mut rng);
            let eig = h.hermitian_eigensystem().unwrap();
            let v = &eig.vectors;
            let gram = &v.adjoint() * v;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(9)) < 1e-10);
            assert!(eig.reconstruct().max_abs_diff(&h) < 1e-10);
            let sum: f64 = eig.values.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::new(2, 2, vec![c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        assert!(matches!(
            m.hermitian_eigensystem(),
            Err(LinalgError::NotHermitian { .. })
        ));
        assert!(m.is_psd(1e-10).is_err());
    }

    #[test]
    fn psd_checks() {
        assert!(ComplexMatrix::identity(4).is_psd(1e-10).unwrap());
        assert!(!ComplexMatrix::diag(&[1.0, -0.5]).is_psd(1e-10).unwrap());
        assert!(ComplexMatrix::diag(&[1.0, -5e-11]).is_psd(1e-10).unwrap());
    }

    #[test]
    fn vec_roundtrip_is_column_stacking() {
        let m = ComplexMatrix::new(2, 2, vec![c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]).unwrap();
        assert_eq!(m.vec_columns(), vec![c(1., 0.), c(3., 0.), c(2., 0.), c(4., 0.)]);
        assert_eq!(ComplexMatrix::from_vec_columns(2, &m.vec_columns()), m);
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(ComplexMatrix::new(2, 2, vec![c(0., 0.); 3]).is_err());
    }
}
