//! Dense complex matrices in row-major storage.

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix entry by entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Diagonal matrix from real values.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    /// Column vector from a slice.
    pub fn column_vector(entries: &[Complex64]) -> Self {
        ComplexMatrix { rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    /// Row vector from a slice.
    pub fn row_vector(entries: &[Complex64]) -> Self {
        ComplexMatrix { rows: 1, cols: entries.len(), data: entries.to_vec() }
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

    /// Row-major entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    /// Copy of row `i`.
    pub fn row(&self, i: usize) -> Vec<Complex64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Contiguous block `rows r0..r1`, `cols c0..c1` (half-open).
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Writes `block` into this matrix with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &ComplexMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j));
            }
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Plain transpose, no conjugation.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).conj())
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * factor).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dims(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product; the right factor indexes the fast axis.
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            let (ia, ib) = (i / other.rows, i % other.rows);
            let (ja, jb) = (j / other.cols, j % other.cols);
            self.get(ia, ja) * other.get(ib, jb)
        })
    }

    pub fn trace(&self) -> Complex64 {
        let n = self.rows.min(self.cols);
        (0..n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from Hermitian symmetry, `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Hermitian part `(A + A*)/2`. Requires a square matrix.
    pub fn hermitian_part(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        }))
    }

    fn check_same_shape(&self, other: &ComplexMatrix, op: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(format!(
                "{op} needs equal shapes, got {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub(crate) fn to_na(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }
}
