use std::ops::{Deref, Index, IndexMut};

use num_complex::Complex64;

use crate::error::{BiuniError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Default unimodularity tolerance for [`TorusVector`].
pub const UNIMODULAR_TOL: f64 = 1e-12;
/// Default unitarity tolerance for [`UnitaryMatrix`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Unit complex number `e^{i theta}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// A dense complex vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(BiuniError::InvalidDimension(
                "vector length must be >= 1".into(),
            ));
        }
        if let Some(i) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(BiuniError::NonFinite(i));
        }
        Ok(Self(entries))
    }

    pub fn from_reals(re: &[f64]) -> Result<Self> {
        Self::new(re.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![ONE; n.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Deref for ComplexVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

/// A vector on the torus: every entry has modulus one.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusVector(Vec<C64>);

impl TorusVector {
    /// Validates against [`UNIMODULAR_TOL`].
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(entries, UNIMODULAR_TOL)
    }

    pub fn with_tolerance(entries: Vec<C64>, tol: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(BiuniError::InvalidDimension(
                "vector length must be >= 1".into(),
            ));
        }
        for (i, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(BiuniError::NonFinite(i));
            }
            let m = z.norm();
            if (m - 1.0).abs() > tol {
                return Err(BiuniError::NotUnimodular {
                    index: i,
                    modulus: m,
                });
            }
        }
        Ok(Self(entries))
    }

    /// Builds `(e^{i phi_0}, ..., e^{i phi_{n-1}})`.
    pub fn from_phases(phases: &[f64]) -> Result<Self> {
        if phases.is_empty() {
            return Err(BiuniError::InvalidDimension(
                "vector length must be >= 1".into(),
            ));
        }
        Ok(Self(phases.iter().map(|&p| cis(p)).collect()))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![ONE; n.max(1)])
    }

    /// Entries are taken as-is; callers guarantee unimodularity.
    pub(crate) fn from_unchecked(entries: Vec<C64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn phases(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.arg()).collect()
    }

    /// Rotates the vector so that its first entry is exactly 1.
    pub fn gauge_first(&self) -> Self {
        let g = self.0[0].conj() / self.0[0].norm();
        Self(
            self.0
                .iter()
                .enumerate()
                .map(|(k, &z)| if k == 0 { ONE } else { renormalize(z * g) })
                .collect(),
        )
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn to_complex(&self) -> ComplexVector {
        ComplexVector(self.0.clone())
    }

    /// Euclidean distance to another torus vector of the same length.
    pub fn dist2(&self, other: &TorusVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for TorusVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

#[inline]
pub(crate) fn renormalize(z: C64) -> C64 {
    let m = z.norm();
    if m > 0.0 {
        z / m
    } else {
        ONE
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..rows {
            for k in 0..cols {
                data.push(f(j, k));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(BiuniError::InvalidDimension(format!(
                "{rows}x{cols} matrix"
            )));
        }
        if data.len() != rows * cols {
            return Err(BiuniError::ShapeMismatch {
                expected: format!("{} entries", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        if let Some(i) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(BiuniError::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows of `(re, im)` pairs.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(BiuniError::Format("non-rectangular rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (k, &z) in entries.iter().enumerate() {
            m[(k, k)] = z;
        }
        m
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

    pub fn row(&self, j: usize) -> &[C64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.rows).map(|j| self[(j, k)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |j, k| self[(k, j)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |j, k| self[(k, j)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(j, l)];
                if a == ZERO {
                    continue;
                }
                let row_b = other.row(l);
                let row_out = &mut out.data[j * other.cols..(j + 1) * other.cols];
                for (o, b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * v` without dimension checks beyond a debug assertion.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|j| self.row(j).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// `self^* * v`.
    pub fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (j, &x) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(j)) {
                *o += a.conj() * x;
            }
        }
        out
    }

    /// `D_left * self * D_right` for diagonal factors given by their entries.
    pub fn scale_rows_cols(&self, left: &[C64], right: &[C64]) -> Self {
        Self::from_fn(self.rows, self.cols, |j, k| {
            left[j] * self[(j, k)] * right[k]
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-entry modulus of `self^* self - I`.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = self.adjoint().matmul(self);
        g.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |j, k| self[(row0 + j, col0 + k)])
    }

    /// Assembles a 2x2 block matrix from equally sized square blocks.
    pub fn from_blocks(tl: &Self, tr: &Self, bl: &Self, br: &Self) -> Self {
        let n = tl.rows;
        Self::from_fn(2 * n, 2 * n, |j, k| match (j < n, k < n) {
            (true, true) => tl[(j, k)],
            (true, false) => tr[(j, k - n)],
            (false, true) => bl[(j - n, k)],
            (false, false) => br[(j - n, k - n)],
        })
    }

    /// `1 ⊕ self`.
    pub fn one_plus(&self) -> Self {
        let n = self.rows + 1;
        Self::from_fn(n, n, |j, k| match (j, k) {
            (0, 0) => ONE,
            (0, _) | (_, 0) => ZERO,
            _ => self[(j - 1, k - 1)],
        })
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    pub fn imag_part(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.im).collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (j, k): (usize, usize)) -> &C64 {
        &self.data[j * self.cols + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut C64 {
        &mut self.data[j * self.cols + k]
    }
}

/// A square matrix checked for unitarity at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    base: ComplexMatrix,
    unitarity_residual: f64,
}

impl UnitaryMatrix {
    /// Validates against [`UNITARY_TOL`].
    pub fn new(base: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(base, UNITARY_TOL)
    }

    /// Validation with a caller-chosen tolerance, for deliberately perturbed inputs.
    pub fn with_tolerance(base: ComplexMatrix, tol: f64) -> Result<Self> {
        if !base.is_square() {
            return Err(BiuniError::ShapeMismatch {
                expected: "square matrix".into(),
                got: format!("{}x{}", base.rows(), base.cols()),
            });
        }
        if base.rows() == 0 {
            return Err(BiuniError::InvalidDimension("0x0 matrix".into()));
        }
        let residual = base.unitarity_residual();
        if !(residual <= tol) {
            return Err(BiuniError::NotUnitary {
                residual,
                tolerance: tol,
            });
        }
        Ok(Self {
            base,
            unitarity_residual: residual,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            base: ComplexMatrix::identity(n),
            unitarity_residual: 0.0,
        }
    }

    /// Diagonal phase matrix.
    pub fn diagonal(phases: &TorusVector) -> Self {
        let base = ComplexMatrix::diag(phases);
        let unitarity_residual = base.unitarity_residual();
        Self {
            base,
            unitarity_residual,
        }
    }

    pub fn n(&self) -> usize {
        self.base.rows()
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.unitarity_residual
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.base
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.base
    }

    pub fn adjoint(&self) -> Self {
        Self {
            base: self.base.adjoint(),
            unitarity_residual: self.unitarity_residual,
        }
    }

    /// Product of two unitaries; the residual is recomputed.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Self::new(self.base.matmul(&other.base))
    }
}

impl Deref for UnitaryMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.base
    }
}
