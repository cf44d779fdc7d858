//! Dense complex linear algebra used throughout the crate.

mod haar;
pub mod json;
mod matrix;
mod real;
mod svd;

pub use haar::{haar_random_unitary, householder_qr};
pub(crate) use matrix::renormalize;
pub use matrix::{
    cis, ComplexMatrix, ComplexVector, TorusVector, UnitaryMatrix, C64, I, ONE, UNIMODULAR_TOL,
    UNITARY_TOL, ZERO,
};
pub use real::solve_real;
pub use svd::{polar_decompose, project_to_unitary, singular_values, svd, PolarFactors, Svd};

use std::f64::consts::PI;

use crate::error::{BiuniError, Result};

/// Moduli below this are treated as exact zeros by the sign maps.
pub const ZERO_MODULUS: f64 = 1e-300;

/// The unitary DFT matrix with entries `exp(-2 pi i jk/n)/sqrt(n)`.
pub fn fourier_matrix(n: usize) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(BiuniError::InvalidDimension(
            "Fourier matrix of order 0".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let m = ComplexMatrix::from_fn(n, n, |j, k| {
        // jk reduced mod n keeps the angle small and the entries exactly periodic
        let e = (j * k) % n;
        root_of_unity(e, n) * scale
    });
    UnitaryMatrix::new(m)
}

/// `exp(-2 pi i e/n)`, exact at multiples of a quarter turn.
fn root_of_unity(e: usize, n: usize) -> C64 {
    if (4 * e).is_multiple_of(n) {
        match 4 * e / n {
            0 => ONE,
            1 => -I,
            2 => -ONE,
            _ => I,
        }
    } else {
        cis(-2.0 * PI * e as f64 / n as f64)
    }
}

/// Entrywise `z/|z|`, with 0 off the support.
pub fn sign_map(v: &[C64]) -> Vec<C64> {
    v.iter()
        .map(|&z| {
            let m = z.norm();
            if m < ZERO_MODULUS {
                ZERO
            } else {
                z / m
            }
        })
        .collect()
}

/// Entrywise `z/|z|`, with 1 off the support. Always lands on the torus.
pub fn sign1_map(v: &[C64]) -> TorusVector {
    let out = v
        .iter()
        .map(|&z| {
            let m = z.norm();
            if m < ZERO_MODULUS {
                ONE
            } else {
                let s = z / m;
                // one more normalization absorbs the rounding of the division
                s / s.norm()
            }
        })
        .collect();
    TorusVector::from_unchecked(out)
}

fn check_len(a: &ComplexMatrix, v_len: usize) -> Result<()> {
    if a.cols() != v_len {
        return Err(BiuniError::ShapeMismatch {
            expected: format!("vector of length {}", a.cols()),
            got: format!("length {v_len}"),
        });
    }
    Ok(())
}

/// `||Av||_1`.
pub fn inf_to_1_value(a: &UnitaryMatrix, v: &TorusVector) -> Result<f64> {
    check_len(a, v.len())?;
    Ok(a.apply(v).iter().map(|z| z.norm()).sum())
}

/// `N` copies of `block` on the diagonal.
pub fn block_diag_repeat(block: &UnitaryMatrix, copies: usize) -> Result<UnitaryMatrix> {
    if copies == 0 {
        return Err(BiuniError::InvalidDimension(
            "block count must be >= 1".into(),
        ));
    }
    let m = block.n();
    let size = m * copies;
    let out = ComplexMatrix::from_fn(size, size, |j, k| {
        if j / m == k / m {
            block[(j % m, k % m)]
        } else {
            ZERO
        }
    });
    UnitaryMatrix::new(out)
}
