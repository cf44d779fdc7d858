use crate::error::{BiuniError, Result};
use crate::linalg::{
    renormalize, sign1_map, ComplexMatrix, TorusVector, UnitaryMatrix, C64, I, ONE,
};

/// `|xy|` at or below this counts as a zero entry.
pub const CONTINUUM_TOL: f64 = 1e-12;

/// Biunimodular vectors of a 2x2 unitary with leading entry 1.
#[derive(Clone, Debug, PartialEq)]
pub enum U2Biuni {
    /// Exactly the two vectors `(1, i e^{i(arg x - arg y)})` and its negative twin.
    Pair(TorusVector, TorusVector),
    /// Every `(1, d)` is biunimodular.
    Continuum,
}

impl U2Biuni {
    /// First vector of the pair, or `(1, 1)` for a continuum.
    pub fn first(&self) -> TorusVector {
        match self {
            U2Biuni::Pair(p, _) => p.clone(),
            U2Biuni::Continuum => TorusVector::ones(2),
        }
    }
}

fn expect_order(a: &ComplexMatrix, n: usize) -> Result<()> {
    if a.rows() != n || a.cols() != n {
        return Err(BiuniError::InvalidDimension(format!(
            "expected a {n}x{n} matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

pub(crate) fn require_order(a: &ComplexMatrix, n: usize) -> Result<()> {
    expect_order(a, n)
}

pub fn u2_biuni(a: &UnitaryMatrix) -> Result<U2Biuni> {
    expect_order(a, 2)?;
    let x = a[(0, 0)];
    let y = a[(0, 1)];
    if x.norm() * y.norm() <= CONTINUUM_TOL {
        return Ok(U2Biuni::Continuum);
    }
    let d = I * renormalize(x * y.conj());
    let plus = TorusVector::new(vec![ONE, renormalize(d)])?;
    let minus = TorusVector::new(vec![ONE, renormalize(-d)])?;
    Ok(U2Biuni::Pair(plus, minus))
}

/// `(1/2) [[a(1+z), ac(1-z)], [b(1-z), bc(1+z)]]`.
pub fn u2_from_phases(a: C64, b: C64, c: C64, z: C64) -> Result<UnitaryMatrix> {
    TorusVector::new(vec![a, b, c, z])?;
    let m = ComplexMatrix::from_row_major(
        2,
        2,
        vec![
            a * (1.0 + z) * 0.5,
            a * c * (1.0 - z) * 0.5,
            b * (1.0 - z) * 0.5,
            b * c * (1.0 + z) * 0.5,
        ],
    )?;
    UnitaryMatrix::new(m)
}

/// Phases `(a, b, c, z)` with `u2_from_phases(a, b, c, z) = A`.
pub fn u2_to_phases(a: &UnitaryMatrix) -> Result<[C64; 4]> {
    let v = u2_biuni(a)?.first();
    let w = sign1_map(&a.apply(&v));
    // S = D_{conj w} A D_v has S_11 = (1+z)/2
    let s11 = w[0].conj() * a[(0, 0)] * v[0];
    let z = renormalize(2.0 * s11 - 1.0);
    Ok([w[0], w[1], v[1].conj(), z])
}
