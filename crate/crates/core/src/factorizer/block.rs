use serde_json::json;

use super::u2::{u2_from_phases, u2_to_phases};
use crate::error::{BiuniError, Result};
use crate::linalg::json::matrix_to_json;
use crate::linalg::{polar_decompose, ComplexMatrix, UnitaryMatrix, C64, I};

/// Block unitaries are accepted up to this residual.
const BLOCK_UNITARY_TOL: f64 = 1e-8;

/// `U = (1/2) diag(A,B) [[I+Z, I-Z],[I-Z, I+Z]] diag(I,C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDecomposition {
    pub a: UnitaryMatrix,
    pub b: UnitaryMatrix,
    pub c: UnitaryMatrix,
    pub z: UnitaryMatrix,
}

impl BlockDecomposition {
    pub fn reconstruct(&self) -> Result<UnitaryMatrix> {
        block2n_synthesize(&self.a, &self.b, &self.c, &self.z)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "A": matrix_to_json(&self.a),
            "B": matrix_to_json(&self.b),
            "C": matrix_to_json(&self.c),
            "Z": matrix_to_json(&self.z),
        })
    }
}

/// `(1/2) [[X+Y, X-Y],[X-Y, X+Y]]`, i.e. `F (X ⊕ Y) F` with `F = [[I,I],[I,-I]]/sqrt2`.
fn hadamard_sandwich(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let sum = x.add(y).scale(C64::new(0.5, 0.0));
    let diff = x.sub(y).scale(C64::new(0.5, 0.0));
    ComplexMatrix::from_blocks(&sum, &diff, &diff, &sum)
}

fn block_diag(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_blocks(
        x,
        &ComplexMatrix::zeros(x.rows(), y.cols()),
        &ComplexMatrix::zeros(y.rows(), x.cols()),
        y,
    )
}

pub fn block2n_synthesize(
    a: &UnitaryMatrix,
    b: &UnitaryMatrix,
    c: &UnitaryMatrix,
    z: &UnitaryMatrix,
) -> Result<UnitaryMatrix> {
    let n = a.n();
    for (name, m) in [("B", b), ("C", c), ("Z", z)] {
        if m.n() != n {
            return Err(BiuniError::ShapeMismatch {
                expected: format!("{name} of size {n}"),
                got: format!("{}", m.n()),
            });
        }
    }
    let middle = hadamard_sandwich(&ComplexMatrix::identity(n), z);
    let out = block_diag(a, b)
        .matmul(&middle)
        .matmul(&block_diag(&ComplexMatrix::identity(n), c));
    UnitaryMatrix::new(out)
}

pub fn block2n_decompose(u: &UnitaryMatrix) -> Result<BlockDecomposition> {
    let size = u.n();
    if !size.is_multiple_of(2) {
        return Err(BiuniError::ShapeMismatch {
            expected: "even size".into(),
            got: format!("{size}"),
        });
    }
    let n = size / 2;
    let x = u.submatrix(0, 0, n, n);
    let y = u.submatrix(0, n, n, n);
    let x2 = u.submatrix(n, 0, n, n);
    let y2 = u.submatrix(n, n, n, n);
    let px = polar_decompose(&x)?;
    let py = polar_decompose(&y)?;
    // C* = i U_Y* U_X makes X + Y C* = (S_X + i S_Y) U_X unitary
    let c_adj = py.unitary.adjoint().matmul(&px.unitary).scale(I);
    let a = x.add(&y.matmul(&c_adj));
    let b = x2.add(&y2.matmul(&c_adj));
    let a = UnitaryMatrix::with_tolerance(a, BLOCK_UNITARY_TOL)?;
    let b = UnitaryMatrix::with_tolerance(b, BLOCK_UNITARY_TOL)?;
    let c = UnitaryMatrix::with_tolerance(c_adj.adjoint(), BLOCK_UNITARY_TOL)?;
    let v = block_diag(&a.adjoint(), &b.adjoint())
        .matmul(u)
        .matmul(&block_diag(&ComplexMatrix::identity(n), &c_adj));
    // F V F = I ⊕ Z
    let fvf = hadamard_sandwich_inverse(&v, n);
    let z = UnitaryMatrix::with_tolerance(fvf.submatrix(n, n, n, n), BLOCK_UNITARY_TOL)?;
    Ok(BlockDecomposition { a, b, c, z })
}

/// `F V F` for `F = [[I,I],[I,-I]]/sqrt2`.
fn hadamard_sandwich_inverse(v: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let p = v.submatrix(0, 0, n, n);
    let q = v.submatrix(0, n, n, n);
    let r = v.submatrix(n, 0, n, n);
    let s = v.submatrix(n, n, n, n);
    let h = C64::new(0.5, 0.0);
    let tl = p.add(&q).add(&r).add(&s).scale(h);
    let tr = p.sub(&q).add(&r).sub(&s).scale(h);
    let bl = p.add(&q).sub(&r).sub(&s).scale(h);
    let br = p.sub(&q).sub(&r).add(&s).scale(h);
    ComplexMatrix::from_blocks(&tl, &tr, &bl, &br)
}

/// The closed-form 4x4 unitary from sixteen phases. Each array is
/// `[p0, p1, p2, p3]` with factor `u2_from_phases(p1, p2, p3, p0)`.
pub fn u4_from_phases(a: [C64; 4], b: [C64; 4], c: [C64; 4], z: [C64; 4]) -> Result<UnitaryMatrix> {
    let factor = |p: [C64; 4]| u2_from_phases(p[1], p[2], p[3], p[0]);
    block2n_synthesize(&factor(a)?, &factor(b)?, &factor(c)?, &factor(z)?)
}

/// Inverse of [`u4_from_phases`]: phase arrays `[a, b, c, z]` in its argument order.
pub fn u4_to_phases(u: &UnitaryMatrix) -> Result<[[C64; 4]; 4]> {
    if u.n() != 4 {
        return Err(BiuniError::ShapeMismatch {
            expected: "4x4".into(),
            got: format!("{}x{}", u.n(), u.n()),
        });
    }
    let d = block2n_decompose(u)?;
    let params = |m: &UnitaryMatrix| u2_to_phases(m).map(|[a, b, c, z]| [z, a, b, c]);
    Ok([params(&d.a)?, params(&d.b)?, params(&d.c)?, params(&d.z)?])
}

/// `n=1` specialization: `a, b, c, z` as 1x1 blocks.
pub fn scalar_blocks(a: C64, b: C64, c: C64, z: C64) -> Result<UnitaryMatrix> {
    let one = |x: C64| UnitaryMatrix::new(ComplexMatrix::diag(&[x]));
    block2n_synthesize(&one(a)?, &one(b)?, &one(c)?, &one(z)?)
}
