use super::matrix::{ComplexMatrix, UnitaryMatrix, C64, ONE, ZERO};
use crate::error::{BiuniError, Result};

const OFF_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 60;

/// `M = U diag(sigma) V^*`, singular values sorted descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// `M = psd * unitary`.
#[derive(Clone, Debug)]
pub struct PolarFactors {
    pub psd: ComplexMatrix,
    pub unitary: UnitaryMatrix,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Column vectors.
type Columns = Vec<Vec<C64>>;

/// One-sided Jacobi on the columns of `m`. Returns orthogonalized columns and `V`.
fn jacobi(m: &ComplexMatrix) -> Result<(Columns, Columns)> {
    let cols = m.cols();
    let mut g: Vec<Vec<C64>> = (0..cols).map(|k| m.column(k)).collect();
    let mut v: Vec<Vec<C64>> = (0..cols)
        .map(|k| (0..cols).map(|j| if j == k { ONE } else { ZERO }).collect())
        .collect();
    let scale = g.iter().map(|c| norm_sqr(c)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((g, v));
    }
    let mut off = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        off = 0.0;
        for p in 0..cols {
            for q in p + 1..cols {
                let a = norm_sqr(&g[p]);
                let b = norm_sqr(&g[q]);
                // columns negligible against the whole matrix carry no rotation
                if a <= scale * 1e-60 || b <= scale * 1e-60 {
                    continue;
                }
                let c = dot(&g[p], &g[q]);
                let cabs = c.norm();
                let rel = cabs / (a * b).sqrt();
                off = off.max(rel);
                if rel <= OFF_TOL {
                    continue;
                }
                let phase = (c / cabs).conj();
                let zeta = (b - a) / (2.0 * cabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut g, p, q, cs, sn, phase);
                rotate(&mut v, p, q, cs, sn, phase);
            }
        }
        if off <= OFF_TOL {
            return Ok((g, v));
        }
    }
    Err(BiuniError::SvdNoConvergence {
        sweeps: MAX_SWEEPS,
        off,
    })
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, cs: f64, sn: f64, phase: C64) {
    let (left, right) = cols.split_at_mut(q);
    let gp = &mut left[p];
    let gq = &mut right[0];
    for (x, y) in gp.iter_mut().zip(gq.iter_mut()) {
        let h = *y * phase;
        let xp = *x * cs - h * sn;
        let yq = *x * sn + h * cs;
        *x = xp;
        *y = yq;
    }
}

/// Singular values of an arbitrary matrix, descending.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let work = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.adjoint()
    };
    let (g, _) = jacobi(&work)?;
    let mut s: Vec<f64> = g.iter().map(|c| norm_sqr(c).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Full SVD of a square matrix. Left vectors for negligible singular values are
/// completed from the standard basis in index order.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    if !m.is_square() {
        return Err(BiuniError::ShapeMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let n = m.rows();
    let (g, v) = jacobi(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = g.iter().map(|c| norm_sqr(c).sqrt()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let sigma: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = smax * OFF_TOL;

    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for (idx, &k) in order.iter().enumerate() {
        if sigma[idx] > cutoff && sigma[idx] > 0.0 {
            let mut col: Vec<C64> = g[k].iter().map(|z| z / sigma[idx]).collect();
            orthonormalize_against(&mut col, &ucols);
            ucols.push(col);
        }
    }
    let mut basis = 0;
    while ucols.len() < n {
        let mut e: Vec<C64> = (0..n)
            .map(|j| if j == basis { ONE } else { ZERO })
            .collect();
        basis += 1;
        if orthonormalize_against(&mut e, &ucols) > 1e-6 {
            ucols.push(e);
        }
    }
    let u = ComplexMatrix::from_fn(n, n, |j, k| ucols[k][j]);
    let vm = ComplexMatrix::from_fn(n, n, |j, k| v[order[k]][j]);
    Ok(Svd { u, sigma, v: vm })
}

/// Two passes of Gram-Schmidt; returns the norm before the final normalization.
fn orthonormalize_against(col: &mut [C64], basis: &[Vec<C64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, col);
            for (x, y) in col.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let nrm = norm_sqr(col).sqrt();
    if nrm > 0.0 {
        for x in col.iter_mut() {
            *x /= nrm;
        }
    }
    nrm
}

/// Polar decomposition from the SVD `M = W' Sigma W^*`:
/// `psd = W' Sigma W'^*`, `unitary = W' W^*`.
pub fn polar_decompose(m: &ComplexMatrix) -> Result<PolarFactors> {
    let s = svd(m)?;
    let n = m.rows();
    let psd = ComplexMatrix::from_fn(n, n, |j, k| {
        (0..n)
            .map(|l| s.u[(j, l)] * s.sigma[l] * s.u[(k, l)].conj())
            .sum()
    });
    let unitary = UnitaryMatrix::new(s.u.matmul(&s.v.adjoint()))?;
    Ok(PolarFactors { psd, unitary })
}

/// Nearest unitary in Frobenius norm, plus the size of the correction.
pub fn project_to_unitary(m: &ComplexMatrix) -> Result<(UnitaryMatrix, f64)> {
    let p = polar_decompose(m)?;
    let corr = p.unitary.max_abs_diff(m);
    Ok((p.unitary, corr))
}
