use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::u2::{require_order, u2_biuni};
use crate::error::{BiuniError, Result};
use crate::linalg::{
    cis, inf_to_1_value, renormalize, ComplexMatrix, TorusVector, UnitaryMatrix, C64, I, ONE, ZERO,
};
use crate::projector::polish;

/// Entries of the first row/column smaller than this are treated as zeros.
const SNAP: f64 = 1e-13;
/// Sample count of the `m` sweep.
const SWEEP_SAMPLES: usize = 720;
/// `|cos alpha|` at or above this takes the block-diagonal branch.
const BLOCK_BRANCH: f64 = 1.0 - 1e-10;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn phase_or_one(z: C64) -> C64 {
    if z.norm() < SNAP {
        ONE
    } else {
        renormalize(z)
    }
}

fn mat3(rows: [[C64; 3]; 3]) -> ComplexMatrix {
    ComplexMatrix::from_fn(3, 3, |j, k| rows[j][k])
}

/// Rotation in the (2,3) plane: `[[1,0,0],[0,c,-s],[0,s,c]]`.
pub fn x_rotation(phi: f64) -> ComplexMatrix {
    let (s, c) = phi.sin_cos();
    mat3([
        [ONE, ZERO, ZERO],
        [ZERO, re(c), re(-s)],
        [ZERO, re(s), re(c)],
    ])
}

/// `[[1,0,0],[0,c,s],[0,s,-c]]`, the (2,3) rotation followed by flipping column 3.
pub fn x_reflection(phi: f64) -> ComplexMatrix {
    let (s, c) = phi.sin_cos();
    mat3([
        [ONE, ZERO, ZERO],
        [ZERO, re(c), re(s)],
        [ZERO, re(s), re(-c)],
    ])
}

/// `[[c,0,-s],[0,z,0],[s,0,c]]`.
pub fn y_rotation(phi: f64, z: C64) -> ComplexMatrix {
    let (s, c) = phi.sin_cos();
    mat3([[re(c), ZERO, re(-s)], [ZERO, z, ZERO], [re(s), ZERO, re(c)]])
}

/// Rotation in the (1,2) plane: `[[c,-s,0],[s,c,0],[0,0,1]]`.
pub fn z_rotation(phi: f64) -> ComplexMatrix {
    let (s, c) = phi.sin_cos();
    mat3([
        [re(c), re(-s), ZERO],
        [re(s), re(c), ZERO],
        [ZERO, ZERO, ONE],
    ])
}

fn t_entries(alpha: f64, beta: f64, gamma: f64, z: C64) -> ComplexMatrix {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    mat3([
        [re(ca), re(-sa * sg), re(sa * cg)],
        [
            re(-sa * sb),
            z * (cb * cg) - ca * sb * sg,
            z * (cb * sg) + ca * sb * cg,
        ],
        [
            re(sa * cb),
            z * (sb * cg) + ca * cb * sg,
            z * (sb * sg) - ca * cb * cg,
        ],
    ])
}

/// The four-parameter 3x3 unitary `T(alpha, beta, gamma, z)`.
pub fn t_matrix(alpha: f64, beta: f64, gamma: f64, z: C64) -> Result<UnitaryMatrix> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(BiuniError::NotUnimodular {
            index: 0,
            modulus: z.norm(),
        });
    }
    UnitaryMatrix::new(t_entries(alpha, beta, gamma, z))
}

/// `A = diag(left) T(alpha, beta, gamma, z) diag(1, right[0], right[1])`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct U3Params {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(serialize_with = "ser_c")]
    pub z: C64,
    #[serde(serialize_with = "ser_cs")]
    pub left_phases: [C64; 3],
    #[serde(serialize_with = "ser_cs")]
    pub right_phases: [C64; 2],
}

fn ser_c<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn ser_cs<S: serde::Serializer>(zs: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    zs.iter()
        .map(|z| [z.re, z.im])
        .collect::<Vec<_>>()
        .serialize(s)
}

impl U3Params {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let t = t_entries(self.alpha, self.beta, self.gamma, self.z);
        t.scale_rows_cols(
            &self.left_phases,
            &[ONE, self.right_phases[0], self.right_phases[1]],
        )
    }
}

/// Deterministic section of the `T`-form: angles in `[0, pi/2]`, phases
/// taken from the first row and column.
pub fn u3_canonicalize(a: &UnitaryMatrix) -> Result<U3Params> {
    require_order(a, 3)?;
    let a11 = a[(0, 0)];
    let (a12, a13, a21, a31) = (a[(0, 1)], a[(0, 2)], a[(1, 0)], a[(2, 0)]);
    let row_tail = (a12.norm_sqr() + a13.norm_sqr()).sqrt();
    let l1 = phase_or_one(a11);
    if row_tail < SNAP {
        return Ok(canonicalize_block(a, l1));
    }
    let alpha = row_tail.atan2(a11.norm());
    let gamma = a12.norm().atan2(a13.norm());
    let beta = a21.norm().atan2(a31.norm());
    let l4 = phase_or_one(-a12 * l1.conj());
    let l5 = phase_or_one(a13 * l1.conj());
    let l2 = phase_or_one(-a21);
    let l3 = phase_or_one(a31);
    let left = [l1, l2, l3];
    let right = [ONE, l4, l5];
    let g = a.scale_rows_cols(&conj3(&left), &conj3(&right));
    let y = x_rotation(beta)
        .transpose()
        .matmul(&g)
        .matmul(&x_reflection(gamma));
    let z = phase_or_one(y[(1, 1)]);
    Ok(U3Params {
        alpha,
        beta,
        gamma,
        z,
        left_phases: left,
        right_phases: [l4, l5],
    })
}

fn conj3(p: &[C64; 3]) -> [C64; 3] {
    [p[0].conj(), p[1].conj(), p[2].conj()]
}

/// `A = diag(l1) ⊕ M`: alpha = gamma = 0 and the lower block is
/// `diag(l2,l3) [[z cb, sb],[z sb, -cb]] diag(l4, 1)`.
fn canonicalize_block(a: &UnitaryMatrix, l1: C64) -> U3Params {
    let m = a.submatrix(1, 1, 2, 2);
    let beta = (m[(0, 1)].norm() + m[(1, 0)].norm()).atan2(m[(0, 0)].norm() + m[(1, 1)].norm());
    let (sb, cb) = beta.sin_cos();
    let l2 = if sb > SNAP {
        phase_or_one(m[(0, 1)])
    } else {
        ONE
    };
    let l3 = if cb > SNAP {
        phase_or_one(-m[(1, 1)])
    } else {
        ONE
    };
    // z l4 from whichever of column 1's entries is larger
    let zl4 = if cb >= sb {
        phase_or_one(m[(0, 0)] * l2.conj())
    } else {
        phase_or_one(m[(1, 0)] * l3.conj())
    };
    U3Params {
        alpha: 0.0,
        beta,
        gamma: 0.0,
        z: zl4,
        left_phases: [l1, l2, l3],
        right_phases: [ONE, ONE],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EulerVariant {
    /// `diag(left) X_beta Y^z_alpha X_gamma diag(1, right)`.
    X,
    /// `diag(left) Z_beta Y^z_alpha X_gamma diag(1, right)`.
    Z,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerFactors {
    pub variant: EulerVariant,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(serialize_with = "ser_c")]
    pub z: C64,
    #[serde(serialize_with = "ser_cs")]
    pub left_phases: [C64; 3],
    #[serde(serialize_with = "ser_cs")]
    pub right_phases: [C64; 2],
}

impl EulerFactors {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let outer = match self.variant {
            EulerVariant::X => x_rotation(self.beta),
            EulerVariant::Z => z_rotation(self.beta),
        };
        let core = outer
            .matmul(&y_rotation(self.alpha, self.z))
            .matmul(&x_rotation(self.gamma));
        core.scale_rows_cols(
            &self.left_phases,
            &[ONE, self.right_phases[0], self.right_phases[1]],
        )
    }
}

/// Both rotation-angle forms of a 3x3 unitary.
pub fn euler_factor(a: &UnitaryMatrix) -> Result<(EulerFactors, EulerFactors)> {
    require_order(a, 3)?;
    // X_gamma = X~_gamma diag(1,1,-1), so A diag(1,1,-1) carries the T-form
    let flipped = UnitaryMatrix::new(a.scale_rows_cols(&[ONE; 3], &[ONE, ONE, -ONE]))?;
    let p = u3_canonicalize(&flipped)?;
    let x = EulerFactors {
        variant: EulerVariant::X,
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma,
        z: p.z,
        left_phases: p.left_phases,
        right_phases: p.right_phases,
    };
    Ok((x, euler_z(a)))
}

/// Column 1 of `Z_b Y X_g` is `(cb ca, sb ca, sa)`, row 3 is `(sa, ca sg, ca cg)`.
fn euler_z(a: &UnitaryMatrix) -> EulerFactors {
    let (a11, a21, a31, a32, a33) = (a[(0, 0)], a[(1, 0)], a[(2, 0)], a[(2, 1)], a[(2, 2)]);
    let l3 = phase_or_one(a31);
    let col_head = (a11.norm_sqr() + a21.norm_sqr()).sqrt();
    if col_head < SNAP {
        return euler_z_block(a, l3);
    }
    let alpha = a31.norm().atan2(col_head);
    let beta = a21.norm().atan2(a11.norm());
    let gamma = a32.norm().atan2(a33.norm());
    let l1 = phase_or_one(a11);
    let l2 = phase_or_one(a21);
    let l4 = phase_or_one(a32 * l3.conj());
    let l5 = phase_or_one(a33 * l3.conj());
    let left = [l1, l2, l3];
    let g = a.scale_rows_cols(&conj3(&left), &[ONE, l4.conj(), l5.conj()]);
    let y = z_rotation(beta)
        .transpose()
        .matmul(&g)
        .matmul(&x_rotation(gamma).transpose());
    let z = phase_or_one(y[(1, 1)]);
    EulerFactors {
        variant: EulerVariant::Z,
        alpha,
        beta,
        gamma,
        z,
        left_phases: left,
        right_phases: [l4, l5],
    }
}

/// `alpha = pi/2`, `gamma = 0`: rows 1-2, columns 2-3 form
/// `diag(l1,l2) [[-sb z, -cb],[cb z, -sb]] diag(l4, 1)`.
fn euler_z_block(a: &UnitaryMatrix, l3: C64) -> EulerFactors {
    let m = a.submatrix(0, 1, 2, 2);
    let beta = (m[(0, 0)].norm() + m[(1, 1)].norm()).atan2(m[(1, 0)].norm() + m[(0, 1)].norm());
    let (sb, cb) = beta.sin_cos();
    let l1 = if cb > SNAP {
        phase_or_one(-m[(0, 1)])
    } else {
        ONE
    };
    let l2 = if sb > SNAP {
        phase_or_one(-m[(1, 1)])
    } else {
        ONE
    };
    let zl4 = if cb >= sb {
        phase_or_one(m[(1, 0)] * l2.conj())
    } else {
        phase_or_one(-m[(0, 0)] * l1.conj())
    };
    EulerFactors {
        variant: EulerVariant::Z,
        alpha: PI / 2.0,
        beta,
        gamma: 0.0,
        z: zl4,
        left_phases: [l1, l2, l3],
        right_phases: [ONE, ONE],
    }
}

/// Quantities of the `m` sweep for fixed `(alpha, beta, gamma, z)`.
struct Sweep {
    sa: f64,
    ca: f64,
    sb: f64,
    cb: f64,
    sg: f64,
    cg: f64,
    z: C64,
}

impl Sweep {
    /// `e^{i phi_m}` of the biunimodular pair `(1, ±i e^{i phi_m})` of
    /// `U_m = R_beta diag(z, e^{im}) [[cg, sg],[-sg, cg]]`.
    fn phi(&self, m: f64) -> C64 {
        let e = cis(m);
        let x = self.z * (self.cb * self.cg) + e * (self.sb * self.sg);
        let y = self.z * (self.cb * self.sg) - e * (self.sb * self.cg);
        phase_or_one(x * y.conj())
    }

    fn sign(j: usize) -> f64 {
        if j == 1 {
            -1.0
        } else {
            1.0
        }
    }

    fn w(&self, j: usize, m: f64) -> C64 {
        -self.sg + I * self.phi(m) * (Self::sign(j) * self.cg)
    }

    fn target(&self, m: f64) -> C64 {
        self.sa / (cis(m) + self.ca)
    }

    fn h(&self, j: usize, m: f64) -> f64 {
        self.w(j, m).norm_sqr() - self.target(m).norm_sqr()
    }

    /// Vector `(1, e^{ix}, e^{iy})` solving the `T` problem at a crossing `m`.
    fn vector(&self, j: usize, m: f64) -> [C64; 3] {
        let w = self.w(j, m);
        let ex = phase_or_one(self.target(m) / w);
        [ONE, ex, ex * I * self.phi(m) * Self::sign(j)]
    }
}

fn bisect(s: &Sweep, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    let mut hlo = s.h(j, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let hm = s.h(j, mid);
        if hm.abs() <= 1e-14 || hi - lo < 1e-16 {
            return mid;
        }
        if (hm > 0.0) == (hlo > 0.0) {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimization of `|h_j|` on `[lo, hi]`.
fn minimize_abs(s: &Sweep, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (s.h(j, x1).abs(), s.h(j, x2).abs());
    for _ in 0..120 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = s.h(j, x1).abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = s.h(j, x2).abs();
        }
    }
    0.5 * (lo + hi)
}

/// Candidate vectors for `T`, crossings first, then the fallback minimizer.
fn t_candidates(p: &U3Params) -> Vec<[C64; 3]> {
    let (sa, ca) = p.alpha.sin_cos();
    let (sb, cb) = p.beta.sin_cos();
    let (sg, cg) = p.gamma.sin_cos();
    let s = Sweep {
        sa,
        ca,
        sb,
        cb,
        sg,
        cg,
        z: p.z,
    };
    let grid: Vec<f64> = (0..=SWEEP_SAMPLES)
        .map(|k| TAU * k as f64 / SWEEP_SAMPLES as f64)
        .collect();
    let mut out = Vec::new();
    let mut best: Option<(f64, usize, usize)> = None;
    for j in [1, 2] {
        let hs: Vec<f64> = grid.iter().map(|&m| s.h(j, m)).collect();
        for k in 0..SWEEP_SAMPLES {
            let (h0, h1) = (hs[k], hs[k + 1]);
            if best.is_none_or(|b| h0.abs() < b.0) {
                best = Some((h0.abs(), j, k));
            }
            if h0 == 0.0 || (h0 > 0.0) != (h1 > 0.0) {
                let m = if h0 == 0.0 {
                    grid[k]
                } else {
                    bisect(&s, j, grid[k], grid[k + 1])
                };
                // a sign change across a jump of phi_m is not a crossing
                if s.h(j, m).abs() <= 1e-9 {
                    out.push(s.vector(j, m));
                }
            }
        }
    }
    if let Some((_, j, k)) = best {
        let lo = grid[k.saturating_sub(1)];
        let hi = grid[(k + 1).min(SWEEP_SAMPLES)];
        out.push(s.vector(j, minimize_abs(&s, j, lo, hi)));
    }
    out
}

/// A biunimodular vector with leading entry 1 for any 3x3 unitary, built from
/// the `T`-form. Verified to reach `||Av||_1 >= 3 - 1e-8`.
pub fn u3_biuni_construct(a: &UnitaryMatrix) -> Result<TorusVector> {
    let p = u3_canonicalize(a)?;
    let candidates: Vec<[C64; 3]> = if p.alpha.cos().abs() >= BLOCK_BRANCH {
        let t = t_entries(p.alpha, p.beta, p.gamma, p.z);
        let block = UnitaryMatrix::with_tolerance(t.submatrix(1, 1, 2, 2), 1e-8)?;
        let d = u2_biuni(&block)?.first();
        vec![[ONE, d[0], d[1]]]
    } else {
        t_candidates(&p)
    };
    let mut best: Option<(f64, TorusVector)> = None;
    for c in candidates {
        // A = D1 T D2 maps D2^* v' to D1 T v'
        let v = TorusVector::new(vec![
            c[0],
            c[1] * p.right_phases[0].conj(),
            c[2] * p.right_phases[1].conj(),
        ])?;
        let v = polish(a, &v, 30)?.gauge_first();
        let value = inf_to_1_value(a, &v)?;
        if value >= 3.0 - 1e-8 {
            return Ok(v);
        }
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, v));
        }
    }
    let got = best.map_or(f64::NAN, |b| b.0);
    Err(BiuniError::RootFind(format!(
        "no crossing reached ||Av||_1 >= 3 - 1e-8 (best {got:.12})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_random_unitary;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn t_matrix_substitutions() {
        let t = t_matrix(0.0, 0.0, 0.0, ONE).unwrap();
        assert!(t.max_abs_diff(&ComplexMatrix::diag(&[ONE, ONE, -ONE])) < 1e-15);
        let t = t_matrix(PI / 2.0, 0.0, 0.0, ONE).unwrap();
        let want = mat3([[ZERO, ZERO, ONE], [ZERO, ONE, ZERO], [ONE, ZERO, ZERO]]);
        assert!(t.max_abs_diff(&want) < 1e-15);
        assert!(t_matrix(0.1, 0.2, 0.3, ONE * 1.5).is_err());
    }

    #[test]
    fn t_matrix_factorizes() {
        for k in 0..50 {
            let (a, b, g) = (
                0.37 * k as f64,
                1.1 + 0.23 * k as f64,
                -0.9 + 0.41 * k as f64,
            );
            let z = cis(0.77 * k as f64);
            let t = t_matrix(a, b, g, z).unwrap();
            assert!(t.unitarity_residual() <= 1e-12);
            let prod = x_rotation(b)
                .matmul(&y_rotation(a, z))
                .matmul(&x_reflection(g));
            assert!(prod.max_abs_diff(&t) < 1e-12);
        }
    }

    #[test]
    fn canonicalize_identity() {
        let p = u3_canonicalize(&UnitaryMatrix::identity(3)).unwrap();
        assert_eq!((p.alpha, p.beta, p.gamma), (0.0, 0.0, 0.0));
        assert!(p.reconstruct().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn canonicalize_recovers_parameters() {
        let z = cis(0.4);
        let t = t_matrix(0.3, 0.7, 1.1, z).unwrap();
        let p = u3_canonicalize(&t).unwrap();
        assert!(close(p.alpha, 0.3) && close(p.beta, 0.7) && close(p.gamma, 1.1));
        assert!((p.z - z).norm() < 1e-12);
        assert!(p
            .left_phases
            .iter()
            .chain(&p.right_phases)
            .all(|l| (l - ONE).norm() < 1e-12));
    }

    #[test]
    fn canonicalize_haar_and_degenerate() {
        for seed in 0..300 {
            let a = haar_random_unitary(3, seed).unwrap();
            let p = u3_canonicalize(&a).unwrap();
            assert!(p.reconstruct().max_abs_diff(&a) <= 1e-9, "seed {seed}");
        }
        // zero entries at every position of the first row and column
        let perms: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for seed in 0..20 {
            let b = haar_random_unitary(2, 500 + seed).unwrap();
            let ph = crate::rng::start_vector(3, seed, 1);
            let block = b.one_plus();
            for p in perms {
                for q in perms {
                    let m = ComplexMatrix::from_fn(3, 3, |j, k| block[(p[j], q[k])] * ph[j]);
                    let u = UnitaryMatrix::new(m).unwrap();
                    let c = u3_canonicalize(&u).unwrap();
                    assert!(c.reconstruct().max_abs_diff(&u) <= 1e-9);
                    let (x, zf) = euler_factor(&u).unwrap();
                    assert!(x.reconstruct().max_abs_diff(&u) <= 1e-9);
                    assert!(zf.reconstruct().max_abs_diff(&u) <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn euler_identity_and_haar() {
        let (x, z) = euler_factor(&UnitaryMatrix::identity(3)).unwrap();
        for f in [&x, &z] {
            assert!(f.reconstruct().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
            assert!((f.z - ONE).norm() < 1e-15);
            assert!(f
                .left_phases
                .iter()
                .chain(&f.right_phases)
                .all(|l| (l - ONE).norm() < 1e-15));
        }
        assert_eq!((x.alpha, x.beta, x.gamma), (0.0, 0.0, 0.0));
        let a = haar_random_unitary(3, 12).unwrap();
        let (x, z) = euler_factor(&a).unwrap();
        assert!(x.reconstruct().max_abs_diff(&a) <= 1e-9);
        assert!(z.reconstruct().max_abs_diff(&a) <= 1e-9);
    }

    #[test]
    fn euler_real_rotation() {
        // the classical O(3) angles are recovered with trivial phases
        for (a, b, g) in [(0.3, 0.5, 0.9), (1.2, 0.1, 0.4), (0.8, 1.4, 1.0)] {
            let r = x_rotation(b)
                .matmul(&y_rotation(a, ONE))
                .matmul(&x_rotation(g));
            let (x, z) = euler_factor(&UnitaryMatrix::new(r.clone()).unwrap()).unwrap();
            assert!(close(x.alpha, a) && close(x.beta, b) && close(x.gamma, g));
            assert!((x.z - ONE).norm() < 1e-12);
            for f in [&x, &z] {
                assert!(f
                    .left_phases
                    .iter()
                    .chain(&f.right_phases)
                    .all(|l| l.im.abs() < 1e-12));
                assert!(f.reconstruct().max_abs_diff(&r) < 1e-12);
            }
            let rz = z_rotation(b)
                .matmul(&y_rotation(a, -ONE))
                .matmul(&x_rotation(g));
            let (_, z) = euler_factor(&UnitaryMatrix::new(rz.clone()).unwrap()).unwrap();
            assert!(close(z.alpha, a) && close(z.beta, b) && close(z.gamma, g));
            assert!((z.z + ONE).norm() < 1e-12);
        }
    }

    fn zero_corner(alpha: f64, x: f64, y: f64) -> UnitaryMatrix {
        let (s, c) = alpha.sin_cos();
        let m = mat3([
            [re(c), re(s), ZERO],
            [re(x * s), re(-x * c), re(y)],
            [re(y * s), re(-y * c), re(-x)],
        ]);
        UnitaryMatrix::new(m).unwrap()
    }

    #[test]
    fn construct_zero_corner() {
        let alpha = PI / 5.0;
        let a = zero_corner(alpha, 0.6, 0.8);
        let v = u3_biuni_construct(&a).unwrap();
        let e = cis(alpha);
        let known = [
            [ONE, I, e],
            [ONE, -I, e.conj()],
            [ONE, I, -e],
            [ONE, -I, -e.conj()],
        ];
        assert!(
            known
                .iter()
                .any(|k| (0..3).all(|i| (k[i] - v[i]).norm() < 1e-6)),
            "{v:?}"
        );
    }

    #[test]
    fn construct_identity_and_haar() {
        let v = u3_biuni_construct(&UnitaryMatrix::identity(3)).unwrap();
        assert!((inf_to_1_value(&UnitaryMatrix::identity(3), &v).unwrap() - 3.0).abs() < 1e-12);
        for seed in 0..200 {
            let a = haar_random_unitary(3, seed).unwrap();
            let v = u3_biuni_construct(&a).unwrap();
            assert!(inf_to_1_value(&a, &v).unwrap() >= 3.0 - 1e-8, "seed {seed}");
            assert!((v[0] - ONE).norm() < 1e-15);
        }
    }

    #[test]
    fn construct_unpolished_crossing_is_accurate() {
        // the root-find alone, before any polishing, already solves T
        let p = U3Params {
            alpha: 0.9,
            beta: 0.4,
            gamma: 1.2,
            z: cis(2.0),
            left_phases: [ONE; 3],
            right_phases: [ONE; 2],
        };
        let t = t_matrix(0.9, 0.4, 1.2, cis(2.0)).unwrap();
        let c = t_candidates(&p);
        let v = TorusVector::new(c[0].to_vec()).unwrap();
        assert!(inf_to_1_value(&t, &v).unwrap() > 3.0 - 1e-10);
    }
}
