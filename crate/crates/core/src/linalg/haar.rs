use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::{ComplexMatrix, UnitaryMatrix, C64, ONE, ZERO};
use crate::error::{BiuniError, Result};

/// Householder QR of a square matrix. `R` has the Householder sign convention
/// (its diagonal is generally complex).
pub fn householder_qr(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    assert!(m.is_square());
    let mut r = m.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(1) {
        let x: Vec<C64> = (k..n).map(|j| r[(j, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            ONE
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // R <- H R on rows k.., H = I - 2 v v^*
        for c in k..n {
            let s: C64 = (k..n).map(|j| v[j - k].conj() * r[(j, c)]).sum();
            for j in k..n {
                r[(j, c)] -= 2.0 * v[j - k] * s;
            }
        }
        // Q <- Q H on columns k..
        for row in 0..n {
            let s: C64 = (k..n).map(|j| q[(row, j)] * v[j - k]).sum();
            for j in k..n {
                q[(row, j)] -= 2.0 * s * v[j - k].conj();
            }
        }
        for j in k + 1..n {
            r[(j, k)] = ZERO;
        }
    }
    (q, r)
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the columns
/// of `Q` rescaled by the phases of `diag(R)`. Bit-reproducible per seed.
pub fn haar_random_unitary(n: usize, seed: u64) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(BiuniError::InvalidDimension("unitary of order 0".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * scale, im * scale)
    });
    let (q, r) = householder_qr(&z);
    let phases: Vec<C64> = (0..n)
        .map(|k| {
            let d = r[(k, k)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                ONE
            }
        })
        .collect();
    let ones = vec![ONE; n];
    UnitaryMatrix::new(q.scale_rows_cols(&ones, &phases))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs() {
        let u = haar_random_unitary(6, 2).unwrap();
        let m = u
            .matrix()
            .scale(C64::new(2.0, 1.0))
            .add(&ComplexMatrix::identity(6));
        let (q, r) = householder_qr(&m);
        assert!(q.matmul(&r).max_abs_diff(&m) < 1e-12);
        assert!(q.unitarity_residual() < 1e-13);
        for j in 0..6 {
            for k in 0..j {
                assert_eq!(r[(j, k)], ZERO);
            }
        }
    }

    #[test]
    fn order_one_is_a_phase() {
        for seed in 0..5 {
            let u = haar_random_unitary(1, seed).unwrap();
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn residual_small_and_reproducible() {
        let a = haar_random_unitary(5, 7).unwrap();
        assert!(a.unitarity_residual() <= 1e-12);
        let b = haar_random_unitary(5, 7).unwrap();
        assert_eq!(a.matrix().data(), b.matrix().data());
        let c = haar_random_unitary(5, 8).unwrap();
        assert_ne!(a.matrix().data(), c.matrix().data());
        assert!(haar_random_unitary(0, 1).is_err());
    }

    #[test]
    fn entry_second_moment() {
        let n = 25;
        let samples = 1000;
        let mut acc = 0.0;
        for s in 0..samples {
            let u = haar_random_unitary(n, 10_000 + s).unwrap();
            acc += u[(0, 0)].norm_sqr() + u[(n - 1, 3)].norm_sqr();
        }
        let mean = acc / (2.0 * samples as f64);
        assert!(
            (mean - 1.0 / n as f64).abs() <= 0.05 / n as f64,
            "mean {mean}"
        );
    }

    #[test]
    fn phase_of_diagonal_is_uniformish() {
        // without the R-phase correction the first-row phases would cluster
        let mut sum = C64::new(0.0, 0.0);
        let samples = 2000;
        for s in 0..samples {
            let u = haar_random_unitary(3, s).unwrap();
            let d = u[(0, 0)];
            sum += d / d.norm();
        }
        assert!(sum.norm() / (samples as f64) < 0.08);
    }
}
