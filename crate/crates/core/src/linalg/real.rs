use crate::error::{BiuniError, Result};

/// Solves the dense real system `a x = b` (row-major `n x n`) by Gaussian
/// elimination with partial pivoting.
pub fn solve_real(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(BiuniError::ShapeMismatch {
            expected: format!("{} entries", n * n),
            got: format!("{} entries", a.len()),
        });
    }
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|j| (j, a[j * n + k].abs()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax == 0.0 || !pmax.is_finite() {
            return Err(BiuniError::Tolerance("singular linear system".into()));
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        let d = a[k * n + k];
        for j in k + 1..n {
            let f = a[j * n + k] / d;
            if f == 0.0 {
                continue;
            }
            for c in k..n {
                a[j * n + c] -= f * a[k * n + c];
            }
            b[j] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| a[k * n + c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k * n + k];
    }
    Ok(x)
}
