//! Constructive decompositions of unitary matrices driven by biunimodular vectors.

mod block;
mod u2;
mod u3;

pub use block::{
    block2n_decompose, block2n_synthesize, scalar_blocks, u4_from_phases, u4_to_phases,
    BlockDecomposition,
};
pub use u2::{u2_biuni, u2_from_phases, u2_to_phases, U2Biuni, CONTINUUM_TOL};
pub use u3::{
    euler_factor, t_matrix, u3_biuni_construct, u3_canonicalize, x_reflection, x_rotation,
    y_rotation, z_rotation, EulerFactors, EulerVariant, U3Params,
};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{BiuniError, Result};
use crate::linalg::json::{matrix_to_json, vector_to_json};
use crate::linalg::{
    fourier_matrix, inf_to_1_value, project_to_unitary, sign1_map, ComplexMatrix, TorusVector,
    UnitaryMatrix, C64, ONE, UNIMODULAR_TOL, UNITARY_TOL,
};
use crate::projector::{multi_start_search, polish, SearchConfig};
use crate::rng::random_torus;

/// Residual above which an extracted block is rejected rather than projected.
pub const ANALYSIS_REJECT: f64 = 1e-6;
/// Default near-biunimodularity limit `n - ||Av||_1` accepted by LAR extraction.
pub const LAR_DELTA: f64 = 1e-6;
/// Gauss-Newton iterations applied to vectors before extraction.
const POLISH_ITERS: usize = 50;

/// An `n x n` table of unimodular parameters, stored row-major and 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTable {
    n: usize,
    entries: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct PhaseEntry {
    j: usize,
    k: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PhaseTableRecord {
    n: usize,
    phases: Vec<PhaseEntry>,
}

impl PhaseTable {
    pub fn new(n: usize, entries: Vec<C64>) -> Result<Self> {
        if n == 0 {
            return Err(BiuniError::InvalidDimension(
                "phase table of order 0".into(),
            ));
        }
        if entries.len() != n * n {
            return Err(BiuniError::ShapeMismatch {
                expected: format!("{} entries", n * n),
                got: format!("{}", entries.len()),
            });
        }
        for (index, z) in entries.iter().enumerate() {
            if (z.norm() - 1.0).abs() > UNIMODULAR_TOL {
                return Err(BiuniError::NotUnimodular {
                    index,
                    modulus: z.norm(),
                });
            }
        }
        Ok(Self { n, entries })
    }

    pub fn ones(n: usize) -> Self {
        Self {
            n,
            entries: vec![ONE; n * n],
        }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Self {
            n,
            entries: random_torus(n * n, &mut rng).into_inner(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(j, k)`, 0-based.
    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.entries[j * self.n + k]
    }

    fn set(&mut self, j: usize, k: usize, z: C64) {
        self.entries[j * self.n + k] = z;
    }

    /// `{"n": n, "phases": [{"j","k","re","im"}]}` with 1-based `j, k`.
    pub fn to_json(&self) -> serde_json::Value {
        let phases = (0..self.n)
            .flat_map(|j| (0..self.n).map(move |k| (j, k)))
            .map(|(j, k)| {
                let z = self.get(j, k);
                PhaseEntry {
                    j: j + 1,
                    k: k + 1,
                    re: z.re,
                    im: z.im,
                }
            })
            .collect();
        serde_json::to_value(PhaseTableRecord { n: self.n, phases }).expect("plain record")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rec: PhaseTableRecord = serde_json::from_value(value.clone())?;
        let n = rec.n;
        let mut entries = vec![None; n * n];
        for p in rec.phases {
            if p.j == 0 || p.k == 0 || p.j > n || p.k > n {
                return Err(BiuniError::Format(format!(
                    "phase index ({}, {}) outside 1..={n}",
                    p.j, p.k
                )));
            }
            entries[(p.j - 1) * n + p.k - 1] = Some(C64::new(p.re, p.im));
        }
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(i, z)| {
                z.ok_or_else(|| {
                    BiuniError::Format(format!("missing phase ({}, {})", i / n + 1, i % n + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, entries)
    }
}

/// `A_l = diag(a_l1..a_ll) F_l (1 ⊕ A_{l-1}) F_l^* diag(1, a_1l..a_{l-1,l})`, from `A_1 = [a_11]`.
pub fn synthesize(params: &PhaseTable) -> Result<UnitaryMatrix> {
    let mut cur = ComplexMatrix::diag(&[params.get(0, 0)]);
    for l in 2..=params.n {
        let f = fourier_matrix(l)?;
        let left: Vec<C64> = (0..l).map(|k| params.get(l - 1, k)).collect();
        let right: Vec<C64> = std::iter::once(ONE)
            .chain((0..l - 1).map(|k| params.get(k, l - 1)))
            .collect();
        cur = f
            .matmul(&cur.one_plus())
            .matmul(&f.adjoint())
            .scale_rows_cols(&left, &right);
    }
    UnitaryMatrix::new(cur)
}

/// `A = D_w F (1 ⊕ B) F^* D_v^*` from a (near-)biunimodular `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisResult {
    /// Leading entry 1.
    pub v: TorusVector,
    pub w: TorusVector,
    pub b: UnitaryMatrix,
    /// Distance moved by the polar projection of the raw block (0 if none was needed).
    pub correction: f64,
    pub reconstruction_error: f64,
}

impl AnalysisResult {
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        frame(&self.w, &self.v, &self.b)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "v": vector_to_json(&self.v),
            "w": vector_to_json(&self.w),
            "B": matrix_to_json(&self.b),
            "correction": self.correction,
            "reconstruction_error": self.reconstruction_error,
        })
    }
}

fn frame(w: &TorusVector, v: &TorusVector, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let f = fourier_matrix(w.len())?;
    let vbar: Vec<C64> = v.iter().map(|z| z.conj()).collect();
    Ok(f.matmul(&b.one_plus())
        .matmul(&f.adjoint())
        .scale_rows_cols(w, &vbar))
}

fn check_near(a: &UnitaryMatrix, v: &TorusVector, delta: f64) -> Result<()> {
    let n = a.n() as f64;
    let residual = n - inf_to_1_value(a, v)?;
    if !(residual < delta) {
        return Err(BiuniError::NotNearBiunimodular {
            residual,
            limit: delta,
        });
    }
    Ok(())
}

/// Polishes `v` and fixes its leading entry to 1.
fn refine(a: &UnitaryMatrix, v: &TorusVector) -> Result<TorusVector> {
    Ok(polish(a, v, POLISH_ITERS)?.gauge_first())
}

pub fn analyze(a: &UnitaryMatrix, v: &TorusVector, delta_check: f64) -> Result<AnalysisResult> {
    let n = a.n();
    if n < 2 {
        return Err(BiuniError::InvalidDimension("analysis needs n >= 2".into()));
    }
    check_near(a, v, delta_check)?;
    let v = refine(a, v)?;
    let w = sign1_map(&a.apply(&v));
    let wbar: Vec<C64> = w.iter().map(|z| z.conj()).collect();
    let core = a.scale_rows_cols(&wbar, &v);
    let f = fourier_matrix(n)?;
    let inner = f.adjoint().matmul(&core).matmul(&f);
    let raw = inner.submatrix(1, 1, n - 1, n - 1);
    let residual = raw.unitarity_residual();
    if residual > ANALYSIS_REJECT {
        return Err(BiuniError::AnalysisFailed { residual });
    }
    let (b, correction) = if residual > UNITARY_TOL {
        project_to_unitary(&raw)?
    } else {
        (UnitaryMatrix::new(raw)?, 0.0)
    };
    let reconstruction_error = frame(&w, &v, &b)?.max_abs_diff(a);
    Ok(AnalysisResult {
        v,
        w,
        b,
        correction,
        reconstruction_error,
    })
}

/// `A = D_L S D_R` with `S 1 = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LarDecomposition {
    pub left: TorusVector,
    pub core: UnitaryMatrix,
    /// Leading entry 1.
    pub right: TorusVector,
}

impl LarDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.core.scale_rows_cols(&self.left, &self.right)
    }

    /// Largest deviation of a row or column sum of `S` from 1.
    pub fn stochastic_gap(&self) -> f64 {
        let n = self.core.n();
        let ones = vec![ONE; n];
        let rows = self.core.apply(&ones);
        let cols = self.core.transpose().apply(&ones);
        rows.iter()
            .chain(&cols)
            .map(|s| (s - ONE).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "L": vector_to_json(&self.left),
            "S": matrix_to_json(&self.core),
            "R": vector_to_json(&self.right),
        })
    }
}

/// Uses [`LAR_DELTA`] as the near-biunimodularity limit.
pub fn lar_decompose(a: &UnitaryMatrix, v: &TorusVector) -> Result<LarDecomposition> {
    lar_decompose_with(a, v, LAR_DELTA)
}

pub fn lar_decompose_with(
    a: &UnitaryMatrix,
    v: &TorusVector,
    delta_check: f64,
) -> Result<LarDecomposition> {
    check_near(a, v, delta_check)?;
    let v = refine(a, v)?;
    let w = sign1_map(&a.apply(&v));
    let wbar: Vec<C64> = w.iter().map(|z| z.conj()).collect();
    let core = UnitaryMatrix::new(a.scale_rows_cols(&wbar, &v))?;
    Ok(LarDecomposition {
        left: w,
        core,
        right: v.conj(),
    })
}

/// Full recursive inversion of [`synthesize`].
#[derive(Clone, Debug, PartialEq)]
pub struct RecursiveDecomposition {
    pub table: PhaseTable,
    /// Polar corrections per level, from order `n` down to 2.
    pub corrections: Vec<f64>,
    pub reconstruction_error: f64,
}

impl RecursiveDecomposition {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "table": self.table.to_json(),
            "corrections": self.corrections,
            "reconstruction_error": self.reconstruction_error,
        })
    }
}

/// A biunimodular vector for one recursion level: closed forms at orders 2
/// and 3, the first multi-start hit above.
fn level_vector(a: &UnitaryMatrix, cfg: &SearchConfig) -> Result<TorusVector> {
    match a.n() {
        1 => Ok(TorusVector::ones(1)),
        2 => Ok(u2_biuni(a)?.first()),
        3 => u3_biuni_construct(a),
        n => {
            let found = multi_start_search(a, cfg)?;
            if !found.converged {
                return Err(BiuniError::SearchFailed(format!(
                    "order {n}: best residual {:.3e} after {} starts",
                    found.residual, found.starts_used
                )));
            }
            Ok(found.vector)
        }
    }
}

pub fn recursive_decompose(
    a: &UnitaryMatrix,
    cfg: &SearchConfig,
) -> Result<RecursiveDecomposition> {
    let n = a.n();
    let mut table = PhaseTable::ones(n);
    let mut corrections = Vec::with_capacity(n.saturating_sub(1));
    let mut cur = a.clone();
    for l in (2..=n).rev() {
        let v = level_vector(&cur, cfg)?;
        let limit = cfg.delta.max(LAR_DELTA);
        let step = analyze(&cur, &v, limit)?;
        for k in 0..l {
            table.set(l - 1, k, step.w[k]);
        }
        for k in 0..l - 1 {
            table.set(k, l - 1, step.v[k + 1].conj());
        }
        corrections.push(step.correction);
        cur = step.b;
    }
    let last = cur[(0, 0)];
    table.set(0, 0, last / last.norm());
    let reconstruction_error = synthesize(&table)?.max_abs_diff(a);
    Ok(RecursiveDecomposition {
        table,
        corrections,
        reconstruction_error,
    })
}

/// `u + z w` for a pair with complementary supports whose images also have
/// complementary supports, unimodular on each.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuumFamily {
    u: Vec<C64>,
    w: Vec<C64>,
}

/// Entries with modulus below this are off the support.
const SUPPORT_TOL: f64 = 1e-9;

fn split_support(x: &[C64], what: &str) -> Result<Vec<bool>> {
    x.iter()
        .enumerate()
        .map(|(index, z)| {
            let m = z.norm();
            if m < SUPPORT_TOL {
                Ok(false)
            } else if (m - 1.0).abs() <= SUPPORT_TOL {
                Ok(true)
            } else {
                Err(BiuniError::Parameter(format!(
                    "{what}[{index}] has modulus {m}, expected 0 or 1"
                )))
            }
        })
        .collect()
}

fn complementary(p: &[bool], q: &[bool], what: &str) -> Result<()> {
    if p.iter().zip(q).all(|(a, b)| a != b) {
        Ok(())
    } else {
        Err(BiuniError::Parameter(format!(
            "supports of {what} are not complementary"
        )))
    }
}

impl ContinuumFamily {
    pub fn new(a: &UnitaryMatrix, u: &[C64], w: &[C64]) -> Result<Self> {
        let n = a.n();
        if u.len() != n || w.len() != n {
            return Err(BiuniError::ShapeMismatch {
                expected: format!("vectors of length {n}"),
                got: format!("{}, {}", u.len(), w.len()),
            });
        }
        complementary(&split_support(u, "u")?, &split_support(w, "w")?, "u and w")?;
        let au = a.apply(u);
        let aw = a.apply(w);
        complementary(
            &split_support(&au, "Au")?,
            &split_support(&aw, "Aw")?,
            "Au and Aw",
        )?;
        Ok(Self {
            u: u.to_vec(),
            w: w.to_vec(),
        })
    }

    pub fn member(&self, z: C64) -> Result<TorusVector> {
        TorusVector::with_tolerance(
            self.u.iter().zip(&self.w).map(|(a, b)| a + z * b).collect(),
            1e-8,
        )
    }
}
