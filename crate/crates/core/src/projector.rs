//! Alternating projections between the torus and its image under `A`, with a
//! runtime certificate for near-biunimodular vectors.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BiuniError, Result};
use crate::linalg::{
    json::VectorRecord, sign1_map, sign_map, solve_real, TorusVector, UnitaryMatrix, C64, I,
};
use crate::rng::start_vector;

/// Iterations over which a run must gain at least [`STAGNATION_GAIN`].
pub const STAGNATION_WINDOW: usize = 50;
pub const STAGNATION_GAIN: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub delta: f64,
    pub max_iters: usize,
    pub max_starts: usize,
    pub seed: u64,
    pub record_trace: bool,
}

impl SearchConfig {
    pub fn new(delta: f64, max_iters: usize, max_starts: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            delta,
            max_iters,
            max_starts,
            seed,
            record_trace: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(BiuniError::Parameter(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.max_iters == 0 || self.max_starts == 0 {
            return Err(BiuniError::Parameter(
                "max_iters and max_starts must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Whether the certified bounds apply (`delta <= 1/8`).
    pub fn certified(&self) -> bool {
        self.delta <= 0.125
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            delta: 1e-10,
            max_iters: 10_000,
            max_starts: 1_000,
            seed: 0,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub vector: TorusVector,
    pub residual: f64,
    pub iterations: usize,
    pub starts_used: usize,
    pub converged: bool,
    pub trace: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct SearchRecord<'a> {
    converged: bool,
    residual: f64,
    iterations: usize,
    starts_used: usize,
    vector: VectorRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a Vec<f64>>,
}

impl SearchResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SearchRecord {
            converged: self.converged,
            residual: self.residual,
            iterations: self.iterations,
            starts_used: self.starts_used,
            vector: VectorRecord::from_slice(&self.vector),
            trace: self.trace.as_ref(),
        })
        .expect("search record serializes")
    }
}

/// Output of one projection step. An entry is zero where `A^* sign(Av)`
/// vanishes, in which case `on_torus` is false.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectStep {
    pub entries: Vec<C64>,
    pub on_torus: bool,
}

impl ProjectStep {
    pub fn into_torus(self) -> Option<TorusVector> {
        if self.on_torus {
            TorusVector::new(self.entries).ok()
        } else {
            None
        }
    }
}

fn check_dims(a: &UnitaryMatrix, v: &[C64]) -> Result<()> {
    if a.n() != v.len() {
        return Err(BiuniError::ShapeMismatch {
            expected: format!("vector of length {}", a.n()),
            got: format!("length {}", v.len()),
        });
    }
    Ok(())
}

fn l1(w: &[C64]) -> f64 {
    w.iter().map(|z| z.norm()).sum()
}

/// `sign(A^* sign(Av))`.
pub fn project_step(a: &UnitaryMatrix, v: &TorusVector) -> Result<ProjectStep> {
    check_dims(a, v)?;
    Ok(step_from_image(a, &a.apply(v)))
}

fn step_from_image(a: &UnitaryMatrix, w: &[C64]) -> ProjectStep {
    let s = sign_map(w);
    let u = a.apply_adjoint(&s);
    let entries = sign_map(&u);
    let on_torus = entries.iter().all(|z| z.norm() > 0.5);
    ProjectStep { entries, on_torus }
}

/// Iterates [`project_step`] from `v0` until `||Av||_1 > n - delta`, the
/// iteration cap, a vanishing intermediate, or stagnation.
pub fn run_from(a: &UnitaryMatrix, v0: &TorusVector, cfg: &SearchConfig) -> Result<SearchResult> {
    check_dims(a, v0)?;
    let n = a.n() as f64;
    let target = n - cfg.delta;
    let mut v = v0.clone();
    let mut w = a.apply(&v);
    let mut value = l1(&w);
    let mut trace = cfg.record_trace.then(|| vec![value]);
    let mut history: Vec<f64> = Vec::with_capacity(STAGNATION_WINDOW + 1);
    history.push(value);
    let mut iterations = 0;
    let mut converged = value > target;
    while !converged && iterations < cfg.max_iters {
        let step = step_from_image(a, &w);
        if !step.on_torus {
            break;
        }
        let next = TorusVector::from_unchecked(step.entries);
        let next_w = a.apply(&next);
        v = next;
        w = next_w;
        value = l1(&w);
        iterations += 1;
        if let Some(t) = trace.as_mut() {
            t.push(value);
        }
        converged = value > target;
        if history.len() > STAGNATION_WINDOW {
            history.remove(0);
        }
        history.push(value);
        if !converged && history.len() > STAGNATION_WINDOW && value - history[0] < STAGNATION_GAIN {
            break;
        }
    }
    Ok(SearchResult {
        vector: v.gauge_first(),
        residual: n - value,
        iterations,
        starts_used: 1,
        converged,
        trace,
    })
}

fn better(a: &SearchResult, b: &SearchResult) -> bool {
    a.residual < b.residual
}

/// Runs from i.i.d. uniform starts `0, 1, ...` and returns the first success,
/// or the best residual once `max_starts` are used.
pub fn multi_start_search(a: &UnitaryMatrix, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let n = a.n();
    let mut best: Option<SearchResult> = None;
    for k in 0..cfg.max_starts {
        let v0 = start_vector(n, cfg.seed, k as u64);
        let mut r = run_from(a, &v0, cfg)?;
        r.starts_used = k + 1;
        if r.converged {
            return Ok(r);
        }
        if best.as_ref().is_none_or(|b| better(&r, b)) {
            best = Some(r);
        }
    }
    let mut b = best.expect("max_starts >= 1");
    b.starts_used = cfg.max_starts;
    Ok(b)
}

/// Same result as [`multi_start_search`], evaluating `chunk` starts at a time
/// on the rayon pool.
pub fn multi_start_search_parallel(
    a: &UnitaryMatrix,
    cfg: &SearchConfig,
    chunk: usize,
) -> Result<SearchResult> {
    cfg.validate()?;
    let n = a.n();
    let chunk = chunk.max(1);
    let mut best: Option<SearchResult> = None;
    let mut k0 = 0;
    while k0 < cfg.max_starts {
        let k1 = (k0 + chunk).min(cfg.max_starts);
        let runs: Vec<Result<SearchResult>> = (k0..k1)
            .into_par_iter()
            .map(|k| {
                let v0 = start_vector(n, cfg.seed, k as u64);
                run_from(a, &v0, cfg).map(|mut r| {
                    r.starts_used = k + 1;
                    r
                })
            })
            .collect();
        for r in runs {
            let r = r?;
            if r.converged {
                return Ok(r);
            }
            if best.as_ref().is_none_or(|b| better(&r, b)) {
                best = Some(r);
            }
        }
        k0 = k1;
    }
    let mut b = best.expect("max_starts >= 1");
    b.starts_used = cfg.max_starts;
    Ok(b)
}

/// Measured quantities of the near-biunimodular certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearBiuniCertificate {
    /// `||1 - |Av| ||_2`, below `sqrt(2 delta)`.
    pub two_delta_bound: f64,
    /// `min |Av|`, at least 1/2.
    pub min_abs_av: f64,
    /// `min |A^* sign(Av)|`, at least 1/2.
    pub min_abs_astar_sign: f64,
    /// `||P_A v - v||_inf`.
    pub step_gap_bound: f64,
    /// `2 sqrt(n) (||A P_A v||_1 - ||Av||_1)^{1/2}` plus rounding slack.
    pub step_gap_limit: f64,
    /// `n - ||Av||_1`.
    pub residual: f64,
}

/// Rounding allowance on the value gap, per unit of `n`.
const GAP_SLACK: f64 = 1e-13;

/// Checks all certificate bounds for a vector with `||Av||_1 > n - delta`,
/// `delta <= 1/8`.
pub fn certify_near(
    a: &UnitaryMatrix,
    v: &TorusVector,
    delta: f64,
) -> Result<NearBiuniCertificate> {
    check_dims(a, v)?;
    if !(delta > 0.0 && delta <= 0.125) {
        return Err(BiuniError::Parameter(format!(
            "certificate needs 0 < delta <= 1/8, got {delta}"
        )));
    }
    let n = a.n() as f64;
    let w = a.apply(v);
    let value = l1(&w);
    let residual = n - value;
    if !(value > n - delta) {
        return Err(BiuniError::NotNearBiunimodular {
            residual,
            limit: delta,
        });
    }
    let two_delta_bound = w
        .iter()
        .map(|z| (1.0 - z.norm()).powi(2))
        .sum::<f64>()
        .sqrt();
    let limit_a = (2.0 * delta).sqrt();
    if !(two_delta_bound < limit_a) {
        return Err(BiuniError::CertificateViolation(format!(
            "||1 - |Av| ||_2 = {two_delta_bound:.3e} not below {limit_a:.3e}"
        )));
    }
    let min_abs_av = w.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let back = a.apply_adjoint(&sign_map(&w));
    let min_abs_astar_sign = back.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min_abs_av < 0.5 || min_abs_astar_sign < 0.5 {
        return Err(BiuniError::CertificateViolation(format!(
            "min |Av| = {min_abs_av:.3e}, min |A* sign(Av)| = {min_abs_astar_sign:.3e}"
        )));
    }
    let stepped = sign_map(&back);
    let gap = l1(&a.apply(&stepped)) - value;
    let step_gap_bound = stepped
        .iter()
        .zip(v.iter())
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max);
    let step_gap_limit = 2.0 * n.sqrt() * (gap.max(0.0) + GAP_SLACK * n).sqrt();
    if step_gap_bound > step_gap_limit {
        return Err(BiuniError::CertificateViolation(format!(
            "||P v - v||_inf = {step_gap_bound:.3e} exceeds {step_gap_limit:.3e}"
        )));
    }
    Ok(NearBiuniCertificate {
        two_delta_bound,
        min_abs_av,
        min_abs_astar_sign,
        step_gap_bound,
        step_gap_limit,
        residual,
    })
}

/// `prod_k (Av)_k`.
pub fn pi_value(a: &UnitaryMatrix, v: &TorusVector) -> Result<C64> {
    check_dims(a, v)?;
    Ok(a.apply(v).iter().product())
}

/// Deviations of a vector from each equivalent form of biunimodularity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredicateReport {
    /// `||D_{conj(w)} A D_v 1 - 1||_2` with `w = sign1(Av)`.
    pub fix_gap: f64,
    /// `n - ||Av||_1`.
    pub l1_gap: f64,
    /// `1 - |prod (Av)_k|`.
    pub pi_gap: f64,
    /// `max_k | |(Av)_k| - 1 |`.
    pub torus_gap: f64,
}

impl PredicateReport {
    pub fn max_gap(&self) -> f64 {
        self.fix_gap
            .abs()
            .max(self.l1_gap.abs())
            .max(self.pi_gap.abs())
            .max(self.torus_gap)
    }
}

pub fn biuni_predicates(a: &UnitaryMatrix, v: &TorusVector) -> Result<PredicateReport> {
    check_dims(a, v)?;
    let n = a.n() as f64;
    let w = a.apply(v);
    let phases = sign1_map(&w);
    // S 1 = D_{conj(w)} A v
    let fix_gap = w
        .iter()
        .zip(phases.iter())
        .map(|(z, p)| (p.conj() * z - 1.0).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(PredicateReport {
        fix_gap,
        l1_gap: n - l1(&w),
        pi_gap: 1.0 - w.iter().product::<C64>().norm(),
        torus_gap: w.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max),
    })
}

/// Damped Gauss-Newton on the phases `v_1..v_{n-1}` (first entry held) for
/// `sum_k (|(Av)_k|^2 - 1)^2`. Returns the input if no step improves it.
pub fn polish(a: &UnitaryMatrix, v: &TorusVector, max_iters: usize) -> Result<TorusVector> {
    check_dims(a, v)?;
    let n = a.n();
    let mut cur = v.clone();
    if n == 1 {
        return Ok(cur);
    }
    let cost = |x: &TorusVector| -> f64 {
        a.apply(x)
            .iter()
            .map(|z| (z.norm_sqr() - 1.0).powi(2))
            .sum()
    };
    let mut c = cost(&cur);
    let mut lambda = 1e-6;
    let m = n - 1;
    for _ in 0..max_iters {
        if c < 1e-30 {
            break;
        }
        let w = a.apply(&cur);
        let r: Vec<f64> = w.iter().map(|z| z.norm_sqr() - 1.0).collect();
        // jac[k][j] = d r_k / d theta_{j+1}
        let jac: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                (1..n)
                    .map(|j| -2.0 * (w[k].conj() * a[(k, j)] * cur[j]).im)
                    .collect()
            })
            .collect();
        let mut jtj = vec![0.0; m * m];
        let mut jtr = vec![0.0; m];
        for k in 0..n {
            for p in 0..m {
                jtr[p] += jac[k][p] * r[k];
                for q in 0..m {
                    jtj[p * m + q] += jac[k][p] * jac[k][q];
                }
            }
        }
        let scale = (0..m)
            .map(|p| jtj[p * m + p])
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut improved = false;
        for _ in 0..30 {
            let mut sys = jtj.clone();
            for p in 0..m {
                sys[p * m + p] += lambda * scale;
            }
            let Ok(step) = solve_real(sys, jtr.iter().map(|x| -x).collect()) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<C64> = cur
                .iter()
                .enumerate()
                .map(|(j, &z)| {
                    if j == 0 {
                        z
                    } else {
                        z * (I * step[j - 1]).exp()
                    }
                })
                .collect();
            let trial = TorusVector::from_unchecked(
                trial.into_iter().map(crate::linalg::renormalize).collect(),
            );
            let tc = cost(&trial);
            if tc < c {
                cur = trial;
                c = tc;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cis, fourier_matrix, haar_random_unitary, inf_to_1_value, ONE};
    use crate::rng::{random_torus, stream};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cfg(delta: f64) -> SearchConfig {
        SearchConfig::new(delta, 10_000, 100, 1).unwrap()
    }

    #[test]
    fn identity_fixes_everything() {
        let a = UnitaryMatrix::identity(4);
        let v = start_vector(4, 3, 0);
        let p = project_step(&a, &v).unwrap().into_torus().unwrap();
        assert!(p.dist2(&v) < 1e-15);
        let r = run_from(&a, &TorusVector::ones(4), &cfg(1e-10)).unwrap();
        assert!(r.converged && r.iterations == 0 && r.residual == 0.0);
        let m = multi_start_search(&a, &cfg(1e-10)).unwrap();
        assert!(m.converged && m.starts_used == 1);
    }

    #[test]
    fn fourier2_ones_is_stuck() {
        let f2 = fourier_matrix(2).unwrap();
        let ones = TorusVector::ones(2);
        let step = project_step(&f2, &ones).unwrap();
        assert!(step.on_torus);
        assert!(TorusVector::new(step.entries).unwrap().dist2(&ones) < 1e-15);
        let r = run_from(&f2, &ones, &cfg(1e-10)).unwrap();
        assert!(!r.converged);
        assert!((r.residual - (2.0 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn zero_output_is_flagged() {
        // F_2 (1,1) = (sqrt 2, 0): a zero in sign(Av) alone keeps the output on the torus
        let f2 = fourier_matrix(2).unwrap();
        assert!(project_step(&f2, &TorusVector::ones(2)).unwrap().on_torus);
        // sign(Av) = (1,1) maps back to (sqrt 2, 0)
        let step = step_from_image(&f2, &[ONE, ONE]);
        assert!(!step.on_torus);
        assert_eq!(step.entries[1], C64::new(0.0, 0.0));
        assert!(step.into_torus().is_none());
    }

    #[test]
    fn fourier3_converges_with_certificate() {
        let f3 = fourier_matrix(3).unwrap();
        let r = run_from(&f3, &start_vector(3, 1, 0), &cfg(1e-10).with_trace()).unwrap();
        assert!(r.converged && r.residual < 1e-10);
        let t = r.trace.unwrap();
        assert!(t.windows(2).all(|p| p[1] >= p[0] - 1e-12));
        certify_near(&f3, &r.vector, 1e-10).unwrap();
    }

    #[test]
    fn certificate_reference_cases() {
        let id = UnitaryMatrix::identity(5);
        let c = certify_near(&id, &TorusVector::ones(5), 1e-10).unwrap();
        assert_eq!(c.two_delta_bound, 0.0);
        let f3 = fourier_matrix(3).unwrap();
        let w = cis(2.0 * PI / 3.0);
        let v = TorusVector::new(vec![ONE, w * w, ONE]).unwrap();
        let c = certify_near(&f3, &v, 1e-10).unwrap();
        assert!(c.two_delta_bound <= 1e-12);
        let f2 = fourier_matrix(2).unwrap();
        assert!(matches!(
            certify_near(&f2, &TorusVector::ones(2), 1e-10),
            Err(BiuniError::NotNearBiunimodular { .. })
        ));
        assert!(certify_near(&id, &TorusVector::ones(5), 0.5).is_err());
    }

    #[test]
    fn certificate_on_haar10() {
        let a = haar_random_unitary(10, 5).unwrap();
        let r = multi_start_search(&a, &cfg(1e-10)).unwrap();
        assert!(r.converged);
        let c = certify_near(&a, &r.vector, 1e-10).unwrap();
        assert!(c.step_gap_bound <= c.step_gap_limit);
    }

    #[test]
    fn pi_value_examples() {
        let id = UnitaryMatrix::identity(3);
        assert!((pi_value(&id, &TorusVector::ones(3)).unwrap() - ONE).norm() < 1e-15);
        let f2 = fourier_matrix(2).unwrap();
        let v = TorusVector::new(vec![ONE, I]).unwrap();
        assert!((pi_value(&f2, &v).unwrap().norm() - 1.0).abs() < 1e-12);
        // F_2 (1,1) = (sqrt 2, 0)
        assert!(pi_value(&f2, &TorusVector::ones(2)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn fourier7_value_reaches_seven() {
        let f7 = fourier_matrix(7).unwrap();
        let r = multi_start_search(&f7, &cfg(1e-10)).unwrap();
        assert!(r.converged);
        assert!((inf_to_1_value(&f7, &r.vector).unwrap() - 7.0).abs() < 1e-7);
    }

    #[test]
    fn parallel_search_matches_sequential() {
        let a = haar_random_unitary(6, 77).unwrap();
        let c = SearchConfig::new(1e-10, 2000, 50, 4).unwrap();
        let s = multi_start_search(&a, &c).unwrap();
        for chunk in [1, 3, 16] {
            assert_eq!(multi_start_search_parallel(&a, &c, chunk).unwrap(), s);
        }
    }

    #[test]
    fn polish_tightens_near_solution() {
        let a = haar_random_unitary(5, 21).unwrap();
        let r = multi_start_search(&a, &SearchConfig::new(1e-4, 10_000, 100, 2).unwrap()).unwrap();
        assert!(r.converged);
        let p = polish(&a, &r.vector, 50).unwrap();
        let rep = biuni_predicates(&a, &p).unwrap();
        assert!(rep.max_gap() < 1e-12, "{rep:?}");
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::new(0.0, 1, 1, 0).is_err());
        assert!(SearchConfig::new(1e-3, 0, 1, 0).is_err());
        assert!(SearchConfig::new(1e-3, 1, 0, 0).is_err());
        assert!(run_from(
            &UnitaryMatrix::identity(2),
            &TorusVector::ones(3),
            &cfg(1e-3)
        )
        .is_err());
    }

    #[test]
    fn json_shape() {
        let r = run_from(
            &UnitaryMatrix::identity(2),
            &TorusVector::ones(2),
            &cfg(1e-3),
        )
        .unwrap();
        let j = r.to_json();
        for key in [
            "converged",
            "residual",
            "iterations",
            "starts_used",
            "vector",
        ] {
            assert!(j.get(key).is_some());
        }
        assert!(j["vector"].get("re").is_some());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn step_is_monotone(n in 1usize..9, seed in any::<u64>()) {
            let a = haar_random_unitary(n, seed).unwrap();
            let mut rng = stream(seed, 99);
            let v = random_torus(n, &mut rng);
            let before = inf_to_1_value(&a, &v).unwrap();
            prop_assert!(before <= n as f64 + 1e-9);
            let step = project_step(&a, &v).unwrap();
            if let Some(p) = step.into_torus() {
                let after = inf_to_1_value(&a, &p).unwrap();
                prop_assert!(after >= before - 1e-12);
                prop_assert!(after <= n as f64 + 1e-9);
            }
        }

        #[test]
        fn pi_is_bounded(n in 1usize..9, seed in any::<u64>()) {
            let a = haar_random_unitary(n, seed).unwrap();
            let v = random_torus(n, &mut stream(seed, 5));
            prop_assert!(pi_value(&a, &v).unwrap().norm() <= 1.0 + 1e-9);
        }
    }
}
