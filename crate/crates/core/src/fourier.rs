//! Fourier-matrix specifics: Gauss and Björck sequences, autocorrelation and
//! cyclic-root residuals, the symmetry group action on `Bi(F_n)`, orbits and
//! the orbit census.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{BiuniError, Result};
use crate::linalg::json::VectorRecord;
use crate::linalg::{cis, fourier_matrix, TorusVector, UnitaryMatrix, C64, ONE};
use crate::projector::{polish, run_from, SearchConfig};
use crate::rng::start_vector;

/// Default phase grid of orbit membership.
pub const QUANTIZE_TOL: f64 = 1e-9;
/// Default census threshold between orbits.
pub const CENSUS_TAU: f64 = 1e-5;
/// Largest `n - ||F u||_1` accepted for orbit closure.
const ORBIT_INPUT_LIMIT: f64 = 1e-6;
/// Largest `| |(F u)_k| - 1 |` tolerated by the Fourier generator.
const FOURIER_TORUS_LIMIT: f64 = 1e-6;
/// Starts evaluated per parallel batch in the census.
const CENSUS_BATCH: usize = 64;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn euler_phi(n: u64) -> u64 {
    (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64
}

/// `|G_n| = 4 n^2 phi(n)`.
pub fn group_order(n: usize) -> usize {
    4 * n * n * euler_phi(n as u64) as usize
}

fn is_prime(p: u64) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

/// `e^{2 pi i e / n}` with `e` reduced mod `n`.
fn unit_root(e: i64, n: usize) -> C64 {
    let r = e.rem_euclid(n as i64);
    cis(TAU * r as f64 / n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Gauss,
    Bjorck,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SequenceParams {
    Gauss {
        lambda: u64,
        mu: u64,
        c: [f64; 2],
    },
    /// `p mod 4` selects the coefficient pattern.
    Bjorck {
        p: u64,
        residue_class: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnownSequence {
    pub kind: SequenceKind,
    pub n: usize,
    pub params: SequenceParams,
    pub vector: TorusVector,
}

/// `u_k = c e^{2 pi i (lambda k^2 + mu k)/n}` for odd `n`, with `lambda/2` in place of
/// `lambda` for even `n`.
pub fn gauss_sequence(n: usize, lambda: u64, mu: u64, c: C64) -> Result<KnownSequence> {
    let nn = n as u64;
    if n == 0 || lambda >= nn || mu >= nn || gcd(lambda, nn) != 1 {
        return Err(BiuniError::Parameter(format!(
            "invalid Gauss parameters n={n}, lambda={lambda}, mu={mu}"
        )));
    }
    if (c.norm() - 1.0).abs() > 1e-12 {
        return Err(BiuniError::NotUnimodular {
            index: 0,
            modulus: c.norm(),
        });
    }
    let entries = (0..nn as i64)
        .map(|k| {
            let (l, m) = (lambda as i64, mu as i64);
            // exponent on the 2n-th roots keeps the even case integral
            let e = if n % 2 == 1 {
                2 * (l * k * k + m * k)
            } else {
                l * k * k + 2 * m * k
            };
            c * unit_root(e.rem_euclid(2 * n as i64), 2 * n)
        })
        .collect();
    Ok(KnownSequence {
        kind: SequenceKind::Gauss,
        n,
        params: SequenceParams::Gauss {
            lambda,
            mu,
            c: [c.re, c.im],
        },
        vector: TorusVector::new(entries)?,
    })
}

/// Legendre symbol `(k / p)` for an odd prime `p` and `k` not divisible by `p`.
fn legendre(k: u64, p: u64) -> i32 {
    if (1..p).any(|x| (x * x) % p == k % p) {
        1
    } else {
        -1
    }
}

/// Björck sequence of prime length `p`: for `p = 3 mod 4`, `e^{i theta}` at the
/// quadratic non-residues; for `p = 1 mod 4`, `e^{i eta (k/p)}`. Entry 0 is 1.
pub fn bjorck_sequence(p: u64) -> Result<KnownSequence> {
    if p < 3 || !is_prime(p) {
        return Err(BiuniError::Parameter(format!(
            "Björck sequences need an odd prime, got {p}"
        )));
    }
    let pf = p as f64;
    let entries: Vec<C64> = if p % 4 == 3 {
        let c = (1.0 - pf) / (1.0 + pf);
        let e = C64::new(c, (1.0 - c * c).sqrt());
        (0..p)
            .map(|k| if k > 0 && legendre(k, p) < 0 { e } else { ONE })
            .collect()
    } else {
        let eta = (1.0 / (pf.sqrt() + 1.0)).acos();
        (0..p)
            .map(|k| {
                if k == 0 {
                    ONE
                } else {
                    cis(eta * legendre(k, p) as f64)
                }
            })
            .collect()
    };
    let vector = TorusVector::new(entries)?;
    let residual = autocorr_residual(&vector);
    if residual > 1e-10 {
        return Err(BiuniError::Tolerance(format!(
            "Björck placement for p = {p} is not biunimodular ({residual:.3e})"
        )));
    }
    Ok(KnownSequence {
        kind: SequenceKind::Bjorck,
        n: p as usize,
        params: SequenceParams::Bjorck {
            p,
            residue_class: p % 4,
        },
        vector,
    })
}

/// `max_{i=1..n-1} |sum_k u_k conj(u_{k+i})|`.
pub fn autocorr_residual(u: &[C64]) -> f64 {
    let n = u.len();
    (1..n)
        .map(|i| {
            (0..n)
                .map(|k| u[k] * u[(k + i) % n].conj())
                .sum::<C64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

/// Residual of the cyclic `n`-roots system at `x_k = u_{k+1}/u_k`.
pub fn cyclic_root_residual(u: &[C64]) -> f64 {
    let n = u.len();
    let x: Vec<C64> = (0..n).map(|k| u[(k + 1) % n] / u[k]).collect();
    let mut worst: f64 = 0.0;
    for m in 1..n {
        let s: C64 = (0..n)
            .map(|j| (0..m).map(|t| x[(j + t) % n]).product::<C64>())
            .sum();
        worst = worst.max(s.norm());
    }
    worst.max((x.iter().product::<C64>() - ONE).norm())
}

/// Generators of the symmetry group of `Bi(F_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupElement {
    /// `y_j = u_{j+k}`.
    Shift(usize),
    /// `y_j = u_j e^{2 pi i kj/n}`.
    Modulation(usize),
    /// `y_j = u_{jk mod n}`, `k` coprime to `n`.
    Dilation(usize),
    Conjugation,
    Fourier,
}

/// Applies `g` and gauges the result to leading entry 1.
pub fn gn_action(u: &TorusVector, g: GroupElement) -> Result<TorusVector> {
    let n = u.len();
    let out: Vec<C64> = match g {
        GroupElement::Shift(k) => (0..n).map(|j| u[(j + k) % n]).collect(),
        GroupElement::Modulation(k) => (0..n)
            .map(|j| u[j] * unit_root((k * j % n) as i64, n))
            .collect(),
        GroupElement::Dilation(k) => {
            if gcd(k as u64, n as u64) != 1 {
                return Err(BiuniError::Parameter(format!(
                    "dilation {k} is not coprime to {n}"
                )));
            }
            (0..n).map(|j| u[(j * k) % n]).collect()
        }
        GroupElement::Conjugation => u.iter().map(|z| z.conj()).collect(),
        GroupElement::Fourier => {
            let w = fourier_matrix(n)?.apply(u);
            let drift = w.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
            if drift > FOURIER_TORUS_LIMIT {
                let residual = n as f64 - w.iter().map(|z| z.norm()).sum::<f64>();
                return Err(BiuniError::NotNearBiunimodular {
                    residual,
                    limit: FOURIER_TORUS_LIMIT,
                });
            }
            return Ok(crate::linalg::sign1_map(&w).gauge_first());
        }
    };
    Ok(TorusVector::from_unchecked(out).gauge_first())
}

/// Phase grid index of each entry, in `[0, 2 pi / tol)`.
fn phase_key(u: &[C64], tol: f64) -> Vec<i64> {
    let cells = (TAU / tol).round() as i64;
    u.iter()
        .map(|z| ((z.arg().rem_euclid(TAU) / tol).round() as i64).rem_euclid(cells))
        .collect()
}

/// Keys of `u` including the neighbouring cell for entries within 1% of a cell edge.
fn probe_keys(u: &[C64], tol: f64) -> Vec<Vec<i64>> {
    let cells = (TAU / tol).round() as i64;
    let base = phase_key(u, tol);
    let mut keys = vec![base.clone()];
    for (i, z) in u.iter().enumerate() {
        let q = z.arg().rem_euclid(TAU) / tol;
        let frac = q - q.round();
        if frac.abs() > 0.49 && keys.len() < 1 << 10 {
            let alt = (base[i] + frac.signum() as i64).rem_euclid(cells);
            let extra: Vec<Vec<i64>> = keys
                .iter()
                .map(|k| {
                    let mut k = k.clone();
                    k[i] = alt;
                    k
                })
                .collect();
            keys.extend(extra);
        }
    }
    keys
}

fn fnv1a(words: impl Iterator<Item = i64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    /// Member with the lexicographically smallest phase key; leading entry 1.
    pub representative: TorusVector,
    pub cardinality: usize,
    /// FNV-1a digest of the sorted quantized member keys.
    pub members_hash: u64,
    pub members: Vec<TorusVector>,
}

impl Orbit {
    pub fn n(&self) -> usize {
        self.representative.len()
    }

    /// Smallest l2 distance from `v` to a member.
    pub fn distance_to(&self, v: &TorusVector) -> f64 {
        self.members
            .iter()
            .map(|m| m.dist2(v))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Closure of `u` (polished against `F_n` first) under the group generators.
pub fn orbit_of(u: &TorusVector, quantize_tol: f64) -> Result<Orbit> {
    let n = u.len();
    if !(quantize_tol > 0.0) {
        return Err(BiuniError::Parameter(format!(
            "quantize_tol must be positive, got {quantize_tol}"
        )));
    }
    let f = fourier_matrix(n)?;
    let gap = n as f64 - crate::linalg::inf_to_1_value(&f, u)?;
    if gap > ORBIT_INPUT_LIMIT {
        return Err(BiuniError::NotNearBiunimodular {
            residual: gap,
            limit: ORBIT_INPUT_LIMIT,
        });
    }
    let start = polish(&f, u, 100)?.gauge_first();
    let limit = group_order(n);
    let mut generators = vec![
        GroupElement::Shift(1),
        GroupElement::Modulation(1),
        GroupElement::Conjugation,
        GroupElement::Fourier,
    ];
    generators.extend(
        (2..n)
            .filter(|&k| gcd(k as u64, n as u64) == 1)
            .map(GroupElement::Dilation),
    );

    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut members = vec![start.clone()];
    seen.insert(phase_key(&start, quantize_tol), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for &g in &generators {
            let image = gn_action(&members[i], g)?;
            if probe_keys(&image, quantize_tol)
                .iter()
                .any(|k| seen.contains_key(k))
            {
                continue;
            }
            if members.len() == limit {
                return Err(BiuniError::Tolerance(format!(
                    "orbit exceeds the group order {limit}; quantization {quantize_tol:e} is finer than the input accuracy"
                )));
            }
            seen.insert(phase_key(&image, quantize_tol), members.len());
            queue.push_back(members.len());
            members.push(image);
        }
    }
    let mut keys: Vec<(Vec<i64>, usize)> = seen.into_iter().collect();
    keys.sort();
    let representative = members[keys[0].1].clone();
    let members_hash = fnv1a(keys.iter().flat_map(|(k, _)| k.iter().copied()));
    Ok(Orbit {
        representative,
        cardinality: members.len(),
        members_hash,
        members,
    })
}

/// Smallest distance from a member of `o2` to the representative of `o1`.
pub fn orbit_distance(o1: &Orbit, o2: &Orbit) -> Result<f64> {
    if o1.n() != o2.n() {
        return Err(BiuniError::ShapeMismatch {
            expected: format!("length {}", o1.n()),
            got: format!("{}", o2.n()),
        });
    }
    Ok(o2.distance_to(&o1.representative))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCensus {
    pub n: usize,
    pub delta: f64,
    pub tau: f64,
    pub orbits: Vec<Orbit>,
    pub total_vectors: usize,
    pub starts_used: usize,
    pub converged_runs: usize,
}

impl OrbitCensus {
    pub fn lengths(&self) -> Vec<usize> {
        self.orbits.iter().map(|o| o.cardinality).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let orbits: Vec<_> = self
            .orbits
            .iter()
            .map(|o| {
                json!({
                    "cardinality": o.cardinality,
                    "members_hash": format!("{:016x}", o.members_hash),
                    "representative": VectorRecord::from_slice(&o.representative),
                })
            })
            .collect();
        json!({
            "n": self.n,
            "delta": self.delta,
            "tau": self.tau,
            "orbits": orbits,
            "total": self.total_vectors,
            "starts_used": self.starts_used,
            "converged_runs": self.converged_runs,
        })
    }

    /// `orbit,cardinality,k,re,im`, one line per representative entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("orbit,cardinality,k,re,im\n");
        for (i, o) in self.orbits.iter().enumerate() {
            for (k, z) in o.representative.iter().enumerate() {
                out.push_str(&format!(
                    "{i},{},{k},{:.15},{:.15}\n",
                    o.cardinality, z.re, z.im
                ));
            }
        }
        out
    }
}

fn compare_phases(a: &TorusVector, b: &TorusVector) -> Ordering {
    let pa = phase_key(a, QUANTIZE_TOL);
    let pb = phase_key(b, QUANTIZE_TOL);
    pa.cmp(&pb)
}

/// Seeded multi-start census of `Bi(F_n)`: every converged run farther than
/// `tau` from all known orbits seeds a new orbit. Runs are evaluated in
/// parallel batches and merged in start order.
pub fn census(n: usize, cfg: &SearchConfig, tau: f64) -> Result<OrbitCensus> {
    cfg.validate()?;
    if n == 0 {
        return Err(BiuniError::InvalidDimension("census needs n >= 1".into()));
    }
    let f: UnitaryMatrix = fourier_matrix(n)?;
    let mut orbits: Vec<Orbit> = Vec::new();
    let mut converged_runs = 0;
    let mut k0 = 0;
    while k0 < cfg.max_starts {
        let k1 = (k0 + CENSUS_BATCH).min(cfg.max_starts);
        let runs: Vec<Result<Option<TorusVector>>> = (k0..k1)
            .into_par_iter()
            .map(|k| {
                let r = run_from(&f, &start_vector(n, cfg.seed, k as u64), cfg)?;
                if !r.converged {
                    return Ok(None);
                }
                Ok(Some(polish(&f, &r.vector, 100)?.gauge_first()))
            })
            .collect();
        for r in runs {
            let Some(v) = r? else { continue };
            converged_runs += 1;
            if orbits.iter().all(|o| o.distance_to(&v) > tau) {
                orbits.push(orbit_of(&v, QUANTIZE_TOL)?);
            }
        }
        k0 = k1;
    }
    orbits.sort_by(|a, b| {
        a.cardinality
            .cmp(&b.cardinality)
            .then_with(|| compare_phases(&a.representative, &b.representative))
    });
    let total_vectors = orbits.iter().map(|o| o.cardinality).sum();
    Ok(OrbitCensus {
        n,
        delta: cfg.delta,
        tau,
        orbits,
        total_vectors,
        starts_used: cfg.max_starts,
        converged_runs,
    })
}

/// Angle `theta` of the Björck coefficient for `p = 3 mod 4`.
pub fn bjorck_theta(p: u64) -> f64 {
    ((1.0 - p as f64) / (1.0 + p as f64)).acos()
}
