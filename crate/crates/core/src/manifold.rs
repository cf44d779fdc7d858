//! Rank and dimension diagnostics of the factorization map, and the U(3)
//! region grids over the phase square `[-pi, pi]^2`.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BiuniError, Result};
use crate::linalg::{cis, singular_values, ComplexMatrix, UnitaryMatrix, C64, I, ONE};

/// Singular values below `RANK_CUTOFF * largest` count as zero.
pub const RANK_CUTOFF: f64 = 1e-9;
/// `||S1 - 1||_2` accepted as membership in the fixer of `1`.
const FIX_TOL: f64 = 1e-8;
/// Slack in `|Au(j)|^2 >= 1`.
const REGION_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub im_rank: usize,
    pub jac_rank: usize,
    pub full_rank: bool,
    pub tolerance: f64,
}

/// Numerical rank with a relative cutoff.
pub fn numerical_rank(m: &ComplexMatrix, tol: f64) -> Result<usize> {
    let sigma = singular_values(m)?;
    let top = sigma.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sigma.iter().filter(|&&s| s >= tol * top).count())
}

fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |j, k| C64::new(data[j * cols + k], 0.0))
}

/// Rank of `Im(S)` and the derived Jacobian rank `(n-1)^2 + n + rank Im(S)`.
pub fn im_rank(s: &UnitaryMatrix, tol: f64) -> Result<RankReport> {
    let n = s.n();
    let image = s.apply(&vec![ONE; n]);
    let gap = image
        .iter()
        .map(|z| (z - ONE).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if gap > FIX_TOL {
        return Err(BiuniError::Parameter(format!(
            "S does not fix the ones vector (||S1 - 1|| = {gap:.3e})"
        )));
    }
    let im_rank = numerical_rank(&real_matrix(n, n, &s.imag_part()), tol)?;
    let jac_rank = (n - 1) * (n - 1) + n + im_rank;
    Ok(RankReport {
        im_rank,
        jac_rank,
        full_rank: jac_rank == n * n,
        tolerance: tol,
    })
}

/// `S = J/n + i P (I - J/n)` with `P` the cyclic shift and `J` all-ones:
/// fixes `1` and has `Im(S)` of rank `n - 1`.
pub fn full_rank_witness(n: usize) -> Result<UnitaryMatrix> {
    if n < 2 {
        return Err(BiuniError::InvalidDimension("witness needs n >= 2".into()));
    }
    let inv = 1.0 / n as f64;
    let s = ComplexMatrix::from_fn(n, n, |j, k| {
        let shift = if (j + 1) % n == k { 1.0 } else { 0.0 };
        C64::new(inv, 0.0) + I * (shift - inv)
    });
    let s = UnitaryMatrix::new(s)?;
    let report = im_rank(&s, RANK_CUTOFF)?;
    if report.im_rank != n - 1 || !report.full_rank {
        return Err(BiuniError::Tolerance(format!(
            "witness rank {} for n = {n}",
            report.im_rank
        )));
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhasingReport {
    pub manifold_dim: usize,
    pub stabilizer_dim: usize,
}

/// Rank of `(x, y) -> i diag(x) A + A i diag(0, y)` on `R^n x R^{n-1}`.
pub fn phasing_dim(a: &UnitaryMatrix, tol: f64) -> Result<PhasingReport> {
    let n = a.n();
    let params = 2 * n - 1;
    let rows = 2 * n * n;
    let mut data = vec![0.0; rows * params];
    let mut put = |col: usize, j: usize, k: usize, z: C64| {
        let idx = j * n + k;
        data[(2 * idx) * params + col] = z.re;
        data[(2 * idx + 1) * params + col] = z.im;
    };
    for j in 0..n {
        for k in 0..n {
            put(j, j, k, I * a[(j, k)]);
        }
    }
    for k in 1..n {
        for j in 0..n {
            put(n + k - 1, j, k, I * a[(j, k)]);
        }
    }
    let manifold_dim = numerical_rank(&real_matrix(rows, params, &data), tol)?;
    Ok(PhasingReport {
        manifold_dim,
        stabilizer_dim: params - manifold_dim,
    })
}

/// What the region grid evaluates.
#[derive(Clone, Debug)]
pub enum RegionSource<'a> {
    /// `R_j = {(x,y): |(A u_xy)_j| >= 1}` with `u_xy = (1, e^{ix}, e^{iy})`.
    Matrix(&'a UnitaryMatrix),
    /// The single region `s cos x + t cos y + cos(x - y) >= 0`.
    Est { s: f64, t: f64 },
}

/// Boolean grids over `[-pi, pi)^2`; point `(r, c)` sits at
/// `x = -pi + 2 pi c / res`, `y = -pi + 2 pi r / res`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionGrid {
    pub resolution: usize,
    pub regions: Vec<Vec<bool>>,
}

pub fn grid_coord(index: usize, resolution: usize) -> f64 {
    -PI + 2.0 * PI * index as f64 / resolution as f64
}

pub fn region_grid(a: &UnitaryMatrix, resolution: usize) -> Result<RegionGrid> {
    region_grid_from(&RegionSource::Matrix(a), resolution)
}

pub fn region_grid_from(source: &RegionSource<'_>, resolution: usize) -> Result<RegionGrid> {
    if resolution < 16 {
        return Err(BiuniError::Parameter(format!(
            "resolution {resolution} < 16"
        )));
    }
    let res = resolution;
    match source {
        RegionSource::Matrix(a) => {
            if a.n() != 3 {
                return Err(BiuniError::InvalidDimension(format!(
                    "region grid needs a 3x3 matrix, got {}",
                    a.n()
                )));
            }
            let rows: Vec<[Vec<bool>; 3]> = (0..res)
                .into_par_iter()
                .map(|r| {
                    let ey = cis(grid_coord(r, res));
                    let mut out = [vec![false; res], vec![false; res], vec![false; res]];
                    for c in 0..res {
                        let w = a.apply(&[ONE, cis(grid_coord(c, res)), ey]);
                        for (region, wj) in out.iter_mut().zip(&w) {
                            region[c] = wj.norm_sqr() >= 1.0 - REGION_SLACK;
                        }
                    }
                    out
                })
                .collect();
            let mut regions: Vec<Vec<bool>> =
                (0..3).map(|_| Vec::with_capacity(res * res)).collect();
            for row in rows {
                for (j, part) in row.into_iter().enumerate() {
                    regions[j].extend(part);
                }
            }
            let grid = RegionGrid {
                resolution: res,
                regions,
            };
            if let Some(miss) = grid.uncovered() {
                return Err(BiuniError::Tolerance(format!(
                    "grid point {miss} lies in no region"
                )));
            }
            Ok(grid)
        }
        RegionSource::Est { s, t } => {
            let region = (0..res * res)
                .into_par_iter()
                .map(|i| {
                    let (x, y) = (grid_coord(i % res, res), grid_coord(i / res, res));
                    s * x.cos() + t * y.cos() + (x - y).cos() >= 0.0
                })
                .collect();
            Ok(RegionGrid {
                resolution: res,
                regions: vec![region],
            })
        }
    }
}

impl RegionGrid {
    /// First grid index outside every region.
    pub fn uncovered(&self) -> Option<usize> {
        (0..self.resolution * self.resolution).find(|&i| !self.regions.iter().any(|g| g[i]))
    }

    /// Cells (periodic) whose four corners disagree on membership in every region.
    pub fn boundary_cells(&self) -> Vec<bool> {
        let res = self.resolution;
        (0..res * res)
            .map(|i| {
                let (r, c) = (i / res, i % res);
                let corners = [
                    r * res + c,
                    r * res + (c + 1) % res,
                    ((r + 1) % res) * res + c,
                    ((r + 1) % res) * res + (c + 1) % res,
                ];
                self.regions.iter().all(|g| {
                    let first = g[corners[0]];
                    corners.iter().any(|&k| g[k] != first)
                })
            })
            .collect()
    }

    /// Connected components (8-neighbour, periodic) of cells where all region boundaries meet.
    pub fn triple_boundary_clusters(&self) -> usize {
        let res = self.resolution as isize;
        let marked = self.boundary_cells();
        let mut seen = vec![false; marked.len()];
        let mut clusters = 0;
        let wrap = |v: isize| v.rem_euclid(res) as usize;
        for start in 0..marked.len() {
            if !marked[start] || seen[start] {
                continue;
            }
            clusters += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                let (r, c) = ((i as isize) / res, (i as isize) % res);
                for dr in -1..=1 {
                    for dc in -1..=1 {
                        let k = wrap(r + dr) * res as usize + wrap(c + dc);
                        if marked[k] && !seen[k] {
                            seen[k] = true;
                            queue.push_back(k);
                        }
                    }
                }
            }
        }
        clusters
    }

    /// `x,y,r1,r2,r3` (one column per region) with a header row.
    pub fn to_csv(&self) -> String {
        let res = self.resolution;
        let mut out = String::from("x,y");
        for j in 0..self.regions.len() {
            let _ = write!(out, ",r{}", j + 1);
        }
        out.push('\n');
        for i in 0..res * res {
            let _ = write!(
                out,
                "{:.9},{:.9}",
                grid_coord(i % res, res),
                grid_coord(i / res, res)
            );
            for g in &self.regions {
                out.push_str(if g[i] { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }

    /// Binary PGM of one region, 255 inside, top row at `y = -pi`.
    pub fn to_pgm(&self, region: usize) -> Result<Vec<u8>> {
        let g = self
            .regions
            .get(region)
            .ok_or_else(|| BiuniError::Parameter(format!("region {region} out of range")))?;
        let mut out = format!("P5\n{} {}\n255\n", self.resolution, self.resolution).into_bytes();
        out.extend(g.iter().map(|&b| if b { 255u8 } else { 0u8 }));
        Ok(out)
    }
}
