//! Effectiveness experiment: multi-start search on seeded Haar-random unitaries.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BiuniError, Result};
use crate::linalg::haar_random_unitary;
use crate::projector::{multi_start_search, SearchConfig};
use crate::rng::mix_seed;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub matrices_per_dim: usize,
    pub delta: f64,
    pub max_starts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dims: vec![3, 5, 10, 25],
            matrices_per_dim: 100,
            delta: 1e-10,
            max_starts: 1_000,
            max_iters: 10_000,
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(BiuniError::Parameter(
                "dims must be non-empty and positive".into(),
            ));
        }
        if self.matrices_per_dim == 0 || self.max_starts == 0 || self.max_iters == 0 {
            return Err(BiuniError::Parameter("counts must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta <= 0.125) {
            return Err(BiuniError::Parameter(format!(
                "delta must lie in (0, 1/8], got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub dim: usize,
    pub successes: usize,
    pub avg_starts: f64,
    pub max_starts_used: usize,
    /// Seconds; hardware-dependent.
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,successes,avg_starts,max_starts_used,wall_time\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.4},{},{:.3}\n",
                r.dim, r.successes, r.avg_starts, r.max_starts_used, r.wall_time
            ));
        }
        out
    }

    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.config == other.config
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                (a.dim, a.successes, a.max_starts_used) == (b.dim, b.successes, b.max_starts_used)
                    && a.avg_starts == b.avg_starts
            })
    }
}

/// One row per dimension; matrix `k` of dimension `d` and its starts are seeded
/// from `(seed, d, k)` only, so results do not depend on the worker count.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.dims.len());
    for &dim in &cfg.dims {
        let t0 = Instant::now();
        let outcomes: Vec<Result<(bool, usize)>> = (0..cfg.matrices_per_dim)
            .into_par_iter()
            .map(|k| {
                let matrix_seed = mix_seed(&[cfg.seed, dim as u64, k as u64, 0]);
                let a = haar_random_unitary(dim, matrix_seed)?;
                let search = SearchConfig::new(
                    cfg.delta,
                    cfg.max_iters,
                    cfg.max_starts,
                    mix_seed(&[cfg.seed, dim as u64, k as u64, 1]),
                )?;
                let r = multi_start_search(&a, &search)?;
                Ok((r.converged, r.starts_used))
            })
            .collect();
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let successes = outcomes.iter().filter(|o| o.0).count();
        let total: usize = outcomes.iter().map(|o| o.1).sum();
        rows.push(BenchRow {
            dim,
            successes,
            avg_starts: total as f64 / outcomes.len() as f64,
            max_starts_used: outcomes.iter().map(|o| o.1).max().unwrap_or(0),
            wall_time: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(BenchReport {
        config: cfg.clone(),
        rows,
    })
}
