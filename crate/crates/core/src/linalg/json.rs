//! JSON records for matrices and vectors.
//!
//! Matrices: `{"n": rows, "m": cols, "re": [[..]], "im": [[..]]}`.
//! Vectors: `{"re": [..], "im": [..]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, TorusVector, UnitaryMatrix, C64};
use crate::error::{BiuniError, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixRecord {
    pub n: usize,
    pub m: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VectorRecord {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixRecord {
    pub fn from_matrix(a: &ComplexMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..a.rows())
                .map(|j| a.row(j).iter().map(f).collect())
                .collect()
        };
        Self {
            n: a.rows(),
            m: a.cols(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.re.len() != self.n || self.im.len() != self.n {
            return Err(BiuniError::Format(format!(
                "expected {} rows, found re: {} im: {}",
                self.n,
                self.re.len(),
                self.im.len()
            )));
        }
        let mut data = Vec::with_capacity(self.n * self.m);
        for (j, (r, i)) in self.re.iter().zip(&self.im).enumerate() {
            if r.len() != self.m || i.len() != self.m {
                return Err(BiuniError::Format(format!(
                    "row {j} has {} real and {} imaginary entries, expected {}",
                    r.len(),
                    i.len(),
                    self.m
                )));
            }
            data.extend(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)));
        }
        ComplexMatrix::from_row_major(self.n, self.m, data)
    }
}

impl VectorRecord {
    pub fn from_slice(v: &[C64]) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_entries(&self) -> Result<Vec<C64>> {
        if self.re.len() != self.im.len() {
            return Err(BiuniError::Format(format!(
                "re has {} entries, im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&a, &b)| C64::new(a, b))
            .collect())
    }

    pub fn to_torus(&self) -> Result<TorusVector> {
        TorusVector::new(self.to_entries()?)
    }
}

pub fn matrix_to_json(a: &ComplexMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixRecord::from_matrix(a)).expect("matrix record serializes")
}

pub fn vector_to_json(v: &[C64]) -> serde_json::Value {
    serde_json::to_value(VectorRecord::from_slice(v)).expect("vector record serializes")
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let rec: MatrixRecord = serde_json::from_str(text)?;
    rec.to_matrix()
}

pub fn parse_vector(text: &str) -> Result<TorusVector> {
    let rec: VectorRecord = serde_json::from_str(text)?;
    rec.to_torus()
}

/// Reads a matrix file and validates unitarity at `tol`.
pub fn read_unitary(path: &Path, tol: f64) -> Result<UnitaryMatrix> {
    let text = std::fs::read_to_string(path)?;
    UnitaryMatrix::with_tolerance(parse_matrix(&text)?, tol)
}

pub fn write_matrix(path: &Path, a: &ComplexMatrix) -> Result<()> {
    let text = serde_json::to_string_pretty(&MatrixRecord::from_matrix(a))?;
    std::fs::write(path, text)?;
    Ok(())
}
