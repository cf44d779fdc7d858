//! Biunimodular vectors of unitary matrices.
//!
//! A vector `v` with unimodular entries is biunimodular for a unitary `A` when
//! `Av` is unimodular too. The crate searches for such vectors by alternating
//! projections, factorizes unitaries through them, and classifies the Fourier
//! case into symmetry orbits.

// Negated comparisons reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod factorizer;
pub mod fourier;
pub mod linalg;
pub mod manifold;
pub mod projector;
pub mod rng;

pub use error::{BiuniError, Result};
