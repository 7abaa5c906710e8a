//! Numerical *-algebra kernel.

pub mod closure;
pub mod corner;
pub mod element;
pub mod funcalc;
pub mod schur;
pub mod units;

pub use corner::{compress, corner_eigenvalues, corner_spectrum, spectrum_all};
pub use closure::{distance_to_span, word_closure, ClosurePolicy, ClosureStats, SpanBasis};
pub use element::{AlgebraShape, BlockShape, CMat, Element};
pub use funcalc::{functional_calculus, hermitian_apply, hermitian_eigenvalues};
pub use schur::{eigenvalues, riesz_projection, schur, spectral_subspace_projection, Cluster, Schur};
pub use units::{check_matrix_unit_axioms, MatrixUnitReport};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalue multiset of one (block, sample) matrix.
pub fn spectrum(e: &Element, block: usize, sample: usize) -> Result<Vec<Complex64>> {
    let b = e
        .shape()
        .blocks
        .get(block)
        .ok_or_else(|| Error::Shape(format!("block {block} does not exist")))?;
    if sample >= b.samples {
        return Err(Error::Shape(format!("sample {sample} does not exist in block {block}")));
    }
    eigenvalues(e.get(block, sample))
}
