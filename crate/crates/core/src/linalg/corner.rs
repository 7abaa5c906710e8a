//! Spectra of elements inside a corner eB e cut out by a diagonal projection.

use num_complex::Complex64;

use super::element::{CMat, Element};
use super::funcalc::hermitian_eigenvalues;
use super::schur::eigenvalues;
use crate::error::{Error, Result};

/// Principal submatrices of `a` on the range of the diagonal projection `e`,
/// one per block and sample (empty ranges are skipped).
pub fn compress(a: &Element, e: &Element) -> Result<Vec<CMat>> {
    if a.shape() != e.shape() {
        return Err(Error::Shape("corner projection has a different shape".into()));
    }
    let mut out = Vec::new();
    for (j, blk) in e.data().iter().enumerate() {
        for (x, p) in blk.iter().enumerate() {
            let idx: Vec<usize> = (0..p.nrows()).filter(|&r| p[(r, r)].re > 0.5).collect();
            if idx.is_empty() {
                continue;
            }
            let m = a.get(j, x);
            out.push(CMat::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]));
        }
    }
    Ok(out)
}

/// Eigenvalues of a self-adjoint `a` inside the corner of `e`, ascending.
pub fn corner_eigenvalues(a: &Element, e: &Element) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = compress(a, e)?.iter().flat_map(hermitian_eigenvalues).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Eigenvalues of an arbitrary `a` inside the corner of `e`.
pub fn corner_spectrum(a: &Element, e: &Element) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for m in compress(a, e)? {
        out.extend(eigenvalues(&m)?);
    }
    Ok(out)
}

/// Eigenvalues of `a` over the whole algebra.
pub fn spectrum_all(a: &Element) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for blk in a.data() {
        for m in blk {
            out.extend(eigenvalues(m)?);
        }
    }
    Ok(out)
}
