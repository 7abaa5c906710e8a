use num_complex::Complex64;

use super::element::{CMat, Element};
use crate::error::{Error, Result};

/// f(h) for a Hermitian matrix h, through its eigendecomposition.
pub fn hermitian_apply(h: &CMat, f: &dyn Fn(f64) -> f64) -> CMat {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = h.nrows();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for c in 0..n {
        let w = Complex64::new(f(eig.eigenvalues[c]), 0.0);
        for r in 0..n {
            scaled[(r, c)] *= w;
        }
    }
    scaled * v.adjoint()
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Continuous functional calculus for self-adjoint elements, applied per
/// block and sample.
pub fn functional_calculus(e: &Element, f: &dyn Fn(f64) -> f64, sa_tol: f64) -> Result<Element> {
    let dev = e.self_adjoint_deviation();
    if dev > sa_tol * e.operator_norm().max(1.0) {
        return Err(Error::NotSelfAdjoint { deviation: dev });
    }
    Ok(e.map(|m| hermitian_apply(m, f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::element::AlgebraShape;

    #[test]
    fn indicator_gives_spectral_projection() {
        let s = AlgebraShape::matrix(2);
        let mut d = CMat::zeros(2, 2);
        d[(0, 0)] = Complex64::new(1.0, 0.0);
        d[(1, 1)] = Complex64::new(2.0, 0.0);
        let e = Element::constant(&s, &[d]).unwrap();
        let p = functional_calculus(&e, &|t| if t >= 1.5 { 1.0 } else { 0.0 }, 1e-8).unwrap();
        let e22 = Element::unit(&s, 0, 1, 1);
        assert!(p.distance(&e22) < 1e-12);
        let same = functional_calculus(&e, &|t| t, 1e-8).unwrap();
        assert!(same.distance(&e) < 1e-12);
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let s = AlgebraShape::matrix(2);
        let e = Element::unit(&s, 0, 0, 1);
        assert!(matches!(functional_calculus(&e, &|t| t, 1e-8), Err(Error::NotSelfAdjoint { .. })));
    }
}
