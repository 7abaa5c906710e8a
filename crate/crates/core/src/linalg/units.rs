use serde::{Deserialize, Serialize};

use super::element::Element;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixUnitReport {
    pub pass: bool,
    pub max_violation: f64,
    /// (s, t, u, v) of the worst product, or None when an adjoint or the
    /// sum rule was worst.
    pub worst_product: Option<(usize, usize, usize, usize)>,
    pub tolerance: f64,
}

/// Check e_{s,t} e_{u,v} = δ_{t,u} e_{s,v}, e_{s,t}* = e_{t,s} and
/// Σ_t e_{t,t} = `unit` for a square family `units[s][t]`.
pub fn check_matrix_unit_axioms(units: &[Vec<Element>], unit: &Element, tol: f64) -> MatrixUnitReport {
    let n = units.len();
    let mut worst = 0.0f64;
    let mut worst_product = None;
    let zero = Element::zeros(unit.shape());
    for s in 0..n {
        for t in 0..n {
            let adj = units[s][t].adjoint().distance(&units[t][s]);
            if adj > worst {
                worst = adj;
                worst_product = None;
            }
            for u in 0..n {
                for v in 0..n {
                    let lhs = &units[s][t] * &units[u][v];
                    let rhs = if t == u { &units[s][v] } else { &zero };
                    let d = lhs.distance(rhs);
                    if d > worst {
                        worst = d;
                        worst_product = Some((s, t, u, v));
                    }
                }
            }
        }
    }
    let mut diag = zero.clone();
    for (t, row) in units.iter().enumerate() {
        diag = &diag + &row[t];
    }
    let d = diag.distance(unit);
    if d > worst {
        worst = d;
        worst_product = None;
    }
    MatrixUnitReport { pass: worst <= tol, max_violation: worst, worst_product, tolerance: tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::element::AlgebraShape;
    use num_complex::Complex64;

    fn canonical(n: usize) -> (Vec<Vec<Element>>, Element) {
        let s = AlgebraShape::matrix(n);
        let units = (0..n).map(|a| (0..n).map(|b| Element::unit(&s, 0, a, b)).collect()).collect();
        (units, Element::identity(&s))
    }

    #[test]
    fn canonical_units_pass() {
        for n in [1, 2, 3] {
            let (u, one) = canonical(n);
            assert!(check_matrix_unit_axioms(&u, &one, 1e-10).pass);
        }
    }

    #[test]
    fn perturbed_unit_fails_with_its_size() {
        let (mut u, one) = canonical(2);
        u[0][1].get_mut(0, 0)[(0, 1)] += Complex64::new(1e-3, 0.0);
        let r = check_matrix_unit_axioms(&u, &one, 1e-10);
        assert!(!r.pass);
        assert!((r.max_violation - 1e-3).abs() < 1e-4);
    }
}
