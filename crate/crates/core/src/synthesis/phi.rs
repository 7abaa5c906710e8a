use crate::error::{Error, Result};
use crate::linalg::{Element, SpanBasis};

/// Φ([b_kl]) = Σ v_k* b_kl v_l.
pub fn phi_map(vs: &[Element], b: &[Vec<Element>]) -> Result<Element> {
    let n = vs.len();
    if n == 0 || b.len() != n || b.iter().any(|row| row.len() != n) {
        return Err(Error::Shape(format!("Φ needs an {n}x{n} matrix over the corner")));
    }
    let mut out = Element::zeros(vs[0].shape());
    for (k, row) in b.iter().enumerate() {
        let vk = vs[k].adjoint();
        for (l, x) in row.iter().enumerate() {
            if x.max_abs() == 0.0 {
                continue;
            }
            out = &out + &(&(&vk * x) * &vs[l]);
        }
    }
    Ok(out)
}

/// b_kl = v_k x v_l*.
pub fn phi_inverse(x: &Element, vs: &[Element]) -> Vec<Vec<Element>> {
    let adj: Vec<Element> = vs.iter().map(Element::adjoint).collect();
    vs.iter().map(|vk| adj.iter().map(|vl| &(vk * x) * vl).collect()).collect()
}

/// Checks the four conditions under which Φ is a *-isomorphism onto the
/// algebra generated by D and the v's: (a) common range, (b) sources
/// partition `unit`, (c) sources commute with the given D elements,
/// (d) v d v* stays in the span of D when a span is supplied.
pub fn check_map_hypotheses(vs: &[Element], unit: &Element, ds: &[Element], d_span: Option<&SpanBasis>, tol: f64) -> Result<()> {
    let fail = |condition: char, deviation: f64| -> Result<()> {
        if deviation > tol {
            Err(Error::Hypothesis { condition, deviation })
        } else {
            Ok(())
        }
    };
    let v1 = &vs[0];
    let mut dev = v1.distance(&(v1 * &v1.adjoint()));
    for v in vs {
        dev = dev.max((v * &v.adjoint()).distance(v1));
    }
    fail('a', dev)?;

    let sources: Vec<Element> = vs.iter().map(|v| &v.adjoint() * v).collect();
    let mut dev = 0.0f64;
    let mut sum = Element::zeros(unit.shape());
    for (k, s) in sources.iter().enumerate() {
        sum = &sum + s;
        for t in &sources[..k] {
            dev = dev.max((s * t).operator_norm());
        }
    }
    fail('b', dev.max(sum.distance(unit)))?;

    let mut dev = 0.0f64;
    for s in &sources {
        for d in ds {
            dev = dev.max((&(s * d) - &(d * s)).operator_norm());
        }
    }
    fail('c', dev)?;

    if let Some(span) = d_span {
        let mut dev = 0.0f64;
        for v in vs {
            for d in ds {
                dev = dev.max(span.distance(&(&(v * d) * &v.adjoint()))?);
            }
        }
        fail('d', dev)?;
    }
    Ok(())
}
