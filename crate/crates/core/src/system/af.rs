use serde::{Deserialize, Serialize};

use super::snapshot::SystemSnapshot;
use crate::error::Result;
use crate::linalg::{word_closure, ClosurePolicy, Element, SpanBasis};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AfActionReport {
    pub closure_dimension: usize,
    pub ambient_dimension: usize,
    pub generates: bool,
    pub max_commutator: f64,
    pub commutes: bool,
    pub max_conjugate_distance: f64,
    pub conjugates_in_d: bool,
    pub d_span_dimension: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// The span of the full D enumeration together with D_0, at the last stage.
pub fn d_span(snap: &SystemSnapshot, policy: &ClosurePolicy) -> Result<SpanBasis> {
    let mut gens: Vec<Element> = snap
        .build_d_generators(snap.d_supply())?
        .into_iter()
        .map(|d| d.element)
        .collect();
    gens.extend(snap.diagonal_units());
    word_closure(&gens, policy)
}

/// Checks at the last stage that the matrix units and D generators generate
/// everything, that D commutes with the diagonal units, and that conjugating
/// a D generator by any matrix unit stays in the span of D.
pub fn verify_af_action(snap: &SystemSnapshot, policy: &ClosurePolicy, commutator_tol: f64, tol: f64) -> Result<AfActionReport> {
    let n = snap.depth();
    let ambient = snap.ambient();
    let mut gens: Vec<Element> = Vec::new();
    for (j, &size) in snap.stages[n - 1].sizes.iter().enumerate() {
        for k in 0..size {
            gens.push(snap.unit(n, j, 0, k));
        }
    }
    gens.extend(snap.d_generators.iter().map(|d| d.element.clone()));
    let closure = word_closure(&gens, policy)?;

    let d0 = snap.diagonal_units();
    let mut max_commutator = 0.0f64;
    for d in &snap.d_generators {
        for p in &d0 {
            let c = &(&d.element * p) - &(p * &d.element);
            max_commutator = max_commutator.max(c.operator_norm());
        }
    }

    let span = d_span(snap, policy)?;
    let mut max_conjugate_distance = 0.0f64;
    for (si, st) in snap.stages.iter().enumerate() {
        for (j, &size) in st.sizes.iter().enumerate() {
            for r in 0..size {
                for c in 0..size {
                    let v = snap.unit(si + 1, j, r, c);
                    let vs = v.adjoint();
                    for d in &snap.d_generators {
                        let conj = &(&v * &d.element) * &vs;
                        max_conjugate_distance = max_conjugate_distance.max(span.distance(&conj)?);
                    }
                }
            }
        }
    }
    let generates = closure.dimension() == ambient.flat_len();
    let commutes = max_commutator <= commutator_tol;
    let conjugates_in_d = max_conjugate_distance <= tol;
    Ok(AfActionReport {
        closure_dimension: closure.dimension(),
        ambient_dimension: ambient.flat_len(),
        generates,
        max_commutator,
        commutes,
        max_conjugate_distance,
        conjugates_in_d,
        d_span_dimension: span.dimension(),
        tolerance: tol,
        pass: generates && commutes && conjugates_in_d,
    })
}
