use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{word_closure, ClosurePolicy, Element};
use crate::report::{Check, VerificationReport, Worst};
use crate::scaffold::QwuSets;
use crate::synthesis::GeneratorBundle;
use crate::system::SystemSnapshot;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleGeneration {
    pub closure_dimension: usize,
    pub ambient_dimension: usize,
    pub targets: usize,
    pub worst_distance: f64,
}

/// Targets for a run of length N': all matrix units of the selected stages
/// s_1 … s_{N'} and the D generators d_1 … d_{N'}.
pub fn generation_targets(snap: &SystemSnapshot, qwu: &QwuSets, n_prime: usize) -> Vec<(String, Element)> {
    let mut out = Vec::new();
    for &st in qwu.selection.s.iter().take(n_prime) {
        for (j, &n) in snap.stages[st - 1].sizes.iter().enumerate() {
            for a in 0..n {
                for b in 0..n {
                    out.push((format!("stage {st} unit ({}, {a}, {b})", j + 1), snap.unit(st, j, a, b)));
                }
            }
        }
    }
    for (i, d) in snap.d_generators.iter().take(n_prime).enumerate() {
        out.push((format!("d_{}", i + 1), d.element.clone()));
    }
    out
}

/// Word closure of {𝔊} against the targets.
pub fn verify_single_generation(
    bundle: &GeneratorBundle,
    snap: &SystemSnapshot,
    qwu: &QwuSets,
    policy: &ClosurePolicy,
    eps: f64,
) -> Result<(VerificationReport, SingleGeneration)> {
    let span = word_closure(std::slice::from_ref(&bundle.generator), policy)?;
    let targets = generation_targets(snap, qwu, bundle.n_prime);
    let mut worst = Worst::default();
    for (name, t) in &targets {
        worst.update(span.distance(t)? / t.operator_norm().max(1.0), || name.clone());
    }
    let summary = SingleGeneration {
        closure_dimension: span.dimension(),
        ambient_dimension: snap.ambient().flat_len(),
        targets: targets.len(),
        worst_distance: worst.value,
    };
    let mut rep = VerificationReport::default();
    let c = worst.check("single_generation", "main", eps);
    let at = c.detail.clone().unwrap_or_default();
    rep.push(c.with_detail(format!(
        "closure dimension {} of {}; {} targets; {at}",
        summary.closure_dimension, summary.ambient_dimension, summary.targets
    )));
    rep.push(Check::flag("single_generation.nonzero", "main", bundle.generator.operator_norm() > 0.0));
    Ok((rep, summary))
}
