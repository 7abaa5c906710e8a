use serde::{Deserialize, Serialize};

use super::corner::{GEntry, GSummary};
use super::registry::IntervalRegistry;
use crate::error::{Error, Result};
use crate::linalg::Element;
use crate::scaffold::{LambdaSet, QwuElements, QwuSets, SIndex};

/// The (q, w) index lists entering 𝔊_i (0-based i). Groups are the source
/// blocks j'; the top q of the first group is left out when there is a
/// single source block, and the last q of the last group otherwise.
pub fn gi_terms(qwu: &QwuSets, i: usize) -> (Vec<SIndex>, Vec<SIndex>) {
    let kp = qwu.selection.prev_blocks(i);
    let (mut qs, mut ws) = (Vec::new(), Vec::new());
    for j in 0..qwu.selection.k[i] {
        for jp in 0..kp {
            let m = qwu.m(i, jp, j);
            let first = usize::from(jp == 0);
            let q_end = if jp + 1 == kp { m.saturating_sub(1) } else { m };
            qs.extend((first..q_end).map(|k| (i, jp, j, k)));
            ws.extend((first..m).map(|k| (i, jp, j, k)));
        }
    }
    (qs, ws)
}

/// 𝔊_i = Σ_j g_{i,j} + Σ λq + Σ λw over the index ranges of [`gi_terms`].
pub fn assemble_gi(qwu: &QwuSets, el: &QwuElements, g: &[Element], lambda: &LambdaSet, i: usize) -> Result<Element> {
    if i >= qwu.stages() || i >= lambda.values.len() {
        return Err(Error::Assembly(format!("no scaffold or Λ data for stage {}", i + 1)));
    }
    if g.len() != qwu.selection.k[i] {
        return Err(Error::Assembly(format!("stage {} needs {} g elements, {} given", i + 1, qwu.selection.k[i], g.len())));
    }
    let mut out = g[0].clone();
    for x in &g[1..] {
        out = &out + x;
    }
    let (qs, ws) = gi_terms(qwu, i);
    for idx in qs {
        out.add_assign_scaled(el.q(idx), lambda.get(idx));
    }
    for idx in ws {
        out.add_assign_scaled(el.w(idx), lambda.get(idx));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCertificate {
    pub stage: usize,
    pub norm: f64,
    /// 2^{-i-2} + 8 Σ_i λ.
    pub bound: f64,
    /// 2^{-i-1}.
    pub limit: f64,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct GeneratorBundle {
    pub generator: Element,
    pub stage_terms: Vec<Element>,
    pub certificates: Vec<StageCertificate>,
    pub g: Vec<Vec<GEntry>>,
    pub lambda: LambdaSet,
    pub registry: IntervalRegistry,
    pub n_prime: usize,
    /// Norm bound on the omitted tail Σ_{i>N'} 𝔊_i.
    pub tail_bound: f64,
}

/// 𝔊 = Σ_{i≤N'} 𝔊_i with a norm certificate per stage.
pub fn assemble_generator(
    qwu: &QwuSets,
    el: &QwuElements,
    g: Vec<Vec<GEntry>>,
    lambda: LambdaSet,
    registry: IntervalRegistry,
) -> Result<GeneratorBundle> {
    let n_prime = g.len();
    if n_prime == 0 {
        return Err(Error::Assembly("no stages to assemble".into()));
    }
    let mut stage_terms = Vec::with_capacity(n_prime);
    let mut certificates = Vec::with_capacity(n_prime);
    for (i, gi) in g.iter().enumerate() {
        let elems: Vec<Element> = gi.iter().map(|x| x.element.clone()).collect();
        let term = assemble_gi(qwu, el, &elems, &lambda, i)?;
        let norm = term.operator_norm();
        let e = i as i32 + 1;
        let bound = 2f64.powi(-e - 2) + 8.0 * lambda.stage_sum(i);
        let limit = 2f64.powi(-e - 1);
        certificates.push(StageCertificate { stage: i + 1, norm, bound, limit, holds: norm < bound && bound <= limit });
        stage_terms.push(term);
    }
    let mut generator = stage_terms[0].clone();
    for t in &stage_terms[1..] {
        generator = &generator + t;
    }
    Ok(GeneratorBundle {
        generator,
        stage_terms,
        certificates,
        g,
        lambda: lambda.truncated(n_prime),
        registry,
        n_prime,
        tail_bound: 2f64.powi(-(n_prime as i32) - 1),
    })
}

/// JSON form of a bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorExport {
    pub n_prime: usize,
    pub generator: Element,
    pub generator_norm: f64,
    pub certificates: Vec<StageCertificate>,
    pub tail_bound: f64,
    pub g: Vec<Vec<GSummary>>,
    pub lambda: LambdaSet,
    pub registry: IntervalRegistry,
}

impl GeneratorBundle {
    pub fn export(&self) -> GeneratorExport {
        GeneratorExport {
            n_prime: self.n_prime,
            generator: self.generator.clone(),
            generator_norm: self.generator.operator_norm(),
            certificates: self.certificates.clone(),
            tail_bound: self.tail_bound,
            g: self.g.iter().map(|gi| gi.iter().map(GEntry::summary).collect()).collect(),
            lambda: self.lambda.clone(),
            registry: self.registry.clone(),
        }
    }
}
