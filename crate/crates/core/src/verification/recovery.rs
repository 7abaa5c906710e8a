use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{word_closure, Cluster, ClosurePolicy, Element};
use crate::report::{VerificationReport, Worst};
use crate::scaffold::{QwuElements, QwuSets, SIndex};
use crate::synthesis::GeneratorBundle;
use crate::system::SystemSnapshot;

use super::upt::LexOrder;

/// Relative separation used for each extraction cluster.
pub const CLUSTER_SEPARATION: f64 = 0.05;

/// One cluster per element of R in lex order: the registry interval of
/// g_{r,s} for q_{r;1,s,1}, and the single point λ otherwise.
pub fn extraction_clusters(bundle: &GeneratorBundle, order: &LexOrder) -> Result<Vec<(Cluster, f64)>> {
    order
        .indices
        .iter()
        .map(|&(r, sp, s, t)| {
            if sp == 0 && t == 0 {
                let e = bundle
                    .registry
                    .entry(r, s)
                    .ok_or_else(|| Error::Assembly(format!("no registry interval for g_{},{}", r + 1, s + 1)))?;
                Ok((Cluster::Interval { lo: e.lo, hi: e.hi }, CLUSTER_SEPARATION * e.lo))
            } else {
                let l = bundle.lambda.get((r, sp, s, t));
                Ok((Cluster::Points(vec![Complex64::new(l, 0.0)]), CLUSTER_SEPARATION * l))
            }
        })
        .collect()
}

/// Elements read back out of 𝔊 and the extracted projections.
#[derive(Clone, Debug)]
pub struct Recovered {
    pub g: Vec<Vec<Element>>,
    pub w: BTreeMap<SIndex, Element>,
}

/// Reads g_{r,s} and every w_{r;s',s,t} back from 𝔊, the extracted
/// projections `q_hat` (in lex order) and Λ, and compares them with the
/// scaffold. Finishes with d_r against the algebra of U_{r,·} and the
/// recovered g's.
pub fn recover_scaffold(
    bundle: &GeneratorBundle,
    qwu: &QwuSets,
    el: &QwuElements,
    q_hat: &[Element],
    snap: &SystemSnapshot,
    policy: &ClosurePolicy,
    tol: f64,
    membership_tol: f64,
) -> Result<(VerificationReport, Recovered)> {
    let order = LexOrder::new(qwu, el);
    if q_hat.len() != order.len() {
        return Err(Error::Shape(format!("{} extracted projections for {} indices", q_hat.len(), order.len())));
    }
    let hat: BTreeMap<SIndex, &Element> = order.indices.iter().copied().zip(q_hat).collect();
    let gen = &bundle.generator;
    let sel = &qwu.selection;
    let mut rep = VerificationReport::default();
    let (mut wq, mut wg, mut ww) = (Worst::default(), Worst::default(), Worst::default());
    for (idx, p) in &hat {
        wq.update(p.distance(el.q(*idx)), || format!("{idx:?}"));
    }
    let mut rec = Recovered { g: Vec::new(), w: BTreeMap::new() };
    for r in 0..bundle.n_prime {
        let kp = sel.prev_blocks(r);
        let mut gr = Vec::new();
        for s in 0..sel.k[r] {
            let q0 = hat[&(r, 0, s, 0)];
            let g_hat = &(q0 * gen) * q0;
            wg.update(g_hat.distance(&bundle.g[r][s].element), || format!("g_{},{}", r + 1, s + 1));
            let row = &(q0 * gen) - &g_hat;
            let terminal = (r, kp - 1, s, qwu.m(r, kp - 1, s) - 1);
            let mut acc = row.clone();
            for jp in 0..kp {
                for k in 0..qwu.m(r, jp, s) {
                    let idx = (r, jp, s, k);
                    if idx == terminal {
                        continue;
                    }
                    let w = if jp == 0 && k == 0 { q0.clone() } else { (&row * hat[&idx]).scale(1.0 / bundle.lambda.get(idx)) };
                    if !(jp == 0 && k == 0) {
                        acc.add_assign_scaled(&w, -bundle.lambda.get(idx));
                    }
                    ww.update(w.distance(el.w(idx)), || format!("{idx:?}"));
                    rec.w.insert(idx, w);
                }
            }
            let w_t = acc.scale(1.0 / bundle.lambda.get(terminal));
            ww.update(w_t.distance(el.w(terminal)), || format!("{terminal:?} (terminal)"));
            rec.w.insert(terminal, w_t);
            gr.push(g_hat);
        }
        rec.g.push(gr);
    }
    rep.push(wq.check("recovery.q", "extraction", tol.max(1e-6)));
    rep.push(wg.check("recovery.g", "qGq", tol));
    rep.push(ww.check("recovery.w", "qG", tol));

    let mut wd = Worst::default();
    for (r, gr) in rec.g.iter().enumerate() {
        let mut gens: Vec<Element> = el.u[r].iter().flatten().cloned().collect();
        gens.extend(gr.iter().cloned());
        let span = word_closure(&gens, policy)?;
        wd.update(span.distance(&snap.d_generators[r].element)?, || format!("d_{}", r + 1));
    }
    rep.push(wd.check("recovery.d", "G3", membership_tol));
    Ok((rep, rec))
}
