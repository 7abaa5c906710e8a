use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{corner_spectrum, spectral_subspace_projection, Cluster, Element};
use crate::report::{Check, VerificationReport, Worst};
use crate::scaffold::{QwuElements, QwuSets, SIndex};

/// R in lexicographic order together with the projections p_1, p_2, ….
#[derive(Clone, Debug)]
pub struct LexOrder {
    pub indices: Vec<SIndex>,
    pub projections: Vec<Element>,
}

impl LexOrder {
    pub fn new(qwu: &QwuSets, el: &QwuElements) -> Self {
        let indices = qwu.r_indices();
        let projections = indices.iter().map(|&i| el.q(i).clone()).collect();
        LexOrder { indices, projections }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Every p_{n+1} is the smallest element of R not yet listed.
    pub fn is_successor_order(&self) -> bool {
        (0..self.indices.len()).all(|n| self.indices[n..].iter().all(|q| self.indices[n] <= *q))
            && self.indices.windows(2).all(|w| w[0] < w[1])
    }

    /// P_n = p_1 + … + p_n for n = 0..=len.
    pub fn partial_sums(&self) -> Vec<Element> {
        let shape = self.projections.first().map(|p| p.shape().clone());
        let mut out = Vec::with_capacity(self.len() + 1);
        if let Some(shape) = shape {
            let mut acc = Element::zeros(&shape);
            out.push(acc.clone());
            for p in &self.projections {
                acc = &acc + p;
                out.push(acc.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UptSummary {
    pub tail_norms: Vec<f64>,
    pub min_pair_gap: f64,
    pub min_modulus: f64,
}

/// The four hypotheses for `a` and the projections `ps`: invariance
/// (1 − P_n) a P_n = 0, tail norms, disjoint compressed spectra, and
/// invertible compressions.
pub fn verify_upt(a: &Element, ps: &[Element], tail_limit: f64, tol: f64, gap_tol: f64) -> Result<(VerificationReport, UptSummary)> {
    if ps.is_empty() {
        return Err(Error::Shape("no projections supplied".into()));
    }
    let one = Element::identity(a.shape());
    let mut rep = VerificationReport::default();
    let mut inv = Worst::default();
    let mut tails = Vec::with_capacity(ps.len());
    let mut p_sum = Element::zeros(a.shape());
    for (n, p) in ps.iter().enumerate() {
        p_sum = &p_sum + p;
        let comp = &one - &p_sum;
        inv.update((&(&comp * a) * &p_sum).operator_norm(), || format!("n = {}", n + 1));
        tails.push((&(&comp * a) * &comp).operator_norm());
    }
    rep.push(inv.check("upT.1_invariance", "upT(1)", tol));

    let monotone = tails.windows(2).all(|w| w[1] <= w[0] + tol);
    let last = *tails.last().expect("nonempty");
    let mut c = Check::at_most("upT.2_tail", "upT(2)", last, tail_limit);
    c.detail = Some(format!("tail norms non-increasing: {monotone}; first {:.3e}", tails[0]));
    if !monotone {
        c.status = crate::report::Status::Fail;
    }
    rep.push(c);

    let spectra: Vec<Vec<num_complex::Complex64>> = ps.iter().map(|p| corner_spectrum(a, p)).collect::<Result<_>>()?;
    let mut min_gap = f64::INFINITY;
    let mut gap_at = None;
    for (i, si) in spectra.iter().enumerate() {
        for (k, sk) in spectra[..i].iter().enumerate() {
            for x in si {
                for y in sk {
                    let d = (x - y).norm();
                    if d < min_gap {
                        min_gap = d;
                        gap_at = Some((k + 1, i + 1));
                    }
                }
            }
        }
    }
    let mut c = Check::at_least("upT.3_disjoint", "upT(3)", min_gap, gap_tol);
    if let Some((k, i)) = gap_at.filter(|_| !c.passed()) {
        c.detail = Some(format!("closest spectra at p_{k} and p_{i}"));
    }
    rep.push(c);
    let min_mod = spectra.iter().flatten().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    rep.push(Check::at_least("upT.4_invertible", "upT(4)", min_mod, gap_tol));
    Ok((rep, UptSummary { tail_norms: tails, min_pair_gap: min_gap, min_modulus: min_mod }))
}

/// Peels off p_1, p_2, … from `a`: p_n is the range projection of the
/// Riesz idempotent of (1 − P_{n−1}) a (1 − P_{n−1}) for the n-th cluster,
/// taken from the reordered Schur basis.
/// Each cluster comes with its separation δ.
pub fn extract_projections(a: &Element, clusters: &[(Cluster, f64)]) -> Result<Vec<Element>> {
    let one = Element::identity(a.shape());
    let mut p_sum = Element::zeros(a.shape());
    let mut out = Vec::with_capacity(clusters.len());
    for (cluster, delta) in clusters {
        let comp = &one - &p_sum;
        let b = &(&comp * a) * &comp;
        let mut data = Vec::with_capacity(b.data().len());
        for blk in b.data() {
            let mut mats = Vec::with_capacity(blk.len());
            for m in blk {
                mats.push(spectral_subspace_projection(m, cluster, *delta)?);
            }
            data.push(mats);
        }
        let p = Element::new(a.shape().clone(), data)?;
        p_sum = &p_sum + &p;
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{AlgebraShape, CMat};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(values: &[f64]) -> Element {
        let n = values.len();
        Element::from_fn(&AlgebraShape::matrix(n), |_, _| CMat::from_fn(n, n, |r, c| if r == c { Complex64::new(values[r], 0.0) } else { Complex64::new(0.0, 0.0) }))
    }

    fn units(n: usize) -> Vec<Element> {
        (0..n).map(|k| Element::unit(&AlgebraShape::matrix(n), 0, k, k)).collect()
    }

    #[test]
    fn diagonal_passes_and_extracts() {
        let a = diag(&[1.0, 2.0, 3.0]);
        let ps = units(3);
        let (rep, _) = verify_upt(&a, &ps, 1.0, 1e-10, 1e-9).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.failures());
        let clusters: Vec<(Cluster, f64)> = (1..=3).map(|k| (Cluster::Points(vec![Complex64::new(k as f64, 0.0)]), 0.5)).collect();
        let got = extract_projections(&a, &clusters).unwrap();
        for (g, p) in got.iter().zip(&ps) {
            assert!(g.distance(p) < 1e-12);
        }
    }

    #[test]
    fn equal_blocks_fail_disjointness() {
        let a = diag(&[1.0, 1.0, 3.0]);
        let (rep, s) = verify_upt(&a, &units(3), 1.0, 1e-10, 1e-9).unwrap();
        assert!(!rep.get("upT.3_disjoint").unwrap().passed());
        assert_eq!(s.min_pair_gap, 0.0);
    }

    #[test]
    fn triangular_blocks_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let shape = AlgebraShape::matrix(n);
        let block_of = |r: usize| r / 2;
        let a = Element::from_fn(&shape, |_, _| {
            CMat::from_fn(n, n, |r, c| {
                if block_of(r) == block_of(c) {
                    if r == c {
                        Complex64::new(block_of(r) as f64 + 1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                } else if block_of(r) < block_of(c) {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        });
        let ps: Vec<Element> = (0..3).map(|b| &Element::unit(&shape, 0, 2 * b, 2 * b) + &Element::unit(&shape, 0, 2 * b + 1, 2 * b + 1)).collect();
        let (rep, _) = verify_upt(&a, &ps, 1.0, 1e-10, 1e-9).unwrap();
        assert!(rep.all_pass());
        let clusters: Vec<(Cluster, f64)> = (1..=3).map(|k| (Cluster::Points(vec![Complex64::new(k as f64, 0.0)]), 0.5)).collect();
        let got = extract_projections(&a, &clusters).unwrap();
        for (g, p) in got.iter().zip(&ps) {
            assert!(g.distance(p) < 1e-8);
        }
    }
}
