use serde::{Deserialize, Serialize};

use super::oz::{disjointify, interval_grid, olsen_zame};
use super::phi::{check_map_hypotheses, phi_map};
use super::registry::IntervalRegistry;
use crate::error::{Error, Result};
use crate::linalg::{corner_spectrum, Element};
use crate::scaffold::{QwuElements, QwuSets, UnitRef};
use crate::system::SystemSnapshot;
use crate::tolerance::Tolerances;

/// Spectra of corner pieces are placed inside [1, RAW_TOP] before scaling.
pub const RAW_TOP: f64 = 1.25;

/// Adds `x` to `set` unless it is (numerically) zero, a multiple of the
/// corner unit, or already present. Multiples of the unit are skipped since
/// the unit lies in the algebra generated by any invertible corner element.
pub fn push_distinct(set: &mut Vec<Element>, x: Element, unit: &Element, tol: f64) {
    if x.max_abs() <= tol {
        return;
    }
    let mu = unit.hs_inner(&x) / unit.hs_inner(unit);
    if (&x - &unit.scale_c(mu)).max_abs() <= tol {
        return;
    }
    if set.iter().any(|y| y == &x || y.distance(&x) <= tol) {
        return;
    }
    set.push(x);
}

/// n > 2m − 1, or a single piece in an unsplit corner, where an affine
/// image of the piece already generates it.
pub fn multiplicity_ok(n: usize, m: usize) -> bool {
    n > 0 && (n >= 2 * m || (n == 1 && m <= 1))
}

#[derive(Clone, Debug)]
pub struct CornerGenerator {
    pub element: Element,
    /// Distinct nonzero pieces v_k d v_k* that are not multiples of the unit.
    pub pieces: Vec<Element>,
    pub n: usize,
}

/// An invertible element of the corner `unit` whose generated algebra
/// contains every d in `ds`. The v's must satisfy the Φ hypotheses and
/// their number must exceed 2m − 1.
pub fn corner_generator(ds: &[Element], vs: &[Element], unit: &Element, range: (f64, f64), tol: &Tolerances) -> Result<CornerGenerator> {
    let n = vs.len();
    let m = ds.len();
    if !multiplicity_ok(n, m) {
        return Err(Error::Multiplicity { n, m });
    }
    check_map_hypotheses(vs, unit, ds, None, tol.hypothesis.max(tol.identity))?;
    let e = &vs[0] * &vs[0].adjoint();
    let mut pieces = Vec::new();
    for d in ds {
        for v in vs {
            push_distinct(&mut pieces, &(v * d) * &v.adjoint(), &e, tol.dedup);
        }
    }
    let count = n * (n + 1) / 2;
    let intervals = interval_grid(range.0, range.1, count);
    let a = disjointify(&pieces, &e, count, &intervals)?;
    let slot = (range.1 - range.0) / count as f64;
    let oz = olsen_zame(&a, n, &e, 0.2 * slot)?;
    let element = phi_map(vs, &oz)?;
    Ok(CornerGenerator { element, pieces, n })
}

#[derive(Clone, Debug)]
pub struct BlockCorner {
    pub element: Element,
    pub deeper_stage: usize,
    /// Target block J at the deeper stage with its projection p_J.
    pub blocks: Vec<(usize, Element)>,
    /// Raw spectral sub-range used for each block, in the same order.
    pub ranges: Vec<(f64, f64)>,
}

/// Invertible element of pBp, p a diagonal unit, whose generated algebra
/// contains the given self-adjoint elements of pDp. Works at the first
/// stage at or after p's where every multiplicity of p's block exceeds
/// 2m − 1, with one corner generator per target block and disjoint
/// spectral ranges across blocks.
pub fn block_corner_generator(p: UnitRef, ds: &[Element], snap: &SystemSnapshot, range: (f64, f64), tol: &Tolerances) -> Result<BlockCorner> {
    let m = ds.len();
    let deeper = (p.stage..=snap.depth())
        .find(|&st| {
            snap.af_skeleton
                .multiplicities(p.stage, st)
                .map(|t| t[p.block].iter().all(|&x| x == 0 || multiplicity_ok(x, m)))
                .unwrap_or(false)
        })
        .ok_or_else(|| {
            Error::InsufficientDepth(format!(
                "no stage within depth {} has multiplicities > {} over stage {}",
                snap.depth(),
                (2 * m).saturating_sub(1),
                p.stage
            ))
        })?;
    let map = snap.map_between(p.stage, deeper)?;
    let targets: Vec<(usize, Vec<usize>)> = (0..snap.stages[deeper - 1].sizes.len())
        .map(|j| (j, map.positions(p.block, j, p.row)))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let ranges = interval_grid(range.0, range.1, targets.len());
    let mut element = Element::zeros(&snap.ambient());
    let mut blocks = Vec::new();
    for ((jj, l), &r) in targets.iter().zip(&ranges) {
        let vs: Vec<Element> = l.iter().map(|&c| snap.unit(deeper, *jj, l[0], c)).collect();
        let pj = l.iter().fold(Element::zeros(&snap.ambient()), |acc, &c| &acc + &snap.unit(deeper, *jj, c, c));
        let mut local = Vec::new();
        for d in ds {
            push_distinct(&mut local, &(&pj * d) * &pj, &pj, tol.dedup);
        }
        let g = corner_generator(&local, &vs, &pj, r, tol)?;
        element = &element + &g.element;
        blocks.push((*jj, pj));
    }
    Ok(BlockCorner { element, deeper_stage: deeper, blocks, ranges })
}

/// One member g_{i,j} of a stage family, with its bookkeeping.
#[derive(Clone, Debug)]
pub struct GEntry {
    pub stage: usize,
    pub block: usize,
    pub element: Element,
    pub raw_norm: f64,
    pub scale: f64,
    pub deeper_stage: usize,
    pub pieces: usize,
    /// Eigenvalues inside the corner w_{i;1,j,1}.
    pub spectrum: Vec<f64>,
}

/// Upper bound on ‖g_{i,j}‖ (0-based i, j).
pub fn g_norm_cap(i: usize, j: usize) -> f64 {
    2f64.powi(-(i as i32 + 1) - (j as i32 + 1) - 2)
}

/// The family G_i for the D generator `d`: per block j, the pieces
/// v d v* for v in U_{i,j} go into a block corner generator under
/// w_{i;1,j,1}, which is then scaled into a fresh registry interval.
pub fn stage_g_family(
    d: &Element,
    qwu: &QwuSets,
    el: &QwuElements,
    snap: &SystemSnapshot,
    i: usize,
    registry: &mut IntervalRegistry,
    tol: &Tolerances,
) -> Result<Vec<GEntry>> {
    if d.self_adjoint_deviation() > tol.self_adjoint * d.operator_norm().max(1.0) {
        return Err(Error::NotSelfAdjoint { deviation: d.self_adjoint_deviation() });
    }
    let mut out = Vec::new();
    for j in 0..qwu.selection.k[i] {
        let p = qwu.w[i][0][j][0];
        let p_el = &el.w[i][0][j][0];
        let mut pieces = Vec::new();
        for v in &el.u[i][j] {
            push_distinct(&mut pieces, &(v * d) * &v.adjoint(), p_el, tol.dedup);
        }
        let bc = block_corner_generator(p, &pieces, snap, (1.0, RAW_TOP), tol)?;
        let raw_norm = bc.element.operator_norm();
        let scale = registry.allocate(i, j, g_norm_cap(i, j) * (1.0 - 1e-9) / raw_norm, RAW_TOP)?;
        let element = bc.element.scale(scale);
        let spectrum = corner_spectrum(&element, p_el)?.iter().map(|z| z.re).collect();
        out.push(GEntry {
            stage: i,
            block: j,
            element,
            raw_norm,
            scale,
            deeper_stage: bc.deeper_stage,
            pieces: pieces.len(),
            spectrum,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GSummary {
    pub stage: usize,
    pub block: usize,
    pub norm: f64,
    pub cap: f64,
    pub scale: f64,
    pub deeper_stage: usize,
    pub pieces: usize,
    pub spectrum_min: f64,
    pub spectrum_max: f64,
}

impl GEntry {
    pub fn summary(&self) -> GSummary {
        GSummary {
            stage: self.stage + 1,
            block: self.block + 1,
            norm: self.element.operator_norm(),
            cap: g_norm_cap(self.stage, self.block),
            scale: self.scale,
            deeper_stage: self.deeper_stage,
            pieces: self.pieces,
            spectrum_min: self.spectrum.iter().copied().fold(f64::INFINITY, f64::min),
            spectrum_max: self.spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{word_closure, AlgebraShape, CMat, ClosurePolicy};
    use num_complex::Complex64;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn scalar_oz_generates_full_matrices() {
        for k in 2..=3usize {
            let shape = AlgebraShape::matrix(k);
            let vs: Vec<Element> = (0..k).map(|l| Element::unit(&shape, 0, 0, l)).collect();
            let e = Element::unit(&shape, 0, 0, 0);
            let a: Vec<Element> = (1..=k * (k + 1) / 2).map(|x| e.scale(x as f64)).collect();
            let oz = olsen_zame(&a, k, &e, 0.5).unwrap();
            let g = phi_map(&vs, &oz).unwrap();
            if k == 2 {
                let expect = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(3.0)]);
                assert_eq!(g.get(0, 0), &expect);
            }
            let dim = word_closure(&[g], &ClosurePolicy::with_length(8)).unwrap().dimension();
            assert_eq!(dim, k * k);
        }
    }

    #[test]
    fn corner_generator_recovers_a_diagonal() {
        let shape = AlgebraShape::matrix(4);
        let e = |r: usize, s: usize| Element::unit(&shape, 0, r, s);
        // Corner unit e_00 + e_11 split by v_1 = e_00 + e_11, v_2 = e_02 + e_13.
        let v1 = &e(0, 0) + &e(1, 1);
        let v2 = &e(0, 2) + &e(1, 3);
        let d = &(&e(0, 0).scale(2.0) + &e(2, 2).scale(5.0)) + &(&e(1, 1).scale(2.0) + &e(3, 3).scale(5.0));
        let g = corner_generator(&[d.clone()], &[v1, v2], &Element::identity(&shape), (1.0, 1.25), &Tolerances::default()).unwrap();
        let span = word_closure(&[g.element], &ClosurePolicy::with_length(10)).unwrap();
        assert!(span.distance(&d).unwrap() <= 1e-8);
    }

    #[test]
    fn too_few_isometries() {
        let shape = AlgebraShape::matrix(2);
        let id = Element::identity(&shape);
        let d = Element::unit(&AlgebraShape::matrix(2), 0, 0, 0);
        let err = corner_generator(&[d.clone(), id.clone()], &[id.clone()], &id, (1.0, 1.25), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::Multiplicity { n: 1, m: 2 }));
    }
}
