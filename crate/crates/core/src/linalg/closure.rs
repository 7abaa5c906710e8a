//! Finite word-closure spans: the computable stand-in for a generated C*-algebra.

use nalgebra::{DMatrixView, DMatrixViewMut};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::element::{AlgebraShape, Element, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClosurePolicy {
    pub max_word_length: usize,
    /// Candidates whose relative residual after projection falls below this
    /// are treated as already in the span.
    pub rank_tol: f64,
    /// Frontiers up to this size are multiplied out exhaustively; larger ones
    /// are sampled with random combinations.
    pub direct_limit: usize,
    /// Consecutive rejected random combinations that end the sampling of one
    /// generator against one frontier.
    pub sketch_rejections: usize,
    pub seed: u64,
    /// Upper bound on the ambient vector-space dimension Σ n_j² · samples.
    pub max_ambient: usize,
}

impl Default for ClosurePolicy {
    fn default() -> Self {
        ClosurePolicy {
            max_word_length: 14,
            rank_tol: 1e-10,
            direct_limit: 8,
            sketch_rejections: 3,
            seed: 0x5eed,
            max_ambient: 1 << 16,
        }
    }
}

impl ClosurePolicy {
    pub fn with_length(max_word_length: usize) -> Self {
        ClosurePolicy { max_word_length, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureStats {
    pub dimension: usize,
    pub ambient_dimension: usize,
    pub levels: usize,
    pub stabilized: bool,
    /// Dimension after each word length 0, 1, 2, …
    pub growth: Vec<usize>,
}

/// Orthonormal basis (normalized Hilbert–Schmidt product) of a subspace.
///
/// Vectors are stored flattened and scaled to unit Euclidean length, which
/// differs from the normalized product only by the constant √dim.
#[derive(Clone, Debug)]
pub struct SpanBasis {
    ambient: AlgebraShape,
    flat: Vec<Vec<Complex64>>,
    pub stats: ClosureStats,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl SpanBasis {
    pub fn empty(ambient: &AlgebraShape) -> Self {
        SpanBasis {
            ambient: ambient.clone(),
            flat: Vec::new(),
            stats: ClosureStats {
                dimension: 0,
                ambient_dimension: ambient.flat_len(),
                levels: 0,
                stabilized: false,
                growth: Vec::new(),
            },
        }
    }

    /// Orthonormalize an arbitrary family (linear span, no products).
    pub fn from_elements(ambient: &AlgebraShape, elements: &[Element], rank_tol: f64) -> Result<Self> {
        let mut b = SpanBasis::empty(ambient);
        for e in elements {
            if e.shape() != ambient {
                return Err(Error::Shape("element does not live in the span's ambient algebra".into()));
            }
            b.try_add(e.to_flat(), rank_tol);
        }
        b.stats.dimension = b.flat.len();
        Ok(b)
    }

    pub fn ambient(&self) -> &AlgebraShape {
        &self.ambient
    }

    pub fn dimension(&self) -> usize {
        self.flat.len()
    }

    pub fn is_full(&self) -> bool {
        self.flat.len() == self.ambient.flat_len()
    }

    /// The basis as Elements, orthonormal for the normalized inner product.
    pub fn vectors(&self) -> Vec<Element> {
        let s = (self.ambient.dimension() as f64).sqrt();
        self.flat
            .iter()
            .map(|v| {
                let scaled: Vec<Complex64> = v.iter().map(|z| z * s).collect();
                Element::from_flat(&self.ambient, &scaled).expect("basis vectors match the ambient shape")
            })
            .collect()
    }

    /// Two passes of classical Gram–Schmidt; returns the residual norm.
    fn project_out(&self, v: &mut [Complex64]) -> f64 {
        for _ in 0..2 {
            let coeffs: Vec<Complex64> = self.flat.par_iter().map(|q| dot(q, v)).collect();
            for (q, c) in self.flat.iter().zip(coeffs) {
                if c != ZERO {
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= c * y;
                    }
                }
            }
        }
        norm(v)
    }

    /// Adds the direction of `v` if it is not already (numerically) in the span.
    fn try_add(&mut self, mut v: Vec<Complex64>, rank_tol: f64) -> bool {
        if self.flat.len() >= self.ambient.flat_len() {
            return false;
        }
        let n0 = norm(&v);
        if n0 == 0.0 || !n0.is_finite() {
            return false;
        }
        for z in v.iter_mut() {
            *z /= n0;
        }
        let r = self.project_out(&mut v);
        if r < rank_tol {
            return false;
        }
        for z in v.iter_mut() {
            *z /= r;
        }
        self.flat.push(v);
        true
    }

    /// Normalized Hilbert–Schmidt distance from `e` to the span.
    pub fn distance(&self, e: &Element) -> Result<f64> {
        if e.shape() != &self.ambient {
            return Err(Error::Shape("element does not live in the span's ambient algebra".into()));
        }
        let mut v = e.to_flat();
        let r = self.project_out(&mut v);
        Ok(r / (self.ambient.dimension() as f64).sqrt())
    }

    /// Largest deviation of the normalized Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.flat.iter().enumerate() {
            for (j, b) in self.flat.iter().enumerate() {
                let g = dot(a, b);
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

pub fn distance_to_span(e: &Element, basis: &SpanBasis) -> Result<f64> {
    basis.distance(e)
}

struct FlatMul {
    slabs: Vec<(usize, usize)>,
    len: usize,
}

impl FlatMul {
    fn new(shape: &AlgebraShape) -> Self {
        let mut slabs = Vec::new();
        let mut off = 0;
        for b in &shape.blocks {
            for _ in 0..b.samples {
                slabs.push((off, b.size));
                off += b.size * b.size;
            }
        }
        FlatMul { slabs, len: off }
    }

    fn mul(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.len];
        for &(off, n) in &self.slabs {
            let r = off..off + n * n;
            let av = DMatrixView::from_slice(&a[r.clone()], n, n);
            let bv = DMatrixView::from_slice(&b[r.clone()], n, n);
            let mut ov = DMatrixViewMut::from_slice(&mut out[r], n, n);
            ov.gemm(ONE, &av, &bv, ZERO);
        }
        out
    }
}

/// Orthonormal basis of the span of all words of length ≤ L in the
/// generators and their adjoints, with the unit always included.
pub fn word_closure(generators: &[Element], policy: &ClosurePolicy) -> Result<SpanBasis> {
    let first = generators.first().ok_or_else(|| Error::Shape("word_closure needs at least one generator".into()))?;
    let shape = first.shape().clone();
    if generators.iter().any(|g| g.shape() != &shape) {
        return Err(Error::Shape("generators live in different algebras".into()));
    }
    if shape.flat_len() > policy.max_ambient {
        return Err(Error::Resource(format!(
            "ambient dimension {} exceeds the closure cap {}",
            shape.flat_len(),
            policy.max_ambient
        )));
    }
    let mut letters: Vec<Vec<Complex64>> = Vec::new();
    for g in generators {
        letters.push(g.to_flat());
        if g.self_adjoint_deviation() > 0.0 {
            letters.push(g.adjoint().to_flat());
        }
    }
    let mul = FlatMul::new(&shape);
    let mut basis = SpanBasis::empty(&shape);
    basis.try_add(Element::identity(&shape).to_flat(), policy.rank_tol);
    basis.stats.growth.push(basis.dimension());
    let mut frontier: Vec<usize> = vec![0];
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    for level in 1..=policy.max_word_length {
        if basis.is_full() {
            break;
        }
        let start = basis.dimension();
        for x in &letters {
            if frontier.len() <= policy.direct_limit {
                for &b in &frontier {
                    let cand = mul.mul(x, &basis.flat[b]);
                    basis.try_add(cand, policy.rank_tol);
                }
            } else {
                let mut rejected = 0;
                let mut accepted = 0;
                while rejected < policy.sketch_rejections && accepted < frontier.len() && !basis.is_full() {
                    let mut combo = vec![ZERO; shape.flat_len()];
                    for &b in &frontier {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        let w = Complex64::new(re, im);
                        for (c, q) in combo.iter_mut().zip(&basis.flat[b]) {
                            *c += w * q;
                        }
                    }
                    if basis.try_add(mul.mul(x, &combo), policy.rank_tol) {
                        accepted += 1;
                        rejected = 0;
                    } else {
                        rejected += 1;
                    }
                }
            }
        }
        basis.stats.levels = level;
        basis.stats.growth.push(basis.dimension());
        if basis.dimension() == start {
            basis.stats.stabilized = true;
            break;
        }
        frontier = (start..basis.dimension()).collect();
    }
    if basis.is_full() {
        basis.stats.stabilized = true;
    }
    basis.stats.dimension = basis.dimension();
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::element::CMat;

    #[test]
    fn unit_alone_spans_scalars() {
        let s = AlgebraShape::matrix(2);
        let b = word_closure(&[Element::identity(&s)], &ClosurePolicy::default()).unwrap();
        assert_eq!(b.dimension(), 1);
        assert!(b.stats.stabilized);
    }

    #[test]
    fn off_diagonal_unit_generates_m2() {
        let s = AlgebraShape::matrix(2);
        let b = word_closure(&[Element::unit(&s, 0, 0, 1)], &ClosurePolicy::default()).unwrap();
        assert_eq!(b.dimension(), 4);
        assert!(b.gram_deviation() < 1e-10);
    }

    #[test]
    fn distance_of_e11_to_scalars() {
        let s = AlgebraShape::matrix(2);
        let b = word_closure(&[Element::identity(&s)], &ClosurePolicy::default()).unwrap();
        let d = b.distance(&Element::unit(&s, 0, 0, 0)).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        let v = &b.vectors()[0];
        assert!(b.distance(v).unwrap() < 1e-12);
        assert!((v.hs_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_frontiers_reach_full_matrix_algebra() {
        // A generic matrix generates all of M_6; frontiers exceed the direct limit.
        let s = AlgebraShape::matrix(6);
        let m = CMat::from_fn(6, 6, |r, c| Complex64::new(((r * 7 + c * 3) % 5) as f64 - 2.0, (r + 2 * c) as f64 * 0.1));
        let g = Element::constant(&s, &[m]).unwrap();
        let b = word_closure(&[g], &ClosurePolicy::default()).unwrap();
        assert_eq!(b.dimension(), 36);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let b = word_closure(&[Element::identity(&AlgebraShape::matrix(2))], &ClosurePolicy::default()).unwrap();
        assert!(b.distance(&Element::identity(&AlgebraShape::matrix(3))).is_err());
    }
}
