use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockShape {
    pub size: usize,
    pub samples: usize,
}

/// Block layout of a stage algebra: one matrix size per block, and the number
/// of sample points of the block's base space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlgebraShape {
    pub blocks: Vec<BlockShape>,
}

impl AlgebraShape {
    pub fn new(blocks: &[(usize, usize)]) -> Result<Self> {
        let shape = AlgebraShape {
            blocks: blocks.iter().map(|&(size, samples)| BlockShape { size, samples }).collect(),
        };
        shape.validate()?;
        Ok(shape)
    }

    /// `M_n` with a single sample.
    pub fn matrix(n: usize) -> Self {
        AlgebraShape { blocks: vec![BlockShape { size: n, samples: 1 }] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Shape("shape has no blocks".into()));
        }
        for (j, b) in self.blocks.iter().enumerate() {
            if b.size == 0 || b.samples == 0 {
                return Err(Error::Shape(format!(
                    "block {j} has size {} and {} samples; both must be positive",
                    b.size, b.samples
                )));
            }
        }
        Ok(())
    }

    /// Matrix dimension Σ block sizes. Samples do not contribute.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    /// Real dimension of the algebra as a vector space over ℂ.
    pub fn flat_len(&self) -> usize {
        self.blocks.iter().map(|b| b.size * b.size * b.samples).sum()
    }

    pub fn kron(&self, c: usize) -> Self {
        AlgebraShape {
            blocks: self.blocks.iter().map(|b| BlockShape { size: b.size * c, samples: b.samples }).collect(),
        }
    }
}

/// An element of ⊕_j M_{n_j}(C(X_j)) on a finite sample grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    shape: AlgebraShape,
    data: Vec<Vec<CMat>>,
}

impl Element {
    pub fn new(shape: AlgebraShape, data: Vec<Vec<CMat>>) -> Result<Self> {
        shape.validate()?;
        if data.len() != shape.blocks.len() {
            return Err(Error::Shape(format!(
                "expected {} blocks of data, got {}",
                shape.blocks.len(),
                data.len()
            )));
        }
        for (j, (b, mats)) in shape.blocks.iter().zip(&data).enumerate() {
            if mats.len() != b.samples {
                return Err(Error::Shape(format!("block {j}: expected {} samples, got {}", b.samples, mats.len())));
            }
            for m in mats {
                if m.nrows() != b.size || m.ncols() != b.size {
                    return Err(Error::Shape(format!(
                        "block {j}: expected {0}x{0} matrices, got {1}x{2}",
                        b.size,
                        m.nrows(),
                        m.ncols()
                    )));
                }
            }
        }
        Ok(Element { shape, data })
    }

    pub fn from_fn(shape: &AlgebraShape, mut f: impl FnMut(usize, usize) -> CMat) -> Self {
        let data = shape
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| (0..b.samples).map(|x| f(j, x)).collect())
            .collect();
        Element { shape: shape.clone(), data }
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        Self::from_fn(shape, |j, _| CMat::zeros(shape.blocks[j].size, shape.blocks[j].size))
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        Self::from_fn(shape, |j, _| CMat::identity(shape.blocks[j].size, shape.blocks[j].size))
    }

    /// A constant element: the same matrix at every sample of each block.
    pub fn constant(shape: &AlgebraShape, blocks: &[CMat]) -> Result<Self> {
        let data = shape
            .blocks
            .iter()
            .zip(blocks)
            .map(|(b, m)| vec![m.clone(); b.samples])
            .collect::<Vec<_>>();
        Element::new(shape.clone(), data)
    }

    /// The matrix unit e_{row,col} of one block (constant over samples).
    pub fn unit(shape: &AlgebraShape, block: usize, row: usize, col: usize) -> Self {
        Self::from_fn(shape, |j, _| {
            let n = shape.blocks[j].size;
            let mut m = CMat::zeros(n, n);
            if j == block {
                m[(row, col)] = ONE;
            }
            m
        })
    }

    /// The unit of one block, zero elsewhere.
    pub fn block_unit(shape: &AlgebraShape, block: usize) -> Self {
        Self::from_fn(shape, |j, _| {
            let n = shape.blocks[j].size;
            if j == block {
                CMat::identity(n, n)
            } else {
                CMat::zeros(n, n)
            }
        })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn data(&self) -> &[Vec<CMat>] {
        &self.data
    }

    pub fn block(&self, j: usize) -> &[CMat] {
        &self.data[j]
    }

    pub fn get(&self, block: usize, sample: usize) -> &CMat {
        &self.data[block][sample]
    }

    pub fn get_mut(&mut self, block: usize, sample: usize) -> &mut CMat {
        &mut self.data[block][sample]
    }

    pub fn into_data(self) -> Vec<Vec<CMat>> {
        self.data
    }

    fn check_same(&self, other: &Element) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape("operands have different shapes".into()));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Element, f: impl Fn(&CMat, &CMat) -> CMat) -> Element {
        assert_eq!(self.shape, other.shape, "element shapes differ");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
            .collect();
        Element { shape: self.shape.clone(), data }
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Element {
        let data = self.data.iter().map(|b| b.iter().map(&f).collect()).collect();
        Element { shape: self.shape.clone(), data }
    }

    pub fn checked_add(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(self * other)
    }

    pub fn adjoint(&self) -> Element {
        self.map(|m| m.adjoint())
    }

    pub fn scale(&self, c: f64) -> Element {
        self.map(|m| m * Complex64::new(c, 0.0))
    }

    pub fn scale_c(&self, c: Complex64) -> Element {
        self.map(|m| m * c)
    }

    pub fn add_assign_scaled(&mut self, other: &Element, c: f64) {
        assert_eq!(self.shape, other.shape, "element shapes differ");
        let c = Complex64::new(c, 0.0);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * c;
            }
        }
    }

    /// Largest singular value over all blocks and samples.
    pub fn operator_norm(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .map(matrix_norm)
            .fold(0.0, f64::max)
    }

    /// Largest entry modulus, used for exactness checks.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Element) -> f64 {
        (self - other).operator_norm()
    }

    pub fn is_constant(&self, tol: f64) -> bool {
        self.data.iter().all(|b| b.iter().all(|m| (m - &b[0]).iter().all(|z| z.norm() <= tol)))
    }

    pub fn self_adjoint_deviation(&self) -> f64 {
        (self - &self.adjoint()).operator_norm()
    }

    /// Normalized Hilbert–Schmidt inner product (1/dim)·Σ tr(a* b).
    pub fn hs_inner(&self, other: &Element) -> Complex64 {
        assert_eq!(self.shape, other.shape, "element shapes differ");
        let mut acc = ZERO;
        for (a, b) in self.data.iter().zip(&other.data) {
            for (x, y) in a.iter().zip(b) {
                for (p, q) in x.iter().zip(y.iter()) {
                    acc += p.conj() * q;
                }
            }
        }
        acc / self.shape.dimension() as f64
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_inner(self).re.max(0.0).sqrt()
    }

    /// x ⊗ h in the Kronecker layout (the first factor indexes the coarse rows).
    pub fn kron(&self, h: &CMat) -> Element {
        let c = h.nrows();
        let data = self.data.iter().map(|b| b.iter().map(|m| m.kronecker(h)).collect()).collect();
        Element { shape: self.shape.kron(c), data }
    }

    /// Column-major concatenation of all (block, sample) matrices.
    pub fn to_flat(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.shape.flat_len());
        for b in &self.data {
            for m in b {
                out.extend_from_slice(m.as_slice());
            }
        }
        out
    }

    pub fn from_flat(shape: &AlgebraShape, flat: &[Complex64]) -> Result<Element> {
        if flat.len() != shape.flat_len() {
            return Err(Error::Shape(format!("flat vector has length {}, expected {}", flat.len(), shape.flat_len())));
        }
        let mut off = 0;
        let data = shape
            .blocks
            .iter()
            .map(|b| {
                (0..b.samples)
                    .map(|_| {
                        let n2 = b.size * b.size;
                        let m = CMat::from_column_slice(b.size, b.size, &flat[off..off + n2]);
                        off += n2;
                        m
                    })
                    .collect()
            })
            .collect();
        Ok(Element { shape: shape.clone(), data })
    }

    /// Indices with a nonzero diagonal entry in some sample, per block. For a
    /// diagonal projection this is its support.
    pub fn diagonal_support(&self, tol: f64) -> Vec<Vec<usize>> {
        self.data
            .iter()
            .map(|b| {
                let n = b[0].nrows();
                (0..n).filter(|&r| b.iter().any(|m| m[(r, r)].norm() > tol)).collect()
            })
            .collect()
    }
}

pub fn matrix_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    m.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.map(|m| -m)
    }
}

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    shape: AlgebraShape,
    data: Vec<Vec<Vec<[f64; 2]>>>,
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let data = self
            .data
            .iter()
            .map(|b| {
                b.iter()
                    .map(|m| {
                        let mut v = Vec::with_capacity(m.len());
                        for r in 0..m.nrows() {
                            for c in 0..m.ncols() {
                                let z = m[(r, c)];
                                v.push([z.re, z.im]);
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        ElementDoc { shape: self.shape.clone(), data }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = ElementDoc::deserialize(d)?;
        doc.shape.validate().map_err(D::Error::custom)?;
        if doc.data.len() != doc.shape.blocks.len() {
            return Err(D::Error::custom("block count does not match shape"));
        }
        let mut data = Vec::new();
        for (b, mats) in doc.shape.blocks.iter().zip(&doc.data) {
            if mats.len() != b.samples {
                return Err(D::Error::custom("sample count does not match shape"));
            }
            let mut out = Vec::new();
            for m in mats {
                if m.len() != b.size * b.size {
                    return Err(D::Error::custom("matrix entry count does not match block size"));
                }
                out.push(CMat::from_row_iterator(b.size, b.size, m.iter().map(|p| Complex64::new(p[0], p[1]))));
            }
            data.push(out);
        }
        Ok(Element { shape: doc.shape, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(rows: [[f64; 2]; 2]) -> CMat {
        CMat::from_fn(2, 2, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    #[test]
    fn operator_norm_examples() {
        let s = AlgebraShape::matrix(2);
        assert!((Element::identity(&s).operator_norm() - 1.0).abs() < 1e-14);
        let e = Element::constant(&s, &[m2([[0.0, 2.0], [0.0, 0.0]])]).unwrap();
        assert!((e.operator_norm() - 2.0).abs() < 1e-14);
        let e = Element::constant(&s, &[m2([[1.0, 1.0], [0.0, 1.0]])]).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((e.operator_norm() - golden).abs() < 1e-12);
    }

    #[test]
    fn malformed_shapes_are_rejected() {
        assert!(AlgebraShape::new(&[(0, 1)]).is_err());
        assert!(AlgebraShape::new(&[(2, 0)]).is_err());
        let s = AlgebraShape::matrix(2);
        assert!(Element::new(s, vec![vec![CMat::zeros(3, 3)]]).is_err());
    }

    #[test]
    fn json_round_trip_is_row_major() {
        let s = AlgebraShape::new(&[(2, 2), (1, 1)]).unwrap();
        let e = Element::from_fn(&s, |j, x| {
            let n = s.blocks[j].size;
            CMat::from_fn(n, n, |r, c| Complex64::new((10 * r + c) as f64, x as f64))
        });
        let text = serde_json::to_string(&e).unwrap();
        assert!(text.contains("[[0.0,0.0],[1.0,0.0],[10.0,0.0],[11.0,0.0]]"));
        let back: Element = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn normalized_inner_product_uses_matrix_dimension() {
        let s = AlgebraShape::new(&[(2, 3)]).unwrap();
        let one = Element::identity(&s);
        // Σ over 3 samples of tr(1) = 6, divided by dim 2.
        assert!((one.hs_inner(&one).re - 3.0).abs() < 1e-14);
    }
}
