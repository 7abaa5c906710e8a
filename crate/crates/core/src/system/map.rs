use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{AlgebraShape, CMat, Element};

/// One diagonal slot of a seed: f ↦ f∘λ with λ given by a point table
/// (target sample → source sample) on the named source block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub source: usize,
    pub points: Vec<usize>,
}

/// A connecting map with diagonal seeds, in matrix-size units of the AF
/// skeleton. Applying it to an element whose blocks are `c` times larger
/// (a tensored system) places blocks of size `c·n` instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalMap {
    pub source: AlgebraShape,
    pub target: AlgebraShape,
    /// Per target block, the seed entries in diagonal order.
    pub entries: Vec<Vec<SeedEntry>>,
}

impl DiagonalMap {
    pub fn new(source: AlgebraShape, target: AlgebraShape, entries: Vec<Vec<SeedEntry>>) -> Result<Self> {
        let m = DiagonalMap { source, target, entries };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let entries = shape
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| vec![SeedEntry { source: j, points: (0..b.samples).collect() }])
            .collect();
        DiagonalMap { source: shape.clone(), target: shape.clone(), entries }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.target.blocks.len() {
            return Err(Error::Shape("one entry list per target block is required".into()));
        }
        for (j, list) in self.entries.iter().enumerate() {
            let tb = self.target.blocks[j];
            let mut filled = 0;
            for e in list {
                let sb = self
                    .source
                    .blocks
                    .get(e.source)
                    .ok_or_else(|| Error::Shape(format!("target block {j} refers to missing source block {}", e.source)))?;
                if e.points.len() != tb.samples {
                    return Err(Error::Shape(format!("target block {j}: point table must cover {} samples", tb.samples)));
                }
                if let Some(&bad) = e.points.iter().find(|&&x| x >= sb.samples) {
                    return Err(Error::Grid(format!("target block {j}: point {bad} is not on the source grid")));
                }
                filled += sb.size;
            }
            if filled > tb.size {
                return Err(Error::Shape(format!("target block {j} has size {} but its seed needs {filled}", tb.size)));
            }
        }
        Ok(())
    }

    pub fn is_unital(&self) -> bool {
        self.entries
            .iter()
            .zip(&self.target.blocks)
            .all(|(list, tb)| list.iter().map(|e| self.source.blocks[e.source].size).sum::<usize>() == tb.size)
    }

    /// Diagonal offsets (in skeleton units) of the entries of a target block.
    pub fn offsets(&self, target_block: usize) -> Vec<usize> {
        let mut off = 0;
        self.entries[target_block]
            .iter()
            .map(|e| {
                let o = off;
                off += self.source.blocks[e.source].size;
                o
            })
            .collect()
    }

    /// Positions L(j', j, k, t), t = 0, 1, …: where diagonal index k of source
    /// block j' lands in target block j, one per entry with that source.
    pub fn positions(&self, source_block: usize, target_block: usize, k: usize) -> Vec<usize> {
        self.entries[target_block]
            .iter()
            .zip(self.offsets(target_block))
            .filter(|(e, _)| e.source == source_block)
            .map(|(_, o)| o + k)
            .collect()
    }

    /// Multiplicity table, indexed [source block][target block].
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut m = vec![vec![0; self.target.blocks.len()]; self.source.blocks.len()];
        for (j, list) in self.entries.iter().enumerate() {
            for e in list {
                m[e.source][j] += 1;
            }
        }
        m
    }

    fn factor(&self, e: &Element) -> Result<usize> {
        let sh = e.shape();
        if sh.blocks.len() != self.source.blocks.len() {
            return Err(Error::Shape("element block count does not match the map's source".into()));
        }
        let c = sh.blocks[0].size / self.source.blocks[0].size;
        for (b, s) in sh.blocks.iter().zip(&self.source.blocks) {
            if b.samples != s.samples || b.size != c * s.size || c == 0 {
                return Err(Error::Shape("element shape does not match the map's source".into()));
            }
        }
        Ok(c)
    }

    pub fn apply(&self, e: &Element) -> Result<Element> {
        let c = self.factor(e)?;
        let target = self.target.kron(c);
        let out = Element::from_fn(&target, |j, x| {
            let n = target.blocks[j].size;
            let mut m = CMat::zeros(n, n);
            let mut off = 0;
            for entry in &self.entries[j] {
                let src = e.get(entry.source, entry.points[x]);
                let sz = src.nrows();
                m.view_mut((off, off), (sz, sz)).copy_from(src);
                off += sz;
            }
            m
        });
        Ok(out)
    }
}

/// later ∘ earlier. Entries nest: each entry of `later` expands into the
/// entries of `earlier` for its source block, in order.
pub fn compose_maps(later: &DiagonalMap, earlier: &DiagonalMap) -> Result<DiagonalMap> {
    if later.source != earlier.target {
        return Err(Error::Shape("maps do not chain".into()));
    }
    let entries = later
        .entries
        .iter()
        .map(|list| {
            list.iter()
                .flat_map(|outer| {
                    earlier.entries[outer.source].iter().map(move |inner| SeedEntry {
                        source: inner.source,
                        points: outer.points.iter().map(|&x| inner.points[x]).collect(),
                    })
                })
                .collect()
        })
        .collect();
    Ok(DiagonalMap { source: earlier.source.clone(), target: later.target.clone(), entries })
}

pub fn apply_map(m: &DiagonalMap, e: &Element) -> Result<Element> {
    m.apply(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn goodearl_step() -> DiagonalMap {
        let src = AlgebraShape::new(&[(1, 3)]).unwrap();
        let tgt = AlgebraShape::new(&[(2, 3)]).unwrap();
        DiagonalMap::new(
            src,
            tgt,
            vec![vec![SeedEntry { source: 0, points: vec![0, 1, 2] }, SeedEntry { source: 0, points: vec![0, 0, 0] }]],
        )
        .unwrap()
    }

    #[test]
    fn goodearl_seed_on_identity_function() {
        let m = goodearl_step();
        let f = Element::from_fn(&m.source, |_, x| CMat::from_element(1, 1, Complex64::new(x as f64 / 2.0, 0.0)));
        let out = m.apply(&f).unwrap();
        for x in 0..3 {
            let g = out.get(0, x);
            assert_eq!(g[(0, 0)].re, x as f64 / 2.0);
            assert_eq!(g[(1, 1)].re, 0.0);
        }
        assert!(m.is_unital());
        let one = Element::identity(&m.source);
        assert_eq!(m.apply(&one).unwrap(), Element::identity(&m.target));
    }

    #[test]
    fn two_goodearl_steps_compose_to_four_entries() {
        let a = goodearl_step();
        let mut b = goodearl_step();
        b.source = AlgebraShape::new(&[(2, 3)]).unwrap();
        b.target = AlgebraShape::new(&[(4, 3)]).unwrap();
        let c = compose_maps(&b, &a).unwrap();
        assert_eq!(c.entries[0].len(), 4);
        let constant = c.entries[0].iter().filter(|e| e.points.iter().all(|&x| x == 0)).count();
        assert_eq!(constant, 3);
        assert_eq!(c.incidence(), vec![vec![4]]);
        let id = DiagonalMap::identity(&a.source);
        assert_eq!(compose_maps(&a, &id).unwrap(), a);
    }

    #[test]
    fn tensored_elements_are_placed_blockwise() {
        let m = goodearl_step();
        let e = Element::identity(&m.source.kron(2));
        let out = m.apply(&e).unwrap();
        assert_eq!(out.shape(), &m.target.kron(2));
        assert_eq!(out, Element::identity(&m.target.kron(2)));
    }
}
