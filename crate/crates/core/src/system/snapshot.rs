use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::map::{compose_maps, DiagonalMap, SeedEntry};
use super::space::SampledSpace;
use super::villadsen::{villadsen_seed, VilladsenParams};
use crate::error::{Error, Result};
use crate::linalg::element::ONE;
use crate::linalg::{AlgebraShape, CMat, Element};
use crate::scaffold::BratteliData;

/// One stage B_i = ⊕_j M_{n_{i,j}}(C(X_{i,j})).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub sizes: Vec<usize>,
    pub spaces: Vec<SampledSpace>,
}

impl Stage {
    pub fn shape(&self) -> AlgebraShape {
        let blocks: Vec<(usize, usize)> = self.sizes.iter().zip(&self.spaces).map(|(&n, x)| (n, x.len())).collect();
        AlgebraShape::new(&blocks).expect("stage sizes are validated on construction")
    }
}

/// Where a D generator comes from: p ⊗ f (⊗ h in a tensored system).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DProvenance {
    pub stage: usize,
    pub block: usize,
    pub unit: usize,
    pub function: String,
    pub tensor_basis: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DGenerator {
    pub provenance: DProvenance,
    pub element: Element,
}

/// A finite truncation of an inductive system, with every earlier stage
/// pushed forward into the last one.
#[derive(Clone, Debug)]
pub struct SystemSnapshot {
    pub stages: Vec<Stage>,
    pub maps: Vec<DiagonalMap>,
    /// φ_{i,N} for i = 1..=N (the last one is the identity).
    pub pushforward: Vec<DiagonalMap>,
    pub tensor_dim: usize,
    pub af_skeleton: BratteliData,
    pub d_generators: Vec<DGenerator>,
    pub villadsen: Option<VilladsenParams>,
}

/// Real functions on a sample grid: coordinates, then pairwise products.
pub fn function_ladder(space: &SampledSpace) -> Vec<(String, Vec<f64>)> {
    if space.dim == 0 {
        return vec![("1".into(), vec![1.0; space.len()])];
    }
    let coord = |a: usize| space.points.iter().map(|p| p[a]).collect::<Vec<f64>>();
    let mut out: Vec<(String, Vec<f64>)> = (0..space.dim).map(|a| (format!("x{}", a + 1), coord(a))).collect();
    for a in 0..space.dim {
        for b in a..space.dim {
            let (ca, cb) = (coord(a), coord(b));
            out.push((format!("x{}*x{}", a + 1, b + 1), ca.iter().zip(&cb).map(|(u, v)| u * v).collect()));
        }
    }
    out
}

/// Basis of the self-adjoint part of M_c: diagonal units, then e_ab + e_ba
/// and i(e_ba − e_ab) for a < b.
pub fn hermitian_basis(c: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for a in 0..c {
        let mut m = CMat::zeros(c, c);
        m[(a, a)] = ONE;
        out.push(m);
    }
    for a in 0..c {
        for b in a + 1..c {
            let mut m = CMat::zeros(c, c);
            m[(a, b)] = ONE;
            m[(b, a)] = ONE;
            out.push(m);
            let mut m = CMat::zeros(c, c);
            m[(a, b)] = Complex64::new(0.0, -1.0);
            m[(b, a)] = Complex64::new(0.0, 1.0);
            out.push(m);
        }
    }
    out
}

impl SystemSnapshot {
    /// Builds a snapshot from stages and connecting maps (in skeleton units)
    /// and enumerates the first `d_count` D generators.
    pub fn new(stages: Vec<Stage>, maps: Vec<DiagonalMap>, d_count: usize) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Depth("a system needs at least one stage".into()));
        }
        if maps.len() + 1 != stages.len() {
            return Err(Error::Shape("one connecting map per step is required".into()));
        }
        for (r, st) in stages.iter().enumerate() {
            if st.sizes.len() != st.spaces.len() || st.sizes.is_empty() {
                return Err(Error::Shape(format!("stage {} needs one space per block", r + 1)));
            }
        }
        for (r, m) in maps.iter().enumerate() {
            m.validate()?;
            if m.source != stages[r].shape() || m.target != stages[r + 1].shape() {
                return Err(Error::Shape(format!("map {} does not connect stages {} and {}", r + 1, r + 1, r + 2)));
            }
            if !m.is_unital() {
                return Err(Error::Shape(format!("map {} is not unital", r + 1)));
            }
        }
        let n = stages.len();
        let mut pushforward = vec![DiagonalMap::identity(&stages[n - 1].shape())];
        for r in (0..n - 1).rev() {
            let next = compose_maps(&pushforward[0], &maps[r])?;
            pushforward.insert(0, next);
        }
        let af_skeleton = BratteliData::new(
            stages.iter().map(|s| s.sizes.clone()).collect(),
            maps.iter().map(|m| m.incidence()).collect(),
        )?;
        let mut snap = SystemSnapshot {
            stages,
            maps,
            pushforward,
            tensor_dim: 1,
            af_skeleton,
            d_generators: Vec::new(),
            villadsen: None,
        };
        snap.d_generators = snap.build_d_generators(d_count)?;
        Ok(snap)
    }

    pub fn villadsen(params: &VilladsenParams, depth: usize, d_count: usize) -> Result<Self> {
        params.validate(depth)?;
        let grids = params.grids(depth);
        let sizes = params.sizes(depth);
        let stages = grids.into_iter().zip(sizes).map(|(x, n)| Stage { sizes: vec![n], spaces: vec![x] }).collect();
        let maps = (1..depth).map(|i| villadsen_seed(params, i)).collect::<Result<Vec<_>>>()?;
        let mut snap = Self::new(stages, maps, d_count)?;
        snap.villadsen = Some(params.clone());
        Ok(snap)
    }

    /// A pure AF system over one-point spaces. Each target block lists its
    /// sources in block order, each repeated by its multiplicity.
    pub fn af(bratteli: &BratteliData, d_count: usize) -> Result<Self> {
        bratteli.validate()?;
        let stages: Vec<Stage> = bratteli
            .sizes
            .iter()
            .map(|s| Stage { sizes: s.clone(), spaces: vec![SampledSpace::point(); s.len()] })
            .collect();
        let maps = bratteli
            .incidence
            .iter()
            .enumerate()
            .map(|(r, m)| {
                let entries = (0..stages[r + 1].sizes.len())
                    .map(|j| {
                        (0..m.len())
                            .flat_map(|jp| (0..m[jp][j]).map(move |_| SeedEntry { source: jp, points: vec![0] }))
                            .collect()
                    })
                    .collect();
                DiagonalMap::new(stages[r].shape(), stages[r + 1].shape(), entries)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(stages, maps, d_count)
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    /// Shape of stage i (1-based) including the tensor factor.
    pub fn shape(&self, stage: usize) -> AlgebraShape {
        self.stages[stage - 1].shape().kron(self.tensor_dim)
    }

    pub fn ambient(&self) -> AlgebraShape {
        self.shape(self.depth())
    }

    /// φ_{i,i'} in skeleton units.
    pub fn map_between(&self, i: usize, i2: usize) -> Result<DiagonalMap> {
        if i == 0 || i2 < i || i2 > self.depth() {
            return Err(Error::Depth(format!("no map from stage {i} to stage {i2}")));
        }
        let mut acc = DiagonalMap::identity(&self.stages[i - 1].shape());
        for r in i..i2 {
            acc = compose_maps(&self.maps[r - 1], &acc)?;
        }
        Ok(acc)
    }

    /// Push an element of stage i into the last stage.
    pub fn push(&self, e: &Element, stage: usize) -> Result<Element> {
        self.pushforward[stage - 1].apply(e)
    }

    /// Push an element of stage i into stage i2.
    pub fn push_to(&self, e: &Element, stage: usize, i2: usize) -> Result<Element> {
        self.map_between(stage, i2)?.apply(e)
    }

    /// e_{row,col} ⊗ 1 of a block at the given stage, as a stage element.
    pub fn unit_local(&self, stage: usize, block: usize, row: usize, col: usize) -> Element {
        let shape = self.shape(stage);
        let c = self.tensor_dim;
        Element::from_fn(&shape, |j, _| {
            let n = shape.blocks[j].size;
            let mut m = CMat::zeros(n, n);
            if j == block {
                for a in 0..c {
                    m[(row * c + a, col * c + a)] = ONE;
                }
            }
            m
        })
    }

    /// e_{row,col} ⊗ 1 of a block at the given stage, pushed to the last stage.
    pub fn unit(&self, stage: usize, block: usize, row: usize, col: usize) -> Element {
        self.push(&self.unit_local(stage, block, row, col), stage)
            .expect("stage units always have the stage shape")
    }

    /// Total number of enumerable D generators.
    pub fn d_supply(&self) -> usize {
        let per: usize = self
            .stages
            .iter()
            .map(|s| s.sizes.iter().zip(&s.spaces).map(|(&n, x)| n * function_ladder(x).len()).sum::<usize>())
            .sum();
        per * self.tensor_dim * self.tensor_dim
    }

    /// The first m members of the D-generator enumeration: stage-major,
    /// block-major, unit-major, ladder-minor (and tensor basis innermost).
    pub fn build_d_generators(&self, m: usize) -> Result<Vec<DGenerator>> {
        let supply = self.d_supply();
        if m > supply {
            return Err(Error::Supply(format!("{m} D generators requested, only {supply} enumerable")));
        }
        let c = self.tensor_dim;
        let basis = hermitian_basis(c);
        let mut out = Vec::with_capacity(m);
        'outer: for (si, st) in self.stages.iter().enumerate() {
            let stage = si + 1;
            let shape = self.shape(stage);
            for (j, (&n, x)) in st.sizes.iter().zip(&st.spaces).enumerate() {
                let ladder = function_ladder(x);
                for a in 0..n {
                    for (name, values) in &ladder {
                        for (hb, h) in basis.iter().enumerate() {
                            if out.len() == m {
                                break 'outer;
                            }
                            let local = Element::from_fn(&shape, |jj, xx| {
                                let size = shape.blocks[jj].size;
                                let mut mat = CMat::zeros(size, size);
                                if jj == j {
                                    let v = Complex64::new(values[xx], 0.0);
                                    mat.view_mut((a * c, a * c), (c, c)).copy_from(&(h * v));
                                }
                                mat
                            });
                            out.push(DGenerator {
                                provenance: DProvenance {
                                    stage,
                                    block: j,
                                    unit: a,
                                    function: name.clone(),
                                    tensor_basis: (c > 1).then_some(hb),
                                },
                                element: self.push(&local, stage)?,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Diagonal units of every stage, pushed forward (the algebra D_0).
    pub fn diagonal_units(&self) -> Vec<Element> {
        let mut out = Vec::new();
        for (si, st) in self.stages.iter().enumerate() {
            for (j, &n) in st.sizes.iter().enumerate() {
                for a in 0..n {
                    out.push(self.unit(si + 1, j, a, a));
                }
            }
        }
        out
    }

    /// The system with every block tensored by M_c.
    pub fn tensor_with(&self, c: usize, max_ambient: usize) -> Result<SystemSnapshot> {
        if c == 0 {
            return Err(Error::config("tensor", "tensor factor must be positive"));
        }
        let new_dim = self.tensor_dim * c;
        let flat = self.stages[self.depth() - 1].shape().kron(new_dim).flat_len();
        if flat > max_ambient {
            return Err(Error::Resource(format!("tensored ambient dimension {flat} exceeds {max_ambient}")));
        }
        let mut out = self.clone();
        out.tensor_dim = new_dim;
        if c > 1 {
            let basis = hermitian_basis(c);
            out.d_generators = self
                .d_generators
                .iter()
                .flat_map(|d| {
                    basis.iter().enumerate().map(move |(hb, h)| {
                        let base = d.provenance.tensor_basis.unwrap_or(0) * c * c;
                        DGenerator {
                            provenance: DProvenance { tensor_basis: Some(base + hb), ..d.provenance.clone() },
                            element: d.element.kron(h),
                        }
                    })
                })
                .collect();
        }
        Ok(out)
    }

    pub fn export(&self) -> SnapshotExport {
        let n = self.depth();
        SnapshotExport {
            depth: n,
            tensor_dim: self.tensor_dim,
            stages: self.stages.iter().map(|s| StageExport { sizes: s.sizes.clone(), spaces: s.spaces.iter().map(|x| x.points.clone()).collect() }).collect(),
            maps: self.maps.clone(),
            composed_multiplicities: (1..=n).map(|i| self.af_skeleton.multiplicities(i, n).expect("valid stage range")).collect(),
            d_generators: self.d_generators.iter().map(|d| d.provenance.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageExport {
    pub sizes: Vec<usize>,
    pub spaces: Vec<Vec<Vec<f64>>>,
}

/// JSON form of a snapshot: shapes, maps as index tables, multiplicities of
/// every stage into the last one, and where the D generators come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotExport {
    pub depth: usize,
    pub tensor_dim: usize,
    pub stages: Vec<StageExport>,
    pub maps: Vec<DiagonalMap>,
    pub composed_multiplicities: Vec<Vec<Vec<usize>>>,
    pub d_generators: Vec<DProvenance>,
}
