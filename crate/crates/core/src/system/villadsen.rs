use serde::{Deserialize, Serialize};

use super::map::{DiagonalMap, SeedEntry};
use super::space::{distance, SampledSpace};
use crate::error::{Error, Result};
use crate::linalg::AlgebraShape;

/// Parameters of a Villadsen-type system. Sequence entry `r` (0-based)
/// describes the seed from stage r+1 to stage r+2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VilladsenParams {
    pub base: SampledSpace,
    pub c: Vec<usize>,
    pub k: Vec<usize>,
    pub l: Vec<usize>,
    /// s[r][t]: copies of the coordinate projection π_t in seed r; Σ_t = l[r].
    #[serde(rename = "s_multiplicities", alias = "s")]
    pub s: Vec<Vec<usize>>,
    /// eval_points[r]: indices into the grid of stage r+1.
    pub eval_points: Vec<Vec<usize>>,
    pub n0: usize,
}

/// A composite coordinate projection from a later grid down to an earlier
/// one, with the number of seed copies it carries.
struct Path {
    mult: usize,
    table: Vec<usize>,
}

impl VilladsenParams {
    /// Number of seeds described, so stages 1..=steps()+1 exist.
    pub fn steps(&self) -> usize {
        self.c.len()
    }

    pub fn grids(&self, depth: usize) -> Vec<SampledSpace> {
        let mut out = vec![self.base.clone()];
        for r in 0..depth.saturating_sub(1) {
            let next = out[r].power(self.c[r]);
            out.push(next);
        }
        out
    }

    pub fn sizes(&self, depth: usize) -> Vec<usize> {
        let mut out = vec![self.n0];
        for r in 0..depth.saturating_sub(1) {
            out.push(out[r] * (self.l[r] + self.k[r]));
        }
        out
    }

    /// Structural checks for a system of `depth` stages. Point indices are
    /// checked against grid sizes computed arithmetically, so no grid is built.
    pub fn validate(&self, depth: usize) -> Result<()> {
        let need = depth.saturating_sub(1);
        for (name, len) in [("c", self.c.len()), ("k", self.k.len()), ("l", self.l.len()), ("s_multiplicities", self.s.len()), ("eval_points", self.eval_points.len())] {
            if len < need {
                return Err(Error::config(name, format!("needs {need} entries for depth {depth}, found {len}")));
            }
        }
        if self.n0 == 0 {
            return Err(Error::config("n0", "must be positive"));
        }
        let mut grid_len = self.base.len();
        for r in 0..need {
            if self.c[r] == 0 {
                return Err(Error::config(format!("c[{r}]"), "must be positive"));
            }
            if self.s[r].len() != self.c[r] {
                return Err(Error::config(format!("s_multiplicities[{r}]"), format!("needs one multiplicity per coordinate ({})", self.c[r])));
            }
            if self.s[r].iter().sum::<usize>() != self.l[r] {
                return Err(Error::config(format!("s_multiplicities[{r}]"), format!("multiplicities must sum to l[{r}] = {}", self.l[r])));
            }
            if self.k[r] == 0 {
                return Err(Error::Grid(format!("k[{r}] = 0: every seed needs at least one evaluation point")));
            }
            if self.eval_points[r].len() != self.k[r] {
                return Err(Error::Grid(format!("stage {} lists {} evaluation points, k = {}", r + 1, self.eval_points[r].len(), self.k[r])));
            }
            if let Some(&bad) = self.eval_points[r].iter().find(|&&x| x >= grid_len) {
                return Err(Error::Grid(format!("evaluation point {bad} is off the stage-{} grid", r + 1)));
            }
            grid_len = grid_len.pow(self.c[r] as u32);
        }
        Ok(())
    }

    /// Composite projections from stage `m` down to stage `i` (1-based), in
    /// lexicographic order of the coordinate choices, earliest stage slowest.
    fn paths(&self, grids: &[SampledSpace], i: usize, m: usize) -> Vec<Path> {
        if m == i {
            return vec![Path { mult: 1, table: (0..grids[i - 1].len()).collect() }];
        }
        let prev = self.paths(grids, i, m - 1);
        let xm = &grids[m - 1];
        let r = m - 2;
        let mut out = Vec::new();
        for p in &prev {
            for t in 0..self.c[r] {
                out.push(Path {
                    mult: p.mult * self.s[r][t],
                    table: (0..xm.len()).map(|x| p.table[xm.project(t, x)]).collect(),
                });
            }
        }
        out
    }
}

fn single_block(n: usize, samples: usize) -> AlgebraShape {
    AlgebraShape::new(&[(n, samples)]).expect("positive sizes")
}

/// The seed f ↦ diag(f∘π_1 (×s_1), …, f∘π_c (×s_c), f(x_1), …, f(x_k))
/// from stage i to stage i+1.
pub fn villadsen_seed(params: &VilladsenParams, i: usize) -> Result<DiagonalMap> {
    if i == 0 || i > params.steps() {
        return Err(Error::Depth(format!("no seed from stage {i}")));
    }
    params.validate(i + 1)?;
    let grids = params.grids(i + 1);
    let sizes = params.sizes(i + 1);
    let (src, tgt) = (&grids[i - 1], &grids[i]);
    let r = i - 1;
    let mut entries = Vec::new();
    for t in 0..params.c[r] {
        for _ in 0..params.s[r][t] {
            entries.push(SeedEntry { source: 0, points: (0..tgt.len()).map(|x| tgt.project(t, x)).collect() });
        }
    }
    for &e in &params.eval_points[r] {
        entries.push(SeedEntry { source: 0, points: vec![e; tgt.len()] });
    }
    DiagonalMap::new(single_block(sizes[r], src.len()), single_block(sizes[i], tgt.len()), vec![entries])
}

/// Closed-form seed of φ_{i,i'}: first the composite coordinate projections
/// (l_i⋯l_{i'-1} entries), then for m = i'-1 down to i the evaluations at
/// E_m pulled back along composite projections, each repeated
/// Π_{r=m+1}^{i'-1}(l_r + k_r) times.
pub fn composed_seed_villadsen(params: &VilladsenParams, i: usize, i2: usize) -> Result<DiagonalMap> {
    if i == 0 || i2 <= i {
        return Err(Error::Depth(format!("composed seed needs 1 ≤ i < i' (got {i}, {i2})")));
    }
    if i2 > params.steps() + 1 {
        return Err(Error::Depth(format!("stage {i2} exceeds the {} stages described", params.steps() + 1)));
    }
    if i2 == i + 1 {
        return villadsen_seed(params, i);
    }
    params.validate(i2)?;
    let grids = params.grids(i2);
    let sizes = params.sizes(i2);
    let target_len = grids[i2 - 1].len();
    let mut entries = Vec::new();
    for p in params.paths(&grids, i, i2) {
        for _ in 0..p.mult {
            entries.push(SeedEntry { source: 0, points: p.table.clone() });
        }
    }
    for m in (i..i2).rev() {
        let repeat: usize = (m + 1..i2).map(|r| params.l[r - 1] + params.k[r - 1]).product();
        for p in params.paths(&grids, i, m) {
            for _ in 0..p.mult {
                for &e in &params.eval_points[m - 1] {
                    for _ in 0..repeat {
                        entries.push(SeedEntry { source: 0, points: vec![p.table[e]; target_len] });
                    }
                }
            }
        }
    }
    DiagonalMap::new(single_block(sizes[i - 1], grids[i - 1].len()), single_block(sizes[i2 - 1], target_len), vec![entries])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub stage: usize,
    pub epsilon: f64,
    pub max_gap: f64,
    pub dense: bool,
    pub points_considered: usize,
}

/// Grid version of the density condition for stage i+1: E_{i+1} together
/// with every pullback of later E-points, as far as the parameters reach.
pub fn check_density(params: &VilladsenParams, i: usize, eps: f64) -> Result<DensityReport> {
    let last = params.steps();
    if i == 0 || i + 1 > last {
        return Err(Error::Depth(format!("density at stage {} needs evaluation points there", i + 1)));
    }
    params.validate(last + 1)?;
    let grids = params.grids(last);
    let mut set: Vec<usize> = params.eval_points[i].clone();
    for m in i + 2..=last {
        for p in params.paths(&grids, i + 1, m) {
            for &e in &params.eval_points[m - 1] {
                set.push(p.table[e]);
            }
        }
    }
    set.sort_unstable();
    set.dedup();
    let grid = &grids[i];
    let max_gap = grid
        .points
        .iter()
        .map(|x| set.iter().map(|&e| distance(x, &grid.points[e])).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(DensityReport { stage: i + 1, epsilon: eps, max_gap, dense: max_gap <= eps, points_considered: set.len() })
}

/// Partial products l_1⋯l_i / ((l_1+k_1)⋯(l_i+k_i)) for i = 1..=N.
pub fn check_ratio(l: &[usize], k: &[usize], n: usize) -> Vec<f64> {
    let mut acc = 1.0;
    l.iter()
        .zip(k)
        .take(n)
        .map(|(&l, &k)| {
            acc *= l as f64 / (l + k) as f64;
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn goodearl() -> VilladsenParams {
        VilladsenParams {
            base: SampledSpace::unit_interval(3).unwrap(),
            c: vec![1, 1, 1],
            k: vec![1, 1, 1],
            l: vec![1, 1, 1],
            s: vec![vec![1]; 3],
            eval_points: vec![vec![0]; 3],
            n0: 1,
        }
    }

    #[test]
    fn goodearl_seed_is_f_then_f0() {
        let m = villadsen_seed(&goodearl(), 1).unwrap();
        assert_eq!(m.entries[0][0].points, vec![0, 1, 2]);
        assert_eq!(m.entries[0][1].points, vec![0, 0, 0]);
    }

    #[test]
    fn villadsen_seed_uses_both_coordinates() {
        let p = VilladsenParams {
            base: SampledSpace::unit_interval(3).unwrap(),
            c: vec![2],
            k: vec![1],
            l: vec![2],
            s: vec![vec![1, 1]],
            eval_points: vec![vec![0]],
            n0: 1,
        };
        let m = villadsen_seed(&p, 1).unwrap();
        assert_eq!(m.target.blocks[0].size, 3);
        assert_eq!(m.target.blocks[0].samples, 9);
        let x2 = &p.grids(2)[1];
        for x in 0..9 {
            assert_eq!(m.entries[0][0].points[x], x2.project(0, x));
            assert_eq!(m.entries[0][1].points[x], x2.project(1, x));
            assert_eq!(m.entries[0][2].points[x], 0);
        }
    }

    #[test]
    fn zero_evaluation_points_are_rejected() {
        let mut p = goodearl();
        p.k[0] = 0;
        p.l[0] = 1;
        p.eval_points[0].clear();
        assert!(matches!(villadsen_seed(&p, 1), Err(Error::Grid(_))));
    }

    #[test]
    fn goodearl_tier_counts() {
        let m = composed_seed_villadsen(&goodearl(), 1, 3).unwrap();
        let list = &m.entries[0];
        assert_eq!(list.len(), 4);
        assert_eq!(list[0].points, vec![0, 1, 2]);
        assert!(list[1..].iter().all(|e| e.points == vec![0, 0, 0]));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(check_ratio(&[1, 1, 1], &[1, 1, 1], 3), vec![0.5, 0.25, 0.125]);
        let r = check_ratio(&[1, 4, 9], &[1, 1, 1], 3);
        for (a, b) in r.iter().zip([0.5, 0.4, 0.36]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(check_ratio(&[2, 2], &[0, 0], 2), vec![1.0, 1.0]);
    }

    #[test]
    fn density_measures_the_largest_gap() {
        let mut p = goodearl();
        let r = check_density(&p, 1, 0.6).unwrap();
        assert_eq!(r.max_gap, 1.0);
        assert!(!r.dense);
        p.eval_points = vec![vec![1]; 3];
        let r = check_density(&p, 1, 0.6).unwrap();
        assert_eq!(r.max_gap, 0.5);
        assert!(r.dense);
        assert!(!check_density(&p, 1, 0.4).unwrap().dense);
    }
}
