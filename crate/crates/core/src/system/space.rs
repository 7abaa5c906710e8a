use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    #[default]
    Base,
    Power { parent: Box<SampledSpace>, c: usize },
}

/// A finite sample cloud standing in for a compact space. Points are stored
/// as coordinate tuples; a zero-dimensional space is a single point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSpace {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl SampledSpace {
    pub fn point() -> Self {
        SampledSpace { dim: 0, points: vec![vec![]], provenance: Provenance::Base }
    }

    /// `g` equally spaced samples of [0, 1].
    pub fn unit_interval(g: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::Grid("an interval grid needs at least one point".into()));
        }
        let points = if g == 1 {
            vec![vec![0.0]]
        } else {
            (0..g).map(|k| vec![k as f64 / (g - 1) as f64]).collect()
        };
        Ok(SampledSpace { dim: 1, points, provenance: Provenance::Base })
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::Grid("empty point list".into()))?;
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Grid("points have different coordinate counts".into()));
        }
        for (a, p) in points.iter().enumerate() {
            if points[..a].iter().any(|q| q == p) {
                return Err(Error::Grid(format!("point {a} is repeated")));
            }
        }
        Ok(SampledSpace { dim, points, provenance: Provenance::Base })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The c-fold Cartesian power; the first factor varies slowest.
    pub fn power(&self, c: usize) -> Self {
        let p = self.len();
        let total = p.pow(c as u32);
        let points = (0..total)
            .map(|idx| {
                let mut coords = Vec::with_capacity(self.dim * c);
                for s in 0..c {
                    coords.extend_from_slice(&self.points[digit(idx, s, c, p)]);
                }
                coords
            })
            .collect();
        SampledSpace {
            dim: self.dim * c,
            points,
            provenance: Provenance::Power { parent: Box::new(self.clone()), c },
        }
    }

    /// Coordinate projection π_s (0-based s) to the parent grid.
    pub fn project(&self, s: usize, idx: usize) -> usize {
        match &self.provenance {
            Provenance::Power { parent, c } => digit(idx, s, *c, parent.len()),
            Provenance::Base => panic!("coordinate projection on a base space"),
        }
    }

    pub fn power_factor(&self) -> usize {
        match &self.provenance {
            Provenance::Power { c, .. } => *c,
            Provenance::Base => 1,
        }
    }

    /// Index of the grid point with the given coordinates. With `snap`, the
    /// nearest grid point is used instead of demanding an exact match.
    pub fn locate(&self, coords: &[f64], snap: bool) -> Result<usize> {
        if coords.len() != self.dim {
            return Err(Error::Grid(format!("point has {} coordinates, grid has {}", coords.len(), self.dim)));
        }
        let (best, d) = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, distance(p, coords)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("grids are nonempty");
        if d <= 1e-12 || snap {
            Ok(best)
        } else {
            Err(Error::Grid(format!("point {coords:?} is not a grid point (nearest at distance {d:.3e})")))
        }
    }
}

fn digit(idx: usize, s: usize, c: usize, p: usize) -> usize {
    (idx / p.pow((c - 1 - s) as u32)) % p
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_projections_recover_factors() {
        let x = SampledSpace::unit_interval(3).unwrap();
        let x2 = x.power(2);
        assert_eq!(x2.len(), 9);
        assert_eq!(x2.dim, 2);
        for idx in 0..9 {
            let p = &x2.points[idx];
            assert_eq!(x.points[x2.project(0, idx)][0], p[0]);
            assert_eq!(x.points[x2.project(1, idx)][0], p[1]);
        }
    }

    #[test]
    fn locate_requires_grid_points_unless_snapping() {
        let x = SampledSpace::unit_interval(3).unwrap();
        assert_eq!(x.locate(&[0.5], false).unwrap(), 1);
        assert!(x.locate(&[0.3], false).is_err());
        assert_eq!(x.locate(&[0.3], true).unwrap(), 1);
    }
}
