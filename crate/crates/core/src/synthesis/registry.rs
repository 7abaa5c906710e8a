use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub stage: usize,
    pub block: usize,
    pub lo: f64,
    pub hi: f64,
    pub scale: f64,
}

/// Global allocation of spectral intervals for the g_{i,j}. Each new
/// interval [c, ρc] sits below all earlier ones with a relative gap, and
/// keeps the same relative distance from every avoided point (the λ values).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalRegistry {
    pub entries: Vec<RegistryEntry>,
    pub gap: f64,
    pub avoid: Vec<f64>,
}

impl IntervalRegistry {
    pub fn new(gap: f64, avoid: Vec<f64>) -> Self {
        IntervalRegistry { entries: Vec::new(), gap, avoid }
    }

    /// Largest scale c ≤ `max_scale` such that [c, ratio·c] fits. Returns c.
    pub fn allocate(&mut self, stage: usize, block: usize, max_scale: f64, ratio: f64) -> Result<f64> {
        let g = 1.0 + self.gap;
        let mut c = max_scale;
        if let Some(lowest) = self.entries.iter().map(|e| e.lo).reduce(f64::min) {
            c = c.min(lowest / g / ratio);
        }
        for _ in 0..10_000 {
            if !(c > f64::MIN_POSITIVE * 1e10) {
                break;
            }
            let (lo, hi) = (c / g, c * ratio * g);
            match self.avoid.iter().copied().filter(|&x| x >= lo && x <= hi).reduce(f64::max) {
                None => {
                    self.entries.push(RegistryEntry { stage, block, lo: c, hi: c * ratio, scale: c });
                    return Ok(c);
                }
                Some(x) => c = x / g / ratio * (1.0 - 1e-9),
            }
        }
        Err(Error::IntervalSupply(format!("no room for the interval of stage {}, block {}", stage + 1, block + 1)))
    }

    pub fn entry(&self, stage: usize, block: usize) -> Option<&RegistryEntry> {
        self.entries.iter().find(|e| e.stage == stage && e.block == block)
    }

    /// Smallest relative gap between allocated intervals, or between an
    /// interval and an avoided point.
    pub fn min_relative_gap(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (k, a) in self.entries.iter().enumerate() {
            for b in &self.entries[..k] {
                let (low, high) = if a.hi < b.lo { (a, b) } else { (b, a) };
                best = best.min(high.lo / low.hi - 1.0);
            }
            for &x in &self.avoid {
                let rel = if x < a.lo { a.lo / x - 1.0 } else if x > a.hi { x / a.hi - 1.0 } else { -1.0 };
                best = best.min(rel);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals_go_down_and_skip_points() {
        let mut r = IntervalRegistry::new(0.1, vec![0.01]);
        let a = r.allocate(0, 0, 0.05, 1.25).unwrap();
        assert_eq!(a, 0.05);
        let b = r.allocate(1, 0, 0.05, 1.25).unwrap();
        assert!(b * 1.25 * 1.1 <= 0.05 * (1.0 + 1e-12));
        let c = r.allocate(2, 0, 0.0085, 1.25).unwrap();
        assert!(c * 1.25 * 1.1 < 0.01);
        assert!(r.min_relative_gap() >= 0.1 - 1e-9);
    }
}
