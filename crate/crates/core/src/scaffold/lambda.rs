use serde::{Deserialize, Serialize};

use super::qwu::{QwuSets, SIndex};
use crate::error::{Error, Result};
use crate::report::{Check, VerificationReport};

const NUDGE: f64 = 1.0 - 1e-6;
const MAX_NUDGES: usize = 100;

/// λ_{i;j',j,k}, indexed [i][j'][j][k] like the Q sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSet {
    pub values: Vec<Vec<Vec<Vec<f64>>>>,
    pub nudges: usize,
}

impl LambdaSet {
    pub fn get(&self, idx: SIndex) -> f64 {
        self.values[idx.0][idx.1][idx.2][idx.3]
    }

    pub fn stage_sum(&self, i: usize) -> f64 {
        self.values[i].iter().flatten().flatten().sum()
    }

    pub fn all(&self) -> Vec<f64> {
        self.values.iter().flatten().flatten().flatten().copied().collect()
    }

    pub fn truncated(&self, len: usize) -> LambdaSet {
        LambdaSet { values: self.values[..len.min(self.values.len())].to_vec(), nudges: self.nudges }
    }
}

/// One geometric ladder 2^{-7-g} over all indices in lexicographic order,
/// so stage i (1-based) starts at or below 2^{-6-i} and sums to less than
/// 2^{-i-5}. Values within `clearance` of a spectrum point are shrunk by
/// a factor 1 − 1e-6 until clear.
pub fn build_lambda(qwu: &QwuSets, g_spectra: &[Vec<f64>], clearance: f64) -> Result<LambdaSet> {
    let points: Vec<f64> = g_spectra.iter().flatten().copied().collect();
    let near = |x: f64| points.iter().any(|&p| (p - x).abs() <= clearance);
    let mut g = 0i32;
    let mut nudges = 0;
    let mut values = Vec::with_capacity(qwu.stages());
    for qi in &qwu.q {
        let mut vi = Vec::with_capacity(qi.len());
        for group in qi {
            let mut vg = Vec::with_capacity(group.len());
            for qs in group {
                let mut vk = Vec::with_capacity(qs.len());
                for _ in qs {
                    let mut x = 2f64.powi(-7 - g);
                    let mut tries = 0;
                    while near(x) {
                        if tries == MAX_NUDGES {
                            return Err(Error::LambdaCollision { value: 2f64.powi(-7 - g) });
                        }
                        x *= NUDGE;
                        tries += 1;
                    }
                    nudges += tries;
                    vk.push(x);
                    g += 1;
                }
                vg.push(vk);
            }
            vi.push(vg);
        }
        values.push(vi);
    }
    Ok(LambdaSet { values, nudges })
}

/// Positivity, distinctness, the per-stage budget and clearance from the
/// given spectra.
pub fn verify_lambda(lambda: &LambdaSet, g_spectra: &[Vec<f64>], clearance: f64) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let all = lambda.all();
    rep.push(Check::flag("lambda.positive", "Lambda", all.iter().all(|&x| x > 0.0)));
    let mut sorted = all.clone();
    sorted.sort_by(f64::total_cmp);
    let min_sep = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    rep.push(Check::at_least("lambda.distinct", "Lambda", min_sep, f64::MIN_POSITIVE));
    let worst_ratio = (0..lambda.values.len())
        .map(|i| lambda.stage_sum(i) / 2f64.powi(-(i as i32 + 1) - 5))
        .fold(0.0, f64::max);
    rep.push(Check::at_most("lambda.budget", "Lambda", worst_ratio, 1.0).with_detail("largest stage sum divided by its budget"));
    let clear = all
        .iter()
        .flat_map(|&x| g_spectra.iter().flatten().map(move |&p| (p - x).abs()))
        .fold(f64::INFINITY, f64::min);
    rep.push(Check::at_least("lambda.spectral_clearance", "Lambda", clear, clearance));
    rep
}
