use serde::{Deserialize, Serialize};

use super::bratteli::BratteliData;
use crate::error::{Error, Result};

/// A strictly increasing choice of stages s_1 < s_2 < … together with the
/// block data read off at those stages. Index i below is 0-based, so
/// `s[0]` is s_1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSelection {
    pub s: Vec<usize>,
    /// 𝖪_i, the block count at s_i.
    pub k: Vec<usize>,
    /// 𝖭_{i,j}.
    pub n: Vec<Vec<usize>>,
    /// 𝖬_{i;j',j}, indexed [i][j'][j]. The first entry has a single source
    /// row equal to the block sizes of s_1.
    pub m: Vec<Vec<Vec<usize>>>,
    pub floor: usize,
}

impl StageSelection {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// 𝖪_{i-1} for 0-based i, with the convention 𝖪_0 = 1.
    pub fn prev_blocks(&self, i: usize) -> usize {
        if i == 0 {
            1
        } else {
            self.k[i - 1]
        }
    }

    /// Keeps the first `len` selected stages.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InsufficientDepth(format!(
                "{len} selected stages requested, {} available",
                self.len()
            )));
        }
        Ok(StageSelection {
            s: self.s[..len].to_vec(),
            k: self.k[..len].to_vec(),
            n: self.n[..len].to_vec(),
            m: self.m[..len].to_vec(),
            floor: self.floor,
        })
    }
}

/// Greedy selection over stages 1..=depth: s_1 is the first stage whose
/// blocks all have size > 1, and each later s_{i+1} is the first stage
/// after s_i where every multiplicity from s_i exceeds `floor`.
pub fn select_stages(bratteli: &BratteliData, depth: usize, floor: usize) -> Result<StageSelection> {
    let depth = depth.min(bratteli.depth());
    if depth < 2 {
        return Err(Error::InsufficientDepth(
            "a selection needs at least two stages in the truncation".into(),
        ));
    }
    let first = (1..=depth)
        .find(|&st| bratteli.sizes[st - 1].iter().all(|&n| n > 1))
        .ok_or_else(|| Error::InsufficientDepth("no stage has every block size n > 1".into()))?;
    let mut sel = StageSelection {
        s: vec![first],
        k: vec![bratteli.blocks(first)],
        n: vec![bratteli.sizes[first - 1].clone()],
        m: vec![vec![bratteli.sizes[first - 1].clone()]],
        floor,
    };
    let mut cur = first;
    for next in first + 1..=depth {
        let m = bratteli.multiplicities(cur, next)?;
        if m.iter().flatten().all(|&x| x > floor) {
            sel.s.push(next);
            sel.k.push(bratteli.blocks(next));
            sel.n.push(bratteli.sizes[next - 1].clone());
            sel.m.push(m);
            cur = next;
        }
    }
    if sel.len() < 2 {
        return Err(Error::InsufficientDepth(format!(
            "no stage after {first} has every multiplicity > {floor}"
        )));
    }
    Ok(sel)
}
