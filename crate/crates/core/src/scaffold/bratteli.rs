use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Block sizes per stage and multiplicity matrices per step. Stages are
/// numbered from 1; `incidence[r]` is the step from stage r+1 to r+2 and is
/// indexed [source block][target block].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BratteliData {
    pub sizes: Vec<Vec<usize>>,
    pub incidence: Vec<Vec<Vec<usize>>>,
}

impl BratteliData {
    pub fn new(sizes: Vec<Vec<usize>>, incidence: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let b = BratteliData { sizes, incidence };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::config("sizes", "at least one stage is required"));
        }
        if self.incidence.len() + 1 != self.sizes.len() {
            return Err(Error::config("incidence", "one matrix per step between consecutive stages"));
        }
        for (r, m) in self.incidence.iter().enumerate() {
            let (src, tgt) = (&self.sizes[r], &self.sizes[r + 1]);
            if m.len() != src.len() || m.iter().any(|row| row.len() != tgt.len()) {
                return Err(Error::config(format!("incidence[{r}]"), "matrix must be (source blocks) x (target blocks)"));
            }
            for (j, &n) in tgt.iter().enumerate() {
                let filled: usize = (0..src.len()).map(|jp| m[jp][j] * src[jp]).sum();
                if filled != n {
                    return Err(Error::config(
                        format!("sizes[{}][{j}]", r + 1),
                        format!("unital embedding needs size {filled}, found {n}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.sizes.len()
    }

    pub fn blocks(&self, stage: usize) -> usize {
        self.sizes[stage - 1].len()
    }

    /// m_{i0,i;j',j}: product of the step matrices from stage i0 to stage i.
    pub fn multiplicities(&self, i0: usize, i: usize) -> Result<Vec<Vec<usize>>> {
        if i0 == 0 || i < i0 || i > self.depth() {
            return Err(Error::Depth(format!("no multiplicities from stage {i0} to stage {i}")));
        }
        let k = self.blocks(i0);
        let mut acc: Vec<Vec<usize>> = (0..k).map(|a| (0..k).map(|b| usize::from(a == b)).collect()).collect();
        for r in i0..i {
            let step = &self.incidence[r - 1];
            let cols = self.blocks(r + 1);
            acc = acc
                .iter()
                .map(|row| (0..cols).map(|j| row.iter().zip(step).map(|(a, s)| a * s[j]).sum()).collect())
                .collect();
        }
        Ok(acc)
    }
}

pub fn multiplicities(b: &BratteliData, i0: usize, i: usize) -> Result<Vec<Vec<usize>>> {
    b.multiplicities(i0, i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uhf2(depth: usize) -> BratteliData {
        let sizes = (0..depth).map(|r| vec![2usize << r]).collect();
        BratteliData::new(sizes, vec![vec![vec![2]]; depth - 1]).unwrap()
    }

    #[test]
    fn uhf_multiplicities_multiply() {
        let b = uhf2(4);
        assert_eq!(b.multiplicities(1, 1).unwrap(), vec![vec![1]]);
        assert_eq!(b.multiplicities(1, 3).unwrap(), vec![vec![4]]);
    }

    #[test]
    fn inconsistent_sizes_are_rejected() {
        assert!(BratteliData::new(vec![vec![2], vec![5]], vec![vec![vec![2]]]).is_err());
    }
}
