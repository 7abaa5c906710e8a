use super::snapshot::SystemSnapshot;
use crate::error::{Error, Result};
use crate::linalg::element::matrix_norm;
use crate::linalg::Element;

pub const WITNESS_THRESHOLD: f64 = 1e-12;

/// Smallest stage i₀ ≥ `stage` such that φ_{stage,i'}(b) is nonzero at every
/// sample of every block for all i' in [i₀, N]. `None` when even the last
/// stage has a zero fibre.
pub fn simplicity_witness(b: &Element, stage: usize, snap: &SystemSnapshot, threshold: f64) -> Result<Option<usize>> {
    if b.shape() != &snap.shape(stage) {
        return Err(Error::Shape(format!("element does not have the shape of stage {stage}")));
    }
    if b.max_abs() == 0.0 {
        return Err(Error::ZeroElement);
    }
    let mut witness = None;
    for i2 in (stage..=snap.depth()).rev() {
        let pushed = snap.push_to(b, stage, i2)?;
        let nowhere_zero = pushed.data().iter().flatten().all(|m| matrix_norm(m) >= threshold);
        if !nowhere_zero {
            break;
        }
        witness = Some(i2);
    }
    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::element::ONE;
    use crate::linalg::CMat;
    use crate::pipeline::{build_snapshot, Preset, RunConfig};

    /// Grid {0, ½, 1}; every seed evaluates at the point 0.
    fn goodearl() -> SystemSnapshot {
        build_snapshot(&RunConfig::preset(Preset::Goodearl, 3, 2)).unwrap()
    }

    fn function(snap: &SystemSnapshot, f: impl Fn(f64) -> f64) -> Element {
        let pts = &snap.stages[0].spaces[0].points;
        Element::from_fn(&snap.shape(1), |_, s| CMat::from_element(1, 1, ONE * f(pts[s][0])))
    }

    #[test]
    fn unit_is_its_own_witness() {
        let snap = goodearl();
        let one = Element::identity(&snap.shape(1));
        assert_eq!(simplicity_witness(&one, 1, &snap, WITNESS_THRESHOLD).unwrap(), Some(1));
    }

    #[test]
    fn zero_is_rejected() {
        let snap = goodearl();
        let z = Element::zeros(&snap.shape(1));
        assert!(matches!(simplicity_witness(&z, 1, &snap, WITNESS_THRESHOLD), Err(Error::ZeroElement)));
    }

    #[test]
    fn evaluation_point_fills_a_zero_one_stage_later() {
        let snap = goodearl();
        let f = function(&snap, |t| 1.0 - t);
        assert_eq!(simplicity_witness(&f, 1, &snap, WITNESS_THRESHOLD).unwrap(), Some(2));
    }

    #[test]
    fn zero_at_the_evaluation_point_is_never_filled() {
        let snap = goodearl();
        let f = function(&snap, |t| t);
        assert_eq!(simplicity_witness(&f, 1, &snap, WITNESS_THRESHOLD).unwrap(), None);
    }
}
