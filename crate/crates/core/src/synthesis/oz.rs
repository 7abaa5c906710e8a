use crate::error::{Error, Result};
use crate::linalg::{corner_eigenvalues, Element};

/// `count` disjoint closed intervals inside [lo, hi]: equal slots, each
/// trimmed by a fifth on both sides.
pub fn interval_grid(lo: f64, hi: f64, count: usize) -> Vec<(f64, f64)> {
    let slot = (hi - lo) / count as f64;
    (0..count)
        .map(|k| {
            let a = lo + k as f64 * slot;
            (a + 0.2 * slot, a + 0.8 * slot)
        })
        .collect()
}

fn check_intervals(intervals: &[(f64, f64)]) -> Result<()> {
    for (k, &(a, b)) in intervals.iter().enumerate() {
        if !(a <= b) || (a <= 0.0 && b >= 0.0) {
            return Err(Error::config(format!("intervals[{k}]"), "intervals must be ordered and avoid 0"));
        }
        for &(c, d) in &intervals[..k] {
            if a <= d && c <= b {
                return Err(Error::config(format!("intervals[{k}]"), "intervals must be pairwise disjoint"));
            }
        }
    }
    Ok(())
}

/// Moves each self-adjoint `s` (living in the corner of `unit`) affinely
/// into its own interval, then pads with distinct multiples of `unit` up to
/// `count_target` elements. Affine maps with positive slope keep the
/// generated algebra unchanged once the unit is present.
pub fn disjointify(s: &[Element], unit: &Element, count_target: usize, intervals: &[(f64, f64)]) -> Result<Vec<Element>> {
    check_intervals(intervals)?;
    let needed = count_target.max(s.len());
    if intervals.len() < needed {
        return Err(Error::IntervalSupply(format!("{needed} intervals needed, {} supplied", intervals.len())));
    }
    let mut out = Vec::with_capacity(needed);
    for (x, &(lo, hi)) in s.iter().zip(intervals) {
        let ev = corner_eigenvalues(x, unit)?;
        let (smin, smax) = (ev[0], ev[ev.len() - 1]);
        let width = smax - smin;
        if width <= 1e-12 * smax.abs().max(smin.abs()).max(1.0) {
            out.push(unit.scale(0.5 * (lo + hi)));
        } else {
            let alpha = (hi - lo) / width;
            let mut r = x.scale(alpha);
            r.add_assign_scaled(unit, lo - alpha * smin);
            out.push(r);
        }
    }
    for &(lo, hi) in &intervals[s.len()..needed] {
        out.push(unit.scale(0.5 * (lo + hi)));
    }
    Ok(out)
}

/// The upper-triangular k×k matrix over the corner filled row by row with
/// a_1, a_2, …, a_{k(k+1)/2}. Entries are returned as a k×k grid.
pub fn olsen_zame(a: &[Element], k: usize, unit: &Element, delta: f64) -> Result<Vec<Vec<Element>>> {
    if a.len() != k * (k + 1) / 2 {
        return Err(Error::Shape(format!("{} entries supplied, {} needed for k = {k}", a.len(), k * (k + 1) / 2)));
    }
    let spectra: Vec<Vec<f64>> = a.iter().map(|x| corner_eigenvalues(x, unit)).collect::<Result<_>>()?;
    let mut gap = f64::INFINITY;
    for (r, sr) in spectra.iter().enumerate() {
        if sr.iter().any(|x| x.abs() < delta) {
            return Err(Error::SpectralGap { gap: sr.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min), required: delta });
        }
        for ss in &spectra[..r] {
            for x in sr {
                for y in ss {
                    gap = gap.min((x - y).abs());
                }
            }
        }
    }
    if gap < delta {
        return Err(Error::SpectralGap { gap, required: delta });
    }
    let zero = Element::zeros(unit.shape());
    let mut it = a.iter();
    Ok((0..k)
        .map(|r| (0..k).map(|c| if c < r { zero.clone() } else { it.next().expect("count checked").clone() }).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{word_closure, AlgebraShape, CMat, ClosurePolicy};
    use num_complex::Complex64;

    fn m2(entries: [[f64; 2]; 2]) -> Element {
        Element::from_fn(&AlgebraShape::matrix(2), |_, _| CMat::from_fn(2, 2, |r, c| Complex64::new(entries[r][c], 0.0)))
    }

    #[test]
    fn affine_map_into_interval() {
        let id = Element::identity(&AlgebraShape::matrix(2));
        let out = disjointify(&[m2([[-1.0, 0.0], [0.0, 1.0]])], &id, 1, &[(3.0, 4.0)]).unwrap();
        assert!(out[0].distance(&m2([[3.0, 0.0], [0.0, 4.0]])) < 1e-14);
    }

    #[test]
    fn unit_alone_goes_to_midpoint() {
        let id = Element::identity(&AlgebraShape::matrix(2));
        let out = disjointify(&[id.clone()], &id, 1, &[(2.0, 3.0)]).unwrap();
        assert!(out[0].distance(&id.scale(2.5)) < 1e-14);
    }

    #[test]
    fn closure_is_preserved() {
        let id = Element::identity(&AlgebraShape::matrix(2));
        let s = vec![m2([[1.0, 0.0], [0.0, -1.0]]), m2([[0.0, 1.0], [1.0, 0.0]])];
        let policy = ClosurePolicy::default();
        let mut before = s.clone();
        before.push(id.clone());
        let mut after = disjointify(&s, &id, 3, &interval_grid(1.0, 1.25, 3)).unwrap();
        after.push(id);
        assert_eq!(word_closure(&before, &policy).unwrap().dimension(), 4);
        assert_eq!(word_closure(&after, &policy).unwrap().dimension(), 4);
    }

    #[test]
    fn too_few_intervals() {
        let id = Element::identity(&AlgebraShape::matrix(1));
        assert!(matches!(disjointify(&[], &id, 3, &[(1.0, 2.0)]), Err(Error::IntervalSupply(_))));
    }

    #[test]
    fn overlapping_spectra_are_rejected() {
        let id = Element::identity(&AlgebraShape::matrix(1));
        let a = vec![id.scale(1.0), id.scale(1.0), id.scale(2.0)];
        assert!(matches!(olsen_zame(&a, 2, &id, 1e-6), Err(Error::SpectralGap { .. })));
    }
}
