//! Complex Schur decomposition, eigenvalue reordering and Riesz projections.

use num_complex::Complex64;

use super::element::{CMat, ONE, ZERO};
use crate::error::{Error, Result};

/// A = Q T Q* with Q unitary and T upper triangular.
#[derive(Clone, Debug)]
pub struct Schur {
    pub q: CMat,
    pub t: CMat,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|k| self.t[(k, k)]).collect()
    }
}

/// A unitary 2x2 rotation whose first column is (x, y)/|(x, y)|.
#[derive(Clone, Copy)]
struct Rot {
    g1: Complex64,
    g2: Complex64,
}

impl Rot {
    fn new(x: Complex64, y: Complex64) -> Rot {
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        if r == 0.0 {
            Rot { g1: ONE, g2: ZERO }
        } else {
            Rot { g1: x / r, g2: y / r }
        }
    }

    /// rows (k, k+1) ← R* rows, over columns in `cols`.
    fn apply_left(&self, m: &mut CMat, k: usize, cols: std::ops::Range<usize>) {
        let (g1, g2) = (self.g1, self.g2);
        for c in cols {
            let a = m[(k, c)];
            let b = m[(k + 1, c)];
            m[(k, c)] = g1.conj() * a + g2.conj() * b;
            m[(k + 1, c)] = -g2 * a + g1 * b;
        }
    }

    /// columns (k, k+1) ← columns · R, over rows in `rows`.
    fn apply_right(&self, m: &mut CMat, k: usize, rows: std::ops::Range<usize>) {
        let (g1, g2) = (self.g1, self.g2);
        for r in rows {
            let a = m[(r, k)];
            let b = m[(r, k + 1)];
            m[(r, k)] = a * g1 + b * g2;
            m[(r, k + 1)] = -a * g2.conj() + b * g1.conj();
        }
    }
}

fn hessenberg(a: &mut CMat, q: &mut CMat) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut v: Vec<Complex64> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 { ONE } else { v[0] / v[0].norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A ← H A with H = I − 2 v v*, acting on rows k+1..n
        for c in 0..n {
            let mut s = ZERO;
            for i in 0..len {
                s += v[i].conj() * a[(k + 1 + i, c)];
            }
            s *= 2.0;
            for i in 0..len {
                a[(k + 1 + i, c)] -= v[i] * s;
            }
        }
        // A ← A H and Q ← Q H, acting on columns k+1..n
        for m in [&mut *a, &mut *q] {
            for r in 0..n {
                let mut s = ZERO;
                for i in 0..len {
                    s += m[(r, k + 1 + i)] * v[i];
                }
                s *= 2.0;
                for i in 0..len {
                    m[(r, k + 1 + i)] -= s * v[i].conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mu1 = (a + d) * 0.5 + disc;
    let mu2 = (a + d) * 0.5 - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Complex Schur form by Householder reduction to Hessenberg form followed by
/// shifted QR sweeps with deflation.
pub fn schur(m: &CMat) -> Result<Schur> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "schur needs a square matrix");
    let mut t = m.clone();
    let mut q = CMat::identity(n, n);
    if n <= 1 {
        return Ok(Schur { q, t });
    }
    hessenberg(&mut t, &mut q);
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            let mut diag = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= eps * diag {
                t[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(Error::NoConvergence(n));
        }
        let mut mu = wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)]);
        if iter % 10 == 0 {
            mu = t[(hi, hi)] + Complex64::new(0.75 * t[(hi, hi - 1)].norm(), 0.0);
        }
        for k in l..hi {
            let rot = if k == l {
                Rot::new(t[(l, l)] - mu, t[(l + 1, l)])
            } else {
                Rot::new(t[(k, k - 1)], t[(k + 1, k - 1)])
            };
            let c0 = if k == l { l } else { k - 1 };
            rot.apply_left(&mut t, k, c0..n);
            let r1 = (k + 3).min(hi + 1);
            rot.apply_right(&mut t, k, 0..r1);
            rot.apply_right(&mut q, k, 0..n);
            if k > l {
                t[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    for c in 0..n {
        for r in c + 1..n {
            t[(r, c)] = ZERO;
        }
    }
    Ok(Schur { q, t })
}

/// Swap the diagonal entries k and k+1 of the triangular factor in place.
fn swap_adjacent(s: &mut Schur, k: usize) {
    let n = s.t.nrows();
    let a = s.t[(k, k)];
    let b = s.t[(k, k + 1)];
    let c = s.t[(k + 1, k + 1)];
    // (b, c − a) spans the eigenvector of the 2x2 block for eigenvalue c.
    let rot = Rot::new(b, c - a);
    rot.apply_left(&mut s.t, k, k..n);
    rot.apply_right(&mut s.t, k, 0..k + 2);
    rot.apply_right(&mut s.q, k, 0..n);
    s.t[(k + 1, k)] = ZERO;
    s.t[(k, k)] = c;
    s.t[(k + 1, k + 1)] = a;
}

/// Move the flagged diagonal entries to the leading positions, keeping their
/// relative order. Returns the number of flagged entries.
pub fn reorder(s: &mut Schur, selected: &[bool]) -> usize {
    let mut flags = selected.to_vec();
    let mut pos = 0;
    for k in 0..flags.len() {
        if flags[k] {
            for m in (pos..k).rev() {
                swap_adjacent(s, m);
                flags.swap(m, m + 1);
            }
            pos += 1;
        }
    }
    pos
}

/// Solve T11 X − X T22 = C for upper-triangular T11, T22.
pub fn solve_triangular_sylvester(t11: &CMat, t22: &CMat, c: &CMat) -> CMat {
    let m = t11.nrows();
    let n = t22.nrows();
    let mut x = CMat::zeros(m, n);
    for j in 0..n {
        let mut rhs: Vec<Complex64> = (0..m).map(|i| c[(i, j)]).collect();
        for k in 0..j {
            let t = t22[(k, j)];
            if t != ZERO {
                for i in 0..m {
                    rhs[i] += x[(i, k)] * t;
                }
            }
        }
        let shift = t22[(j, j)];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for k in i + 1..m {
                s -= t11[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / (t11[(i, i)] - shift);
        }
    }
    x
}

/// A set of eigenvalues to project onto.
#[derive(Clone, Debug, PartialEq)]
pub enum Cluster {
    /// Eigenvalues within the tolerance of any listed point.
    Points(Vec<Complex64>),
    /// Eigenvalues in the real interval [lo, hi], up to the tolerance.
    Interval { lo: f64, hi: f64 },
    All,
}

impl Cluster {
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        match self {
            Cluster::Points(ps) => ps.iter().any(|p| (p - z).norm() <= tol),
            Cluster::Interval { lo, hi } => z.im.abs() <= tol && z.re >= lo - tol && z.re <= hi + tol,
            Cluster::All => true,
        }
    }
}

/// Orthogonal projection onto the invariant subspace of the eigenvalues in
/// `cluster`, read off the leading vectors of a reordered Schur form. This is
/// the range projection of the Riesz idempotent, without forming it.
pub fn spectral_subspace_projection(m: &CMat, cluster: &Cluster, delta: f64) -> Result<CMat> {
    let n = m.nrows();
    let mut s = schur(m)?;
    let flags = cluster_flags(&s, cluster, delta)?;
    let k = reorder(&mut s, &flags);
    let qk = s.q.view((0, 0), (n, k)).into_owned();
    Ok(&qk * qk.adjoint())
}

fn cluster_flags(s: &Schur, cluster: &Cluster, delta: f64) -> Result<Vec<bool>> {
    let eig = s.eigenvalues();
    let flags: Vec<bool> = eig.iter().map(|&z| cluster.contains(z, delta / 2.0)).collect();
    let mut gap = f64::INFINITY;
    for (i, &a) in eig.iter().enumerate() {
        for (j, &b) in eig.iter().enumerate() {
            if flags[i] && !flags[j] {
                gap = gap.min((a - b).norm());
            }
        }
    }
    if gap < delta {
        return Err(Error::SpectralGap { gap, required: delta });
    }
    Ok(flags)
}

/// Spectral (Riesz) idempotent of `m` for the eigenvalues in `cluster`.
/// Membership uses tolerance δ/2; the cluster must be separated from the
/// remaining eigenvalues by at least δ.
pub fn riesz_projection(m: &CMat, cluster: &Cluster, delta: f64) -> Result<CMat> {
    let n = m.nrows();
    let mut s = schur(m)?;
    let flags = cluster_flags(&s, cluster, delta)?;
    let k = reorder(&mut s, &flags);
    if k == 0 {
        return Ok(CMat::zeros(n, n));
    }
    if k == n {
        return Ok(CMat::identity(n, n));
    }
    let t11 = s.t.view((0, 0), (k, k)).into_owned();
    let t12 = s.t.view((0, k), (k, n - k)).into_owned();
    let t22 = s.t.view((k, k), (n - k, n - k)).into_owned();
    let x = solve_triangular_sylvester(&t11, &t22, &(-t12));
    let mut p = CMat::zeros(n, n);
    for i in 0..k {
        p[(i, i)] = ONE;
    }
    p.view_mut((0, k), (k, n - k)).copy_from(&(-x));
    Ok(&s.q * p * s.q.adjoint())
}

/// Eigenvalues via the Schur form, sorted by (re, im) for reproducible output.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let mut ev = schur(m)?.eigenvalues();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> CMat {
        CMat::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn real(rows: &[&[f64]]) -> CMat {
        CMat::from_fn(rows.len(), rows.len(), |r, c| Complex64::new(rows[r][c], 0.0))
    }

    fn max_dev(a: &CMat, b: &CMat) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn schur_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..12 {
            let a = random(n, &mut rng);
            let s = schur(&a).unwrap();
            let back = &s.q * &s.t * s.q.adjoint();
            assert!(max_dev(&back, &a) < 1e-12, "n={n}");
            assert!(max_dev(&(s.q.adjoint() * &s.q), &CMat::identity(n, n)) < 1e-12);
            for c in 0..n {
                for r in c + 1..n {
                    assert_eq!(s.t[(r, c)], ZERO);
                }
            }
        }
    }

    #[test]
    fn triangular_input_keeps_its_diagonal() {
        let a = real(&[&[1.0, 5.0], &[0.0, 3.0]]);
        let ev = eigenvalues(&a).unwrap();
        assert!((ev[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reorder_preserves_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(7, &mut rng);
        let mut s = schur(&a).unwrap();
        let before = s.eigenvalues();
        let flags: Vec<bool> = (0..7).map(|i| i % 3 == 2).collect();
        let k = reorder(&mut s, &flags);
        assert_eq!(k, 2);
        assert!((s.t[(0, 0)] - before[2]).norm() < 1e-10);
        assert!((s.t[(1, 1)] - before[5]).norm() < 1e-10);
        let back = &s.q * &s.t * s.q.adjoint();
        assert!(max_dev(&back, &a) < 1e-12);
    }

    #[test]
    fn riesz_examples() {
        let d = real(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let p = riesz_projection(&d, &Cluster::Points(vec![ONE]), 0.1).unwrap();
        assert!(max_dev(&p, &real(&[&[1.0, 0.0], &[0.0, 0.0]])) < 1e-12);

        let m = real(&[&[1.0, 1.0], &[0.0, 2.0]]);
        let p = riesz_projection(&m, &Cluster::Points(vec![ONE]), 0.1).unwrap();
        assert!(max_dev(&p, &real(&[&[1.0, -1.0], &[0.0, 0.0]])) < 1e-12);
        assert!(max_dev(&(&p * &p), &p) < 1e-12);

        let p = riesz_projection(&m, &Cluster::All, 0.1).unwrap();
        assert!(max_dev(&p, &CMat::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn riesz_rejects_unseparated_clusters() {
        let m = real(&[&[1.0, 0.0], &[0.0, 1.05]]);
        let err = riesz_projection(&m, &Cluster::Points(vec![ONE]), 0.1).unwrap_err();
        assert!(matches!(err, Error::SpectralGap { .. }));
    }

    #[test]
    fn riesz_partition_sums_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 6;
        let mut t = random(n, &mut rng);
        for c in 0..n {
            t[(c, c)] = Complex64::new(c as f64, 0.0);
            for r in c + 1..n {
                t[(r, c)] = ZERO;
            }
        }
        let u = random(n, &mut rng).qr().q();
        let a = &u * t * u.adjoint();
        let mut sum = CMat::zeros(n, n);
        for c in 0..n {
            let p = riesz_projection(&a, &Cluster::Points(vec![Complex64::new(c as f64, 0.0)]), 0.5).unwrap();
            assert!(max_dev(&(&p * &p), &p) < 1e-8);
            assert!(max_dev(&(&a * &p), &(&p * &a)) < 1e-8);
            sum += p;
        }
        assert!(max_dev(&sum, &CMat::identity(n, n)) < 1e-8);
    }
}
