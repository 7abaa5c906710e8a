use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use stargen_core::linalg::{check_matrix_unit_axioms, AlgebraShape, CMat, Element};
use stargen_core::scaffold::BratteliData;
use stargen_core::synthesis::{phi_inverse, phi_map, IntervalRegistry};
use stargen_core::system::{apply_map, compose_maps, DiagonalMap, SeedEntry, SystemSnapshot};

fn cmat(n: usize, vals: &[(f64, f64)]) -> CMat {
    DMatrix::from_fn(n, n, |r, c| {
        let (a, b) = vals[(r * n + c) % vals.len()];
        Complex64::new(a, b)
    })
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)
}

/// Random Bratteli diagram: first stage sizes, then incidence matrices
/// [source][target] with entries in 1..=2 so every block is reached.
fn bratteli() -> impl Strategy<Value = BratteliData> {
    (prop::collection::vec(1usize..3, 1..3), prop::collection::vec((1usize..3, prop::collection::vec(1usize..3, 4)), 1..3)).prop_map(|(first, steps)| {
        let mut sizes = vec![first];
        let mut incidence = Vec::new();
        for (targets, mult) in steps {
            let src = sizes.last().unwrap().clone();
            let inc: Vec<Vec<usize>> = (0..src.len()).map(|s| (0..targets).map(|t| mult[(s + t) % mult.len()]).collect()).collect();
            let next = (0..targets).map(|t| (0..src.len()).map(|s| src[s] * inc[s][t]).sum()).collect();
            incidence.push(inc);
            sizes.push(next);
        }
        BratteliData::new(sizes, incidence).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn phi_is_a_star_homomorphism(c in 1usize..3, k in 1usize..4, x in entries(), y in entries()) {
        let n = c * k;
        let shape = AlgebraShape::matrix(n);
        let vs: Vec<Element> = (0..k)
            .map(|l| {
                let mut v = Element::zeros(&shape);
                for a in 0..c {
                    v.get_mut(0, 0)[(a, l * c + a)] = Complex64::new(1.0, 0.0);
                }
                v
            })
            .collect();
        let corner = |vals: &[(f64, f64)], shift: usize| -> Vec<Vec<Element>> {
            (0..k)
                .map(|r| {
                    (0..k)
                        .map(|s| {
                            let small = cmat(c, &vals[(r * k + s + shift) % vals.len()..]);
                            let mut e = DMatrix::zeros(n, n);
                            e.view_mut((0, 0), (c, c)).copy_from(&small);
                            Element::new(shape.clone(), vec![vec![e]]).unwrap()
                        })
                        .collect()
                })
                .collect()
        };
        let b1 = corner(&x, 0);
        let b2 = corner(&y, 1);
        let prod: Vec<Vec<Element>> = (0..k)
            .map(|r| (0..k).map(|s| (0..k).fold(Element::zeros(&shape), |acc, t| &acc + &(&b1[r][t] * &b2[t][s]))).collect())
            .collect();
        let p1 = phi_map(&vs, &b1).unwrap();
        let p2 = phi_map(&vs, &b2).unwrap();
        prop_assert!((&p1 * &p2).distance(&phi_map(&vs, &prod).unwrap()) < 1e-10);

        let adj: Vec<Vec<Element>> = (0..k).map(|r| (0..k).map(|s| b1[s][r].adjoint()).collect()).collect();
        prop_assert!(p1.adjoint().distance(&phi_map(&vs, &adj).unwrap()) < 1e-12);

        let back = phi_inverse(&p1, &vs);
        for r in 0..k {
            for s in 0..k {
                prop_assert!(back[r][s].distance(&b1[r][s]) < 1e-12);
            }
        }
    }

    #[test]
    fn pushed_matrix_units_stay_matrix_units(b in bratteli()) {
        let snap = SystemSnapshot::af(&b, 1).unwrap();
        let top = snap.depth();
        for st in 1..=top {
            for (j, &n) in snap.stages[st - 1].sizes.iter().enumerate() {
                let units: Vec<Vec<Element>> = (0..n).map(|r| (0..n).map(|c| snap.unit(st, j, r, c)).collect()).collect();
                let unit = (0..n).fold(Element::zeros(&snap.ambient()), |acc, r| &acc + &units[r][r]);
                let rep = check_matrix_unit_axioms(&units, &unit, 1e-12);
                prop_assert!(rep.pass, "stage {st} block {j}: {rep:?}");
            }
        }
        let total = snap.stages[0].sizes.iter().enumerate().fold(Element::zeros(&snap.ambient()), |acc, (j, &n)| {
            (0..n).fold(acc, |a, r| &a + &snap.unit(1, j, r, r))
        });
        prop_assert!(total.distance(&Element::identity(&snap.ambient())) < 1e-12);
    }

    #[test]
    fn seed_maps_compose_and_respect_products(
        samples in 1usize..4,
        picks in prop::collection::vec(0usize..16, 12),
        x in entries(),
        y in entries(),
    ) {
        let a = AlgebraShape::new(&[(1, samples), (2, samples)]).unwrap();
        let b = AlgebraShape::new(&[(3, samples), (4, samples)]).unwrap();
        let c = AlgebraShape::new(&[(7, 2)]).unwrap();
        let pts = |o: usize, len: usize| (0..len).map(|t| picks[(o + t) % picks.len()] % samples).collect::<Vec<_>>();
        let first = DiagonalMap::new(a.clone(), b.clone(), vec![
            vec![SeedEntry { source: 0, points: pts(0, samples) }, SeedEntry { source: 1, points: pts(1, samples) }],
            vec![SeedEntry { source: 1, points: pts(2, samples) }, SeedEntry { source: 1, points: pts(3, samples) }],
        ]).unwrap();
        let second = DiagonalMap::new(b.clone(), c.clone(), vec![vec![
            SeedEntry { source: 0, points: vec![picks[4] % samples, picks[5] % samples] },
            SeedEntry { source: 1, points: vec![picks[6] % samples, picks[7] % samples] },
        ]]).unwrap();
        prop_assert!(first.is_unital() && second.is_unital());

        let elem = |vals: &[(f64, f64)]| Element::from_fn(&a, |j, s| cmat(a.blocks[j].size, &vals[(j + s) % vals.len()..]));
        let (ex, ey) = (elem(&x), elem(&y));
        let fx = apply_map(&first, &ex).unwrap();
        let fy = apply_map(&first, &ey).unwrap();
        prop_assert!(apply_map(&first, &(&ex * &ey)).unwrap().distance(&(&fx * &fy)) < 1e-10);
        prop_assert!(apply_map(&first, &ex.adjoint()).unwrap().distance(&fx.adjoint()) < 1e-12);

        let composed = compose_maps(&second, &first).unwrap();
        let direct = apply_map(&second, &fx).unwrap();
        prop_assert!(apply_map(&composed, &ex).unwrap().distance(&direct) < 1e-12);
    }

    #[test]
    fn registry_intervals_are_separated(
        requests in prop::collection::vec((0.01f64..1.0, 1.0f64..4.0), 1..12),
        avoid in prop::collection::vec(1e-4f64..1.0, 0..6),
    ) {
        let mut reg = IntervalRegistry::new(0.1, avoid.clone());
        for (k, (cap, ratio)) in requests.iter().enumerate() {
            let c = reg.allocate(k, 0, *cap, *ratio).unwrap();
            prop_assert!(c <= *cap && c > 0.0);
        }
        prop_assert!(reg.min_relative_gap() >= 0.1 * (1.0 - 1e-6));
        for e in &reg.entries {
            prop_assert!(avoid.iter().all(|&x| x < e.lo || x > e.hi));
        }
    }
}
