//! Corner generators, the stage families G_i and assembly of 𝔊.

pub mod assemble;
pub mod corner;
pub mod oz;
pub mod phi;
pub mod registry;

pub use assemble::{assemble_generator, assemble_gi, gi_terms, GeneratorBundle, GeneratorExport, StageCertificate};
pub use corner::{block_corner_generator, corner_generator, g_norm_cap, stage_g_family, BlockCorner, CornerGenerator, GEntry, GSummary, RAW_TOP};
pub use oz::{disjointify, interval_grid, olsen_zame};
pub use phi::{check_map_hypotheses, phi_inverse, phi_map};
pub use registry::{IntervalRegistry, RegistryEntry};

use crate::error::{Error, Result};
use crate::linalg::{word_closure, ClosurePolicy, Element};
use crate::report::{Check, VerificationReport, Worst};
use crate::scaffold::{build_lambda, QwuElements, QwuSets};
use crate::system::SystemSnapshot;
use crate::tolerance::Tolerances;

/// Relative gap kept between registry intervals and from every λ.
pub const REGISTRY_GAP: f64 = 0.1;

/// Builds G_1 … G_{N'} from the first N' D generators and assembles 𝔊.
pub fn synthesize(snap: &SystemSnapshot, qwu: &QwuSets, n_prime: usize, tol: &Tolerances) -> Result<GeneratorBundle> {
    let qwu = qwu.truncated(n_prime)?;
    if snap.d_generators.len() < n_prime {
        return Err(Error::Supply(format!("{n_prime} D generators needed, {} available", snap.d_generators.len())));
    }
    let el = qwu.elements(snap);
    let lambda0 = build_lambda(&qwu, &[], tol.lambda_clearance)?;
    let mut registry = IntervalRegistry::new(REGISTRY_GAP, lambda0.all());
    let mut g = Vec::with_capacity(n_prime);
    for i in 0..n_prime {
        g.push(stage_g_family(&snap.d_generators[i].element, &qwu, &el, snap, i, &mut registry, tol)?);
    }
    let spectra: Vec<Vec<f64>> = g.iter().flatten().map(|x| x.spectrum.clone()).collect();
    let lambda = build_lambda(&qwu, &spectra, tol.lambda_clearance)?;
    assemble_generator(&qwu, &el, g, lambda, registry)
}

/// (G1)–(G5) for every family in the bundle, plus the stage norm bounds.
pub fn verify_g_families(bundle: &GeneratorBundle, el: &QwuElements, snap: &SystemSnapshot, policy: &ClosurePolicy, tol: &Tolerances) -> Result<VerificationReport> {
    let mut rep = VerificationReport::default();
    let (mut g1, mut g5, mut g3) = (Worst::default(), Worst::default(), Worst::default());
    let mut g2 = f64::INFINITY;
    for gi in &bundle.g {
        for x in gi {
            let p = &el.w[x.stage][0][x.block][0];
            g1.update((&(p * &x.element) * p).distance(&x.element), || format!("g_{},{}", x.stage + 1, x.block + 1));
            let ratio = x.element.operator_norm() / g_norm_cap(x.stage, x.block);
            g5.update(ratio, || format!("g_{},{}", x.stage + 1, x.block + 1));
            g2 = g2.min(x.spectrum.iter().map(|z| z.abs()).fold(f64::INFINITY, f64::min));
        }
    }
    rep.push(g1.check("g.G1", "G1", tol.exact));
    rep.push(Check::at_least("g.G2", "G2", g2, tol.spectral_gap).with_detail("smallest |eigenvalue| inside the corner"));
    rep.push(g5.check("g.G5", "G5", 1.0).with_detail("largest norm divided by its cap"));

    let all: Vec<&GEntry> = bundle.g.iter().flatten().collect();
    let mut g4 = f64::INFINITY;
    for (a, x) in all.iter().enumerate() {
        for y in &all[..a] {
            for s in &x.spectrum {
                for t in &y.spectrum {
                    g4 = g4.min((s - t).abs());
                }
            }
        }
    }
    rep.push(Check::at_least("g.G4", "G4", g4, tol.spectral_gap).with_detail(format!("registry relative gap {:.3}", bundle.registry.min_relative_gap())));

    for (i, gi) in bundle.g.iter().enumerate() {
        let mut gens: Vec<Element> = el.u[i].iter().flatten().cloned().collect();
        gens.extend(gi.iter().map(|x| x.element.clone()));
        let span = word_closure(&gens, policy)?;
        let d = &snap.d_generators[i].element;
        g3.update(span.distance(d)?, || format!("d_{} (closure dimension {})", i + 1, span.dimension()));
    }
    rep.push(g3.check("g.G3", "G3", tol.membership));

    let mut worst_clear = f64::INFINITY;
    for x in &all {
        for s in &x.spectrum {
            for l in bundle.lambda.all() {
                worst_clear = worst_clear.min((s - l).abs());
            }
        }
    }
    rep.push(Check::at_least("g.lambda_disjoint", "Lambda", worst_clear, tol.lambda_clearance));

    let mut cert = Worst::default();
    let mut ok = true;
    for c in &bundle.certificates {
        ok &= c.holds;
        cert.update(c.norm / c.limit, || format!("stage {}", c.stage));
    }
    let mut check = cert.check("generator.norm_bound", "inequality", 1.0);
    if !ok {
        check.status = crate::report::Status::Fail;
    }
    rep.push(check);
    Ok(rep)
}
