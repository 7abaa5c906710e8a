//! Independent checks of a synthesized generator: upper-triangular
//! structure, projection extraction, product identities, recovery of the
//! scaffold and single generation.

pub mod oracles;
pub mod recovery;
pub mod single;
pub mod upt;

pub use oracles::action_oracles;
pub use recovery::{extraction_clusters, recover_scaffold, Recovered, CLUSTER_SEPARATION};
pub use single::{generation_targets, verify_single_generation, SingleGeneration};
pub use upt::{extract_projections, verify_upt, LexOrder, UptSummary};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ClosurePolicy;
    use crate::scaffold::{build_qwu, select_stages, BratteliData, QwuSets};
    use crate::synthesis::{synthesize, GeneratorBundle};
    use crate::system::SystemSnapshot;
    use crate::tolerance::Tolerances;

    fn uhf2(depth: usize, n_prime: usize) -> (SystemSnapshot, QwuSets, GeneratorBundle) {
        let sizes = (0..depth).map(|r| vec![2usize << r]).collect();
        let b = BratteliData::new(sizes, vec![vec![vec![2]]; depth - 1]).unwrap();
        let snap = SystemSnapshot::af(&b, 4).unwrap();
        let sel = select_stages(&b, depth, 1).unwrap();
        let qwu = build_qwu(&snap, &sel).unwrap().truncated(n_prime).unwrap();
        let bundle = synthesize(&snap, &qwu, n_prime, &Tolerances::default()).unwrap();
        (snap, qwu, bundle)
    }

    #[test]
    fn uhf_generator_passes_structure_checks() {
        let (snap, qwu, bundle) = uhf2(3, 2);
        let tol = Tolerances::default();
        let el = qwu.elements(&snap);
        let order = LexOrder::new(&qwu, &el);
        assert!(order.is_successor_order());
        let (rep, _) = verify_upt(&bundle.generator, &order.projections, bundle.tail_bound, tol.identity, tol.spectral_gap).unwrap();
        assert!(rep.all_pass(), "{:#?}", rep.failures());
        let rep = action_oracles(&bundle, &qwu, &el, tol.identity);
        assert!(rep.all_pass(), "{:#?}", rep.failures());

        let clusters = extraction_clusters(&bundle, &order).unwrap();
        let q_hat = extract_projections(&bundle.generator, &clusters).unwrap();
        let policy = ClosurePolicy::with_length(10);
        let (rep, _) = recover_scaffold(&bundle, &qwu, &el, &q_hat, &snap, &policy, tol.recovery, tol.membership).unwrap();
        assert!(rep.all_pass(), "{:#?}", rep.failures());
    }

    #[test]
    fn corrupted_lambda_is_detected() {
        let (snap, qwu, mut bundle) = uhf2(3, 2);
        let tol = Tolerances::default();
        let el = qwu.elements(&snap);
        let order = LexOrder::new(&qwu, &el);
        let q_hat = extract_projections(&bundle.generator, &extraction_clusters(&bundle, &order).unwrap()).unwrap();
        bundle.lambda.values[1][0][0][1] *= 1.0 + 1e-6;
        let (rep, _) = recover_scaffold(&bundle, &qwu, &el, &q_hat, &snap, &ClosurePolicy::with_length(10), tol.recovery, tol.membership).unwrap();
        let w = rep.get("recovery.w").unwrap();
        assert!(!w.passed());
        assert!(w.value > 5e-7);
    }

    #[test]
    fn uhf_single_generation() {
        let (snap, qwu, bundle) = uhf2(3, 2);
        let policy = ClosurePolicy::with_length(40);
        let (rep, s) = verify_single_generation(&bundle, &snap, &qwu, &policy, 1e-4).unwrap();
        assert!(rep.all_pass(), "{:#?} {s:?}", rep.failures());
    }
}
