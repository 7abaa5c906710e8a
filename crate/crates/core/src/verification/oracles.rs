use crate::linalg::Element;
use crate::report::{Check, VerificationReport, Worst};
use crate::scaffold::{QwuElements, QwuSets, SIndex};
use crate::synthesis::GeneratorBundle;

use super::upt::LexOrder;

struct Ctx<'a> {
    qwu: &'a QwuSets,
    el: &'a QwuElements,
    bundle: &'a GeneratorBundle,
}

impl Ctx<'_> {
    fn kp(&self, i: usize) -> usize {
        self.qwu.selection.prev_blocks(i)
    }

    fn lam(&self, idx: SIndex) -> f64 {
        self.bundle.lambda.get(idx)
    }

    fn g(&self, r: usize, s: usize) -> &Element {
        &self.bundle.g[r][s].element
    }

    fn last(&self, i: usize, jp: usize, j: usize) -> SIndex {
        (i, jp, j, self.qwu.m(i, jp, j) - 1)
    }

    /// λ w for the index.
    fn lw(&self, idx: SIndex) -> Element {
        self.el.w(idx).scale(self.lam(idx))
    }

    /// The w terms q_{r;1,s,1}𝔊 carries besides g_{r,s}: every w of target
    /// block s except w_{r;1,s,1} itself.
    fn anchor_row_ws(&self, r: usize, s: usize) -> Vec<SIndex> {
        let kp = self.kp(r);
        let mut out = Vec::new();
        for jp in 0..kp {
            let first = usize::from(jp == 0);
            out.extend((first..self.qwu.m(r, jp, s)).map(|k| (r, jp, s, k)));
        }
        out
    }

    /// Right side of q𝔊 for q = q_{r;s',s,t} in R.
    fn q_g(&self, b: SIndex) -> Element {
        let (r, sp, s, t) = b;
        if sp == 0 && t == 0 {
            let mut out = self.g(r, s).clone();
            for idx in self.anchor_row_ws(r, s) {
                out.add_assign_scaled(self.el.w(idx), self.lam(idx));
            }
            out
        } else {
            self.el.q(b).scale(self.lam(b))
        }
    }

    /// The earlier-stage part of 𝔊q: λ w terms from stages before r.
    fn earlier_gq(&self, b: SIndex) -> Element {
        let (r, sp, _, _) = b;
        let q = self.el.q(b);
        let mut out = Element::zeros(q.shape());
        for i in 0..r.saturating_sub(1) {
            let idx = self.last(i, self.kp(i) - 1, self.qwu.selection.k[i] - 1);
            out = &out + &(&self.lw(idx) * q);
        }
        if r >= 1 {
            let idx = self.last(r - 1, self.kp(r - 1) - 1, sp);
            out = &out + &(&self.lw(idx) * q);
        }
        out
    }

    /// Right side of 𝔊q.
    fn g_q(&self, b: SIndex) -> Element {
        let (r, sp, s, t) = b;
        let mut out = self.earlier_gq(b);
        if sp == 0 && t == 0 {
            out = &out + self.g(r, s);
        } else {
            out.add_assign_scaled(self.el.q(b), self.lam(b));
            out.add_assign_scaled(self.el.w(b), self.lam(b));
        }
        out
    }

    /// Right side of P_n𝔊p_{n+1}.
    fn p_g_q(&self, b: SIndex) -> Element {
        let (_, sp, _, t) = b;
        let mut out = self.earlier_gq(b);
        if !(sp == 0 && t == 0) {
            out.add_assign_scaled(self.el.w(b), self.lam(b));
        }
        out
    }
}

/// Evaluates both sides of every product display over all of R.
pub fn action_oracles(bundle: &GeneratorBundle, qwu: &QwuSets, el: &QwuElements, tol: f64) -> VerificationReport {
    let ctx = Ctx { qwu, el, bundle };
    let gen = &bundle.generator;
    let order = LexOrder::new(qwu, el);
    let mut rep = VerificationReport::default();
    let (mut qg, mut qg_other, mut qgq, mut gq) = (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for &b in &order.indices {
        let q = el.q(b);
        let at = || format!("{b:?}");
        qg.update((q * gen).distance(&ctx.q_g(b)), at);
        for (i, term) in bundle.stage_terms.iter().enumerate() {
            if i != b.0 {
                qg_other.update((q * term).operator_norm(), || format!("{b:?} against stage {}", i + 1));
            }
        }
        let expect = if b.1 == 0 && b.3 == 0 { ctx.g(b.0, b.2).clone() } else { q.scale(ctx.lam(b)) };
        qgq.update((&(q * gen) * q).distance(&expect), at);
        gq.update((gen * q).distance(&ctx.g_q(b)), at);
    }
    rep.push(qg.check("oracle.qG", "qG", tol));
    rep.push(qg_other.check("oracle.qG_other_stages", "qG", tol));
    rep.push(qgq.check("oracle.qGq", "qGq", tol));
    rep.push(gq.check("oracle.Gq", "Gq", tol));

    let sums = order.partial_sums();
    let mut pp = Worst::default();
    for (n, pn) in sums.iter().enumerate().skip(1) {
        for (i, p) in order.projections.iter().enumerate() {
            let prod = pn * p;
            let err = if i < n { prod.distance(p) } else { prod.operator_norm() };
            pp.update(err, || format!("n = {n}, i = {}", i + 1));
        }
    }
    rep.push(pp.check("oracle.Pp", "Pp", tol));

    let (mut pgq, mut qgp) = (Worst::default(), Worst::default());
    for n in 0..order.len() {
        let b = order.indices[n];
        let p_next = &order.projections[n];
        let pn = &sums[n];
        pgq.update((&(pn * gen) * p_next).distance(&ctx.p_g_q(b)), || format!("n = {n}, p_(n+1) = {b:?}"));
        qgp.update((&(p_next * gen) * pn).operator_norm(), || format!("n = {n}, p_(n+1) = {b:?}"));
    }
    rep.push(pgq.check("oracle.PGq", "PGq", tol));
    rep.push(qgp.check("oracle.qGP", "qGP", tol));
    rep.push(Check::flag("oracle.lex_successor", "Lex", order.is_successor_order()));
    rep
}
