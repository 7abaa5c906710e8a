use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::selection::StageSelection;
use crate::error::{Error, Result};
use crate::linalg::{word_closure, ClosurePolicy, Element};
use crate::report::{Check, VerificationReport, Worst};
use crate::system::SystemSnapshot;

/// A matrix unit e_{row,col} of one block at one (unselected) stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitRef {
    pub stage: usize,
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

impl UnitRef {
    pub fn element(&self, snap: &SystemSnapshot) -> Element {
        snap.unit(self.stage, self.block, self.row, self.col)
    }
}

/// Index key of a member of S (or of the matching w and λ): selected stage,
/// source block j', target block j, position k. All 0-based.
pub type SIndex = (usize, usize, usize, usize);

/// The projection sets Q, partial isometries W and U, and the anchors
/// p_{i,j'} through which consecutive stages are linked.
///
/// `q[i][j'][j][k]` and `w[i][j'][j][k]` follow the 0-based (i, j', j, k)
/// index; `u[i][j]` lists U_{i,j} with its range projection first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QwuSets {
    pub selection: StageSelection,
    pub q: Vec<Vec<Vec<Vec<UnitRef>>>>,
    pub w: Vec<Vec<Vec<Vec<UnitRef>>>>,
    pub u: Vec<Vec<Vec<UnitRef>>>,
    /// I_{i,j}: the row shared by every member of W_{i;·,j} and U_{i,j}.
    pub row_index: Vec<Vec<usize>>,
    /// `anchors[i][j]` is the last q of the last source group of stage i,
    /// target block j. It is the projection that stage i+1 refines.
    pub anchors: Vec<Vec<UnitRef>>,
}

fn diag(stage: usize, block: usize, a: usize) -> UnitRef {
    UnitRef { stage, block, row: a, col: a }
}

/// Builds Q, W and U over every selected stage. Stage 1 takes all diagonal
/// units of each block; stage i+1 splits the anchor of stage i along the
/// copies the connecting map makes of it, in map-entry order.
pub fn build_qwu(snap: &SystemSnapshot, sel: &StageSelection) -> Result<QwuSets> {
    if sel.is_empty() {
        return Err(Error::InsufficientDepth("empty stage selection".into()));
    }
    if let Some(&last) = sel.s.last() {
        if last > snap.depth() {
            return Err(Error::InsufficientDepth(format!("selected stage {last} exceeds depth {}", snap.depth())));
        }
    }
    let mut out = QwuSets {
        selection: sel.clone(),
        q: Vec::new(),
        w: Vec::new(),
        u: Vec::new(),
        row_index: Vec::new(),
        anchors: Vec::new(),
    };
    for i in 0..sel.len() {
        let stage = sel.s[i];
        let kp = sel.prev_blocks(i);
        let mut qi: Vec<Vec<Vec<UnitRef>>> = vec![vec![Vec::new(); sel.k[i]]; kp];
        if i == 0 {
            for (j, &n) in sel.n[0].iter().enumerate() {
                qi[0][j] = (0..n).map(|a| diag(stage, j, a)).collect();
            }
        } else {
            let map = snap.map_between(sel.s[i - 1], stage)?;
            for (jp, group) in qi.iter_mut().enumerate() {
                let big_j = out.anchors[i - 1][jp].row;
                for (j, slot) in group.iter_mut().enumerate() {
                    *slot = map.positions(jp, j, big_j).into_iter().map(|a| diag(stage, j, a)).collect();
                    if slot.len() != sel.m[i][jp][j] {
                        return Err(Error::Shape(format!(
                            "stage {stage}: block {jp} appears {} times in block {j}, expected {}",
                            slot.len(),
                            sel.m[i][jp][j]
                        )));
                    }
                }
            }
        }
        let rows: Vec<usize> = (0..sel.k[i])
            .map(|j| qi[0][j].first().map(|q| q.row).ok_or_else(|| Error::Shape(format!("stage {stage}: empty first group for block {j}"))))
            .collect::<Result<_>>()?;
        let wi: Vec<Vec<Vec<UnitRef>>> = qi
            .iter()
            .map(|group| {
                group
                    .iter()
                    .enumerate()
                    .map(|(j, qs)| qs.iter().map(|q| UnitRef { row: rows[j], ..*q }).collect())
                    .collect()
            })
            .collect();
        let ui: Vec<Vec<UnitRef>> = (0..sel.k[i])
            .map(|j| {
                let big_i = rows[j];
                std::iter::once(big_i)
                    .chain((0..sel.n[i][j]).filter(|&c| c != big_i))
                    .map(|c| UnitRef { stage, block: j, row: big_i, col: c })
                    .collect()
            })
            .collect();
        let anchors: Vec<UnitRef> = (0..sel.k[i])
            .map(|j| *qi[kp - 1][j].last().expect("multiplicities are positive"))
            .collect();
        out.q.push(qi);
        out.w.push(wi);
        out.u.push(ui);
        out.row_index.push(rows);
        out.anchors.push(anchors);
    }
    Ok(out)
}

impl QwuSets {
    pub fn stages(&self) -> usize {
        self.q.len()
    }

    /// Keeps the first `len` selected stages.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        let selection = self.selection.truncated(len)?;
        Ok(QwuSets {
            selection,
            q: self.q[..len].to_vec(),
            w: self.w[..len].to_vec(),
            u: self.u[..len].to_vec(),
            row_index: self.row_index[..len].to_vec(),
            anchors: self.anchors[..len].to_vec(),
        })
    }

    /// 𝖬_{i;j',j}.
    pub fn m(&self, i: usize, jp: usize, j: usize) -> usize {
        self.q[i][jp][j].len()
    }

    /// Whether (i, j', j, k) names an anchor, i.e. a member of S outside R.
    pub fn is_anchor(&self, idx: SIndex) -> bool {
        let (i, jp, j, k) = idx;
        jp + 1 == self.selection.prev_blocks(i) && k + 1 == self.m(i, jp, j)
    }

    /// Every index of S in lexicographic order.
    pub fn s_indices(&self) -> Vec<SIndex> {
        let mut out = Vec::new();
        for (i, qi) in self.q.iter().enumerate() {
            for (jp, group) in qi.iter().enumerate() {
                for (j, qs) in group.iter().enumerate() {
                    out.extend((0..qs.len()).map(|k| (i, jp, j, k)));
                }
            }
        }
        out
    }

    /// Indices of R = S without the anchors, in lexicographic order.
    pub fn r_indices(&self) -> Vec<SIndex> {
        self.s_indices().into_iter().filter(|&x| !self.is_anchor(x)).collect()
    }

    pub fn q_ref(&self, idx: SIndex) -> UnitRef {
        self.q[idx.0][idx.1][idx.2][idx.3]
    }

    pub fn w_ref(&self, idx: SIndex) -> UnitRef {
        self.w[idx.0][idx.1][idx.2][idx.3]
    }

    /// The element of every q, w, u and anchor, pushed to the last stage.
    pub fn elements(&self, snap: &SystemSnapshot) -> QwuElements {
        let q = self.q.iter().map(|qi| qi.iter().map(|g| g.iter().map(|qs| qs.iter().map(|r| r.element(snap)).collect()).collect()).collect()).collect();
        let w = self.w.iter().map(|wi| wi.iter().map(|g| g.iter().map(|ws| ws.iter().map(|r| r.element(snap)).collect()).collect()).collect()).collect();
        let u = self.u.iter().map(|ui| ui.iter().map(|us| us.iter().map(|r| r.element(snap)).collect()).collect()).collect();
        let anchors = self.anchors.iter().map(|a| a.iter().map(|r| r.element(snap)).collect()).collect();
        QwuElements { q, w, u, anchors }
    }
}

/// The scaffold as elements of the last stage, indexed like [`QwuSets`].
#[derive(Clone, Debug)]
pub struct QwuElements {
    pub q: Vec<Vec<Vec<Vec<Element>>>>,
    pub w: Vec<Vec<Vec<Vec<Element>>>>,
    pub u: Vec<Vec<Vec<Element>>>,
    pub anchors: Vec<Vec<Element>>,
}

impl QwuElements {
    pub fn q(&self, idx: SIndex) -> &Element {
        &self.q[idx.0][idx.1][idx.2][idx.3]
    }

    pub fn w(&self, idx: SIndex) -> &Element {
        &self.w[idx.0][idx.1][idx.2][idx.3]
    }

    /// p_{i,j'} as used by stage i (0-based): the identity for i = 0.
    pub fn source_anchor(&self, i: usize, jp: usize) -> Option<&Element> {
        (i > 0).then(|| &self.anchors[i - 1][jp])
    }
}

/// The product q_a q_b predicted by the three product laws, for a ≤ b in
/// stage order: `Some(true)` means q_b, `Some(false)` means zero.
fn predicted_product(qwu: &QwuSets, a: SIndex, b: SIndex) -> bool {
    let (i, jp, j, k) = a;
    let (r, sp, s, t) = b;
    let last_group = jp + 1 == qwu.selection.prev_blocks(i);
    if r == i {
        (jp, j, k) == (sp, s, t)
    } else if r == i + 1 {
        last_group && j == sp && k + 1 == qwu.m(i, jp, j)
    } else {
        last_group && j + 1 == qwu.selection.k[i] && k + 1 == qwu.m(i, jp, j)
    }
}

/// Checks (Q1)(Q2)(W1)–(W3)(U1)(U2) and the three product laws.
pub fn verify_qwu(qwu: &QwuSets, snap: &SystemSnapshot, tol: f64) -> VerificationReport {
    let el = qwu.elements(snap);
    let sel = &qwu.selection;
    let mut rep = VerificationReport::default();

    let q1 = qwu.q.iter().enumerate().all(|(i, qi)| {
        qi.iter().all(|g| g.iter().enumerate().all(|(j, qs)| qs.iter().all(|q| q.stage == sel.s[i] && q.block == j && q.row == q.col)))
    });
    rep.push(Check::flag("qwu.Q1", "Q1", q1));

    let mut q2 = Worst::default();
    for i in 0..qwu.stages() {
        for jp in 0..sel.prev_blocks(i) {
            let mut sum = Element::zeros(&snap.ambient());
            for j in 0..sel.k[i] {
                for q in &el.q[i][jp][j] {
                    sum = &sum + q;
                }
            }
            let anchor = el.source_anchor(i, jp).cloned().unwrap_or_else(|| Element::identity(&snap.ambient()));
            q2.update(sum.distance(&anchor), || format!("stage {}, source block {jp}", i + 1));
        }
    }
    rep.push(q2.check("qwu.Q2", "Q2", tol));

    let w1 = qwu.w.iter().enumerate().all(|(i, wi)| {
        wi.iter().all(|g| g.iter().enumerate().all(|(j, ws)| ws.iter().all(|w| w.stage == sel.s[i] && w.block == j)))
    });
    rep.push(Check::flag("qwu.W1", "W1", w1));

    let (mut w2, mut w3) = (Worst::default(), Worst::default());
    for idx in qwu.s_indices() {
        let (i, _, j, _) = idx;
        let w = el.w(idx);
        let range = el.w((i, 0, j, 0));
        let ws = w.adjoint();
        w2.update((w * &ws).distance(range), || format!("{idx:?}"));
        w3.update((&ws * w).distance(el.q(idx)), || format!("{idx:?}"));
    }
    rep.push(w2.check("qwu.W2", "W2", tol));
    rep.push(w3.check("qwu.W3", "W3", tol));

    let mut u1 = true;
    let mut u2 = Worst::default();
    for (i, ui) in qwu.u.iter().enumerate() {
        for (j, us) in ui.iter().enumerate() {
            u1 &= us.len() == sel.n[i][j];
            u1 &= us.iter().all(|v| v.stage == sel.s[i] && v.block == j);
            u1 &= (0..sel.prev_blocks(i)).all(|jp| qwu.w[i][jp][j].iter().all(|w| us.contains(w)));
            let mut cols: Vec<usize> = us.iter().map(|v| v.col).collect();
            cols.sort_unstable();
            cols.dedup();
            u1 &= cols.len() == us.len();
            let v1 = &el.u[i][j][0];
            u2.update(v1.distance(el.w((i, 0, j, 0))), || format!("stage {}, block {j}: first member", i + 1));
            for (k, v) in el.u[i][j].iter().enumerate() {
                u2.update((v * &v.adjoint()).distance(v1), || format!("stage {}, block {j}, member {k}", i + 1));
            }
        }
    }
    rep.push(Check::flag("qwu.U1", "U1", u1));
    rep.push(u2.check("qwu.U2", "U2", tol));

    let s = qwu.s_indices();
    let pairs: Vec<(SIndex, SIndex)> = s.iter().flat_map(|&a| s.iter().filter(move |b| b.0 >= a.0).map(move |&b| (a, b))).collect();
    let results: Vec<(usize, f64, SIndex, SIndex)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let law = match b.0 - a.0 {
                0 => 3,
                1 => 2,
                _ => 1,
            };
            let prod = el.q(a) * el.q(b);
            let err = if predicted_product(qwu, a, b) { (&prod - el.q(b)).max_abs() } else { prod.max_abs() };
            (law, err, a, b)
        })
        .collect();
    for law in 1..=3 {
        let mut worst = Worst::default();
        let mut count = 0;
        for &(_, err, a, b) in results.iter().filter(|r| r.0 == law) {
            count += 1;
            worst.update(err, || format!("{a:?} x {b:?}"));
        }
        let name = format!("qwu.prod{law}");
        let tag = format!("prod{law}");
        let c = worst.check(&name, &tag, tol);
        let detail = format!("{count} pairs{}", c.detail.as_deref().map(|d| format!("; {d}")).unwrap_or_default());
        rep.push(c.with_detail(detail));
    }
    rep
}

/// All products v_k* v_l of a U-set: a full family of matrix units indexed
/// in U order.
pub fn matrix_units_from_u(us: &[Element]) -> Vec<Vec<Element>> {
    let adj: Vec<Element> = us.iter().map(Element::adjoint).collect();
    adj.iter().map(|a| us.iter().map(|v| a * v).collect()).collect()
}

/// Checks that U_{i+1,j} lies in the algebra generated by the stage-i matrix
/// units and W_{i+1;·,j}, and the index identity that drives it. Works at
/// stage s_{i+1}, where the pushforward is isometric.
pub fn partial_iso_closure_check(qwu: &QwuSets, snap: &SystemSnapshot, i: usize, policy: &ClosurePolicy) -> Result<VerificationReport> {
    let sel = &qwu.selection;
    if i + 1 >= sel.len() {
        return Err(Error::InsufficientDepth(format!("no selected stage after {}", i + 1)));
    }
    let (lo, hi) = (sel.s[i], sel.s[i + 1]);
    let local = |r: &UnitRef| snap.unit_local(r.stage, r.block, r.row, r.col);
    let lift = |r: &UnitRef| -> Result<Element> { snap.push_to(&local(r), r.stage, hi) };
    let map = snap.map_between(lo, hi)?;
    let mut rep = VerificationReport::default();
    let mut index = Worst::default();
    let mut closure_dist = Worst::default();
    let mut dims = Vec::new();
    for j in 0..sel.k[i + 1] {
        let mut gens = Vec::new();
        for (jp, &n) in sel.n[i].iter().enumerate() {
            for c in 0..n {
                gens.push(lift(&UnitRef { stage: lo, block: jp, row: 0, col: c })?);
            }
        }
        for jp in 0..sel.k[i] {
            for w in &qwu.w[i + 1][jp][j] {
                gens.push(lift(w)?);
            }
        }
        let span = word_closure(&gens, policy)?;
        dims.push(span.dimension());
        for v in &qwu.u[i + 1][j] {
            closure_dist.update(span.distance(&lift(v)?)?, || format!("block {j}, column {}", v.col));
        }
        let big_i = qwu.row_index[i + 1][j];
        for jp in 0..sel.k[i] {
            let big_j = qwu.anchors[i][jp].row;
            for (t, w) in qwu.w[i + 1][jp][j].iter().enumerate() {
                let wl = lift(w)?;
                for k in 0..sel.n[i][jp] {
                    let e = lift(&UnitRef { stage: lo, block: jp, row: big_j, col: k })?;
                    let target = map.positions(jp, j, k)[t];
                    let f = lift(&UnitRef { stage: hi, block: j, row: big_i, col: target })?;
                    let err = (&(&wl * &e) - &f).max_abs();
                    index.update(err, || format!("block {j}, source {jp}, k {k}, t {t}"));
                }
            }
        }
    }
    let stage = i + 1;
    rep.push(closure_dist.check(&format!("partial_iso.closure.stage{stage}"), "partialIso", policy.rank_tol).with_detail(format!("closure dimensions {dims:?}")));
    rep.push(index.check(&format!("partial_iso.index.stage{stage}"), "partialIso", 1e-12));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::check_matrix_unit_axioms;
    use crate::scaffold::{select_stages, BratteliData};

    fn uhf2(depth: usize) -> SystemSnapshot {
        let sizes = (0..depth).map(|r| vec![2usize << r]).collect();
        let b = BratteliData::new(sizes, vec![vec![vec![2]]; depth - 1]).unwrap();
        SystemSnapshot::af(&b, 0).unwrap()
    }

    fn setup(depth: usize) -> (SystemSnapshot, QwuSets) {
        let snap = uhf2(depth);
        let sel = select_stages(&snap.af_skeleton, depth, 1).unwrap();
        let qwu = build_qwu(&snap, &sel).unwrap();
        (snap, qwu)
    }

    #[test]
    fn first_stage_takes_all_diagonal_units() {
        let (_, qwu) = setup(2);
        assert_eq!(qwu.q[0][0][0], vec![diag(1, 0, 0), diag(1, 0, 1)]);
        assert_eq!(qwu.w[0][0][0][1], UnitRef { stage: 1, block: 0, row: 0, col: 1 });
    }

    #[test]
    fn second_stage_splits_the_anchor() {
        let (snap, qwu) = setup(2);
        assert_eq!(qwu.m(1, 0, 0), 2);
        let el = qwu.elements(&snap);
        let sum = &el.q[1][0][0][0] + &el.q[1][0][0][1];
        assert_eq!(sum.distance(&el.anchors[0][0]), 0.0);
        for w in &el.w[1][0][0] {
            assert_eq!((w * &w.adjoint()).distance(&el.w[1][0][0][0]), 0.0);
        }
    }

    #[test]
    fn uhf_scaffold_verifies() {
        let (snap, qwu) = setup(4);
        let rep = verify_qwu(&qwu, &snap, 1e-12);
        assert!(rep.all_pass(), "{:?}", rep.failures());
        assert!(rep.get("qwu.prod1").unwrap().detail.as_ref().unwrap().starts_with("12 pairs"));
    }

    #[test]
    fn partial_iso_closure_holds_and_catches_corruption() {
        let (snap, mut qwu) = setup(2);
        let policy = ClosurePolicy::default();
        let rep = partial_iso_closure_check(&qwu, &snap, 0, &policy).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.failures());
        assert!(rep.checks[0].detail.as_ref().unwrap().contains("[16]"));
        qwu.w[1][0][0][1].col = 0;
        let rep = partial_iso_closure_check(&qwu, &snap, 0, &policy).unwrap();
        assert!(!rep.all_pass());
    }

    #[test]
    fn u_sets_give_matrix_units() {
        let (snap, qwu) = setup(3);
        let el = qwu.elements(&snap);
        let units = matrix_units_from_u(&el.u[2][0]);
        assert_eq!(units.len() * units.len(), 64);
        let report = check_matrix_unit_axioms(&units, &Element::identity(&snap.ambient()), 1e-12);
        assert!(report.pass);
    }
}
