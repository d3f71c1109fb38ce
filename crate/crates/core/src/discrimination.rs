//! Simple terms, and verdicts on whether two terms are β-convertible.
//!
//! A simple term only ever contracts linear or call-by-value redexes on its
//! way to each head normal form. Clocks of simple terms survive reduction
//! from some level on, so two simple terms whose clocks differ infinitely
//! often cannot be convertible. A simple term whose clocks are infinitely
//! often strictly slower than those of an arbitrary term separates them too.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::rational::{rational_expand, Product, Pump, RationalLimits, RationalTree, DEFAULT_MAX_NODES};
use crate::reduction::{
    beta_step_at, convertible_bounded, head_redex_position, normalize, reduce_to_hnf, Convertibility,
    Reduct, ReductionOutcome, DEFAULT_FUEL,
};
use crate::syntax::{print, Style};
use crate::term::{Position, Term};
use crate::tree::{clocked_bt, rel_at, ClockedTree, Located, Mode, Relation, Tri, DEFAULT_DEPTH};

/// Steps spent normalizing each closed subterm.
const CLOSED_NF_FUEL: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Budgets {
    /// Node levels explored by truncated trees and the simplicity check.
    pub depth: usize,
    /// Head steps per node.
    pub fuel: usize,
    /// Terms visited by reduct searches.
    pub search: usize,
    pub max_nodes: usize,
    pub mode: Mode,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            depth: DEFAULT_DEPTH,
            fuel: DEFAULT_FUEL,
            search: 2_000,
            max_nodes: DEFAULT_MAX_NODES,
            mode: Mode::Count,
        }
    }
}

impl Budgets {
    fn rational(&self, mode: Mode) -> RationalLimits {
        RationalLimits {
            fuel: self.fuel,
            mode,
            max_nodes: self.max_nodes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimpleCertificate {
    /// Distinct subterms checked; together they are closed under taking
    /// arguments of head normal forms.
    pub nodes: usize,
    /// Nodes whose head reduction cycles.
    pub cycling: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NonSimpleRedex {
    /// Position of the tree node whose head reduction goes wrong.
    pub node: Position,
    /// Index of the offending head step.
    pub step: usize,
    /// Position of the redex inside the node's term at that step.
    pub position: Position,
    #[serde(serialize_with = "ascii")]
    pub redex: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Simplicity {
    Simple(SimpleCertificate),
    NotSimple(NonSimpleRedex),
    Unknown,
}

impl Simplicity {
    pub fn is_simple(&self) -> bool {
        matches!(self, Simplicity::Simple(_))
    }
}

fn ascii<S: serde::Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&print(t, Style::Ascii))
}

/// Checks every head step of every node of the Böhm tree of `t`. Succeeds
/// only when the set of node terms closes up within `depth` levels.
pub fn is_simple_term(t: &Term, depth: usize, fuel: usize) -> Simplicity {
    let mut seen: HashSet<Term> = HashSet::from([t.clone()]);
    let mut queue = VecDeque::from([(t.clone(), Position::root(), 0usize)]);
    let mut cycling = 0;
    let mut cut = false;
    while let Some((cur, at, level)) = queue.pop_front() {
        if level >= depth {
            cut = true;
            continue;
        }
        let (form, trace) = match reduce_to_hnf(&cur, fuel) {
            ReductionOutcome::Reached { form, trace } => (Some(form), trace),
            ReductionOutcome::Cycle { .. } => {
                cycling += 1;
                continue;
            }
            ReductionOutcome::FuelExhausted { .. } => return Simplicity::Unknown,
        };
        if let Some(i) = trace.steps.iter().position(|s| !s.kind.is_simple()) {
            let before = trace.steps[..i]
                .iter()
                .try_fold(cur.clone(), |u, s| beta_step_at(&u, &s.position))
                .expect("trace replays");
            let position = trace.steps[i].position.clone();
            let redex = before.subterm_at(&position).expect("trace position").clone();
            return Simplicity::NotSimple(NonSimpleRedex {
                node: at,
                step: i,
                position,
                redex,
            });
        }
        let form = form.expect("reached");
        let (binders, body) = form.binders();
        let (_, args) = body.spine();
        let m = args.len();
        for (i, a) in args.into_iter().enumerate() {
            if seen.insert(a.clone()) {
                let q = at.concat(&crate::tree::child_position(binders.len(), m, i));
                queue.push_back((a.clone(), q, level + 1));
            }
        }
    }
    if cut {
        Simplicity::Unknown
    } else {
        Simplicity::Simple(SimpleCertificate {
            nodes: seen.len(),
            cycling,
        })
    }
}

/// Replaces every maximal closed subterm that has a normal form by it.
fn normalize_closed(r: &Reduct) -> Reduct {
    let mut found = Vec::new();
    let mut stack = vec![(Position::root(), &r.term)];
    while let Some((p, u)) = stack.pop() {
        if u.is_normal() {
            continue;
        }
        if u.is_combinator() {
            if let ReductionOutcome::Reached { form, trace } = normalize(u, CLOSED_NF_FUEL) {
                found.push((p, form, trace));
                continue;
            }
        }
        match u.kind() {
            crate::term::TermKind::Var(_) => {}
            crate::term::TermKind::Lam(_, b) => stack.push((p.child(0), b)),
            crate::term::TermKind::App(f, a) => {
                stack.push((p.child(2), a));
                stack.push((p.child(1), f));
            }
        }
    }
    let mut out = r.clone();
    for (p, form, trace) in found {
        out.term = out.term.replace_at(&p, |_| Ok(form.clone())).expect("subterm position");
        out.path.extend(trace.positions().iter().map(|q| p.concat(q)));
    }
    out
}

/// Looks for a simple reduct: first along the head reduction, then
/// breadth-first over all reducts. Closed subterms with a normal form are
/// normalized at each candidate.
pub fn find_simple_reduct(t: &Term, budgets: &Budgets) -> Option<Reduct> {
    let simple = |r: &Reduct| is_simple_term(&r.term, budgets.depth, budgets.fuel).is_simple();
    let mut cur = Reduct::origin(t);
    let mut visited = 0;
    while visited < budgets.search {
        let c = normalize_closed(&cur);
        visited += 1;
        if simple(&c) {
            return Some(c);
        }
        match head_redex_position(&c.term) {
            Some(p) => {
                let next = beta_step_at(&c.term, &p).expect("head redex");
                cur = c.then(p, next);
            }
            None => break,
        }
        if visited >= budgets.depth * 4 {
            break;
        }
    }
    let start = normalize_closed(&Reduct::origin(t));
    let mut seen: HashSet<Term> = HashSet::from([start.term.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(r) = queue.pop_front() {
        for p in r.term.redex_positions() {
            let next = beta_step_at(&r.term, &p).expect("redex position");
            let c = normalize_closed(&r.then(p, next));
            if !seen.insert(c.term.clone()) {
                continue;
            }
            visited += 1;
            if simple(&c) {
                return Some(c);
            }
            if visited >= budgets.search {
                return None;
            }
            queue.push_back(c);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BtDifference,
    SimpleSimple,
    SimpleVsReduct,
    AtomicSimpleSimple,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub reduct_m: Reduct,
    pub reduct_n: Reduct,
    /// Node pairs on cycles of the product of the two rational trees.
    pub cycle_nodes: Vec<(usize, usize)>,
    pub witness_positions: Vec<Position>,
    /// Holds infinitely often between the clocks of the two reducts.
    pub relation: Option<Relation>,
    pub mode: Mode,
    pub pump: Option<Pump>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Inconvertible { method: Method, certificate: Certificate },
    Convertible { common_reduct: Term, left: Reduct, right: Reduct },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Inconvertible { .. } => "inconvertible",
            Verdict::Convertible { .. } => "convertible",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_inconvertible(&self) -> bool {
        matches!(self, Verdict::Inconvertible { .. })
    }

    pub fn is_convertible(&self) -> bool {
        matches!(self, Verdict::Convertible { .. })
    }

    pub fn method(&self) -> Option<Method> {
        match self {
            Verdict::Inconvertible { method, .. } => Some(*method),
            _ => None,
        }
    }

    pub fn to_json(&self, budgets: &Budgets) -> serde_json::Value {
        match self {
            Verdict::Inconvertible { method, certificate } => json!({
                "verdict": self.label(),
                "method": method,
                "certificate": certificate,
                "budgets": budgets,
            }),
            Verdict::Convertible { common_reduct, left, right } => json!({
                "verdict": self.label(),
                "method": null,
                "commonReduct": print(common_reduct, Style::Ascii),
                "certificate": { "reductM": left, "reductN": right },
                "budgets": budgets,
            }),
            Verdict::Inconclusive { reason } => json!({
                "verdict": self.label(),
                "method": null,
                "reason": reason,
                "budgets": budgets,
            }),
        }
    }
}

/// Runs the pipeline: bounded convertibility, a resolved Böhm tree
/// difference, clocks of simple reducts (counts, then positions in atomic
/// mode), and finally a simple reduct against the other term itself.
pub fn discriminate(m: &Term, n: &Term, budgets: &Budgets) -> Verdict {
    if let Convertibility::Convertible { witness, left, right } = convertible_bounded(m, n, budgets.search) {
        return Verdict::Convertible {
            common_reduct: witness,
            left,
            right,
        };
    }
    if let Some(v) = bt_difference(m, n, budgets) {
        return v;
    }
    let sm = find_simple_reduct(m, budgets);
    let sn = find_simple_reduct(n, budgets);
    if let (Some(a), Some(b)) = (&sm, &sn) {
        if let Some(v) = clock_difference(a, b, Mode::Count, Relation::Ne, Method::SimpleSimple, budgets) {
            return v;
        }
        if budgets.mode == Mode::Atomic {
            if let Some(v) = clock_difference(a, b, Mode::Atomic, Relation::Ne, Method::AtomicSimpleSimple, budgets) {
                return v;
            }
        }
    }
    // a simple reduct infinitely often slower than the other term
    if let Some(a) = &sm {
        let b = Reduct::origin(n);
        if let Some(v) = clock_difference(a, &b, Mode::Count, Relation::Gt, Method::SimpleVsReduct, budgets) {
            return v;
        }
    }
    if let Some(b) = &sn {
        let a = Reduct::origin(m);
        if let Some(v) = clock_difference(&a, b, Mode::Count, Relation::Lt, Method::SimpleVsReduct, budgets) {
            return v;
        }
    }
    let reason = match (&sm, &sn) {
        (None, None) => "no simple reduct found for either term",
        (None, _) => "no simple reduct found for the first term",
        (_, None) => "no simple reduct found for the second term",
        _ => "clocks agree from some level on",
    };
    Verdict::Inconclusive {
        reason: reason.to_string(),
    }
}

fn bt_difference(m: &Term, n: &Term, budgets: &Budgets) -> Option<Verdict> {
    let limits = budgets.rational(Mode::Count);
    let witness = match (rational_expand(m, limits), rational_expand(n, limits)) {
        (Some(a), Some(b)) => Product::new(&a, &b).mismatch().cloned(),
        _ => truncated_mismatch(
            &clocked_bt(m, budgets.depth, budgets.fuel, Mode::Count),
            &clocked_bt(n, budgets.depth, budgets.fuel, Mode::Count),
        ),
    }?;
    Some(Verdict::Inconvertible {
        method: Method::BtDifference,
        certificate: Certificate {
            reduct_m: Reduct::origin(m),
            reduct_n: Reduct::origin(n),
            cycle_nodes: Vec::new(),
            witness_positions: vec![witness],
            relation: None,
            mode: Mode::Count,
            pump: None,
        },
    })
}

/// A shallowest position where both trees have a known node, and the nodes
/// differ. Nodes are `Bot` only when head reduction provably cycles.
fn truncated_mismatch(a: &ClockedTree, b: &ClockedTree) -> Option<Position> {
    let mut queue = VecDeque::from([(Position::root(), a, b)]);
    while let Some((p, x, y)) = queue.pop_front() {
        if x.is_unknown() || y.is_unknown() {
            continue;
        }
        if !x.same_shape(y) {
            return Some(p);
        }
        for ((q, u), (_, v)) in x.children().into_iter().zip(y.children()) {
            queue.push_back((p.concat(&q), u, v));
        }
    }
    None
}

fn clock_difference(
    a: &Reduct,
    b: &Reduct,
    mode: Mode,
    r: Relation,
    method: Method,
    budgets: &Budgets,
) -> Option<Verdict> {
    let limits = budgets.rational(mode);
    let ta = rational_expand(&a.term, limits)?;
    let tb = rational_expand(&b.term, limits)?;
    let product = Product::new(&ta, &tb);
    if !product.bt_equal() {
        return None;
    }
    let check = product.infinitely_often(r);
    if check.outcome != Tri::Holds {
        return None;
    }
    let pump = check.pump?;
    let witness_positions = (0..3).map(|k| pump.instance(k)).collect();
    Some(Verdict::Inconvertible {
        method,
        certificate: Certificate {
            reduct_m: a.clone(),
            reduct_n: b.clone(),
            cycle_nodes: check.cycle_nodes,
            witness_positions,
            relation: Some(r),
            mode,
            pump: Some(pump),
        },
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("reduct path does not replay to the recorded term")]
    Replay,
    #[error("recorded reduct is not simple")]
    NotSimple,
    #[error("no rational tree within the budgets")]
    NotRational,
    #[error("trees do not differ at {0}")]
    NoDifference(Position),
    #[error("cycle node pair {0:?} is not on a cycle")]
    Cycle((usize, usize)),
    #[error("relation does not hold at {0}")]
    Relation(Position),
    #[error("certificate is incomplete")]
    Incomplete,
}

/// Replays a verdict's certificate from scratch.
pub fn verify_verdict(m: &Term, n: &Term, verdict: &Verdict, budgets: &Budgets) -> Result<(), VerifyError> {
    match verdict {
        Verdict::Inconclusive { .. } => Ok(()),
        Verdict::Convertible { common_reduct, left, right } => {
            let a = left.replay_from(m).map_err(|_| VerifyError::Replay)?;
            let b = right.replay_from(n).map_err(|_| VerifyError::Replay)?;
            if a == *common_reduct && b == *common_reduct {
                Ok(())
            } else {
                Err(VerifyError::Replay)
            }
        }
        Verdict::Inconvertible { method, certificate: c } => {
            for (r, start) in [(&c.reduct_m, m), (&c.reduct_n, n)] {
                if r.replay_from(start).map_err(|_| VerifyError::Replay)? != r.term {
                    return Err(VerifyError::Replay);
                }
            }
            match method {
                Method::BtDifference => verify_bt_difference(c, budgets),
                _ => verify_clocks(*method, c, budgets),
            }
        }
    }
}

fn verify_bt_difference(c: &Certificate, budgets: &Budgets) -> Result<(), VerifyError> {
    let p = c.witness_positions.first().ok_or(VerifyError::Incomplete)?;
    let depth = p.len() + 1;
    let a = clocked_bt(&c.reduct_m.term, depth, budgets.fuel, Mode::Count);
    let b = clocked_bt(&c.reduct_n.term, depth, budgets.fuel, Mode::Count);
    match (a.locate(p), b.locate(p)) {
        (Located::Node(x), Located::Node(y)) if !x.is_unknown() && !y.is_unknown() && !x.same_shape(y) => Ok(()),
        _ => Err(VerifyError::NoDifference(p.clone())),
    }
}

fn verify_clocks(method: Method, c: &Certificate, budgets: &Budgets) -> Result<(), VerifyError> {
    let simple = |t: &Term| is_simple_term(t, budgets.depth, budgets.fuel).is_simple();
    let need_m = method != Method::SimpleVsReduct || c.relation == Some(Relation::Gt);
    let need_n = method != Method::SimpleVsReduct || c.relation == Some(Relation::Lt);
    if (need_m && !simple(&c.reduct_m.term)) || (need_n && !simple(&c.reduct_n.term)) {
        return Err(VerifyError::NotSimple);
    }
    let r = c.relation.ok_or(VerifyError::Incomplete)?;
    let limits = budgets.rational(c.mode);
    let ta: RationalTree = rational_expand(&c.reduct_m.term, limits).ok_or(VerifyError::NotRational)?;
    let tb: RationalTree = rational_expand(&c.reduct_n.term, limits).ok_or(VerifyError::NotRational)?;
    let product = Product::new(&ta, &tb);
    let check = product.infinitely_often(r);
    for pair in &c.cycle_nodes {
        if !check.cycle_nodes.contains(pair) {
            return Err(VerifyError::Cycle(*pair));
        }
    }
    let pump = c.pump.as_ref().ok_or(VerifyError::Incomplete)?;
    if pump.pump.is_root() {
        return Err(VerifyError::Incomplete);
    }
    for k in 0..4 {
        let p = pump.instance(k);
        let depth = p.len() + 1;
        let ua = ta.unfold(depth);
        let ub = tb.unfold(depth);
        let both_annotated = matches!(
            (ua.locate(&p), ub.locate(&p)),
            (Located::Node(x), Located::Node(y)) if x.clock().is_some() && y.clock().is_some()
        );
        if !both_annotated || rel_at(&ua, &ub, &p, r) != Tri::Holds {
            return Err(VerifyError::Relation(p));
        }
    }
    if check.outcome == Tri::Holds {
        Ok(())
    } else {
        Err(VerifyError::Incomplete)
    }
}
