//! Clocked Böhm, Lévy–Longo and Berarducci trees, truncated by depth.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduction::{
    reduce_to_hnf, reduce_to_root_stable, reduce_to_whnf, ReductionOutcome, StepTrace,
};
use crate::term::{Hint, Position, Term, TermKind, Var};

pub const DEFAULT_DEPTH: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Count,
    Atomic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    #[default]
    Bt,
    Llt,
    Bet,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown {what} `{given}`")]
pub struct UnknownName {
    pub what: &'static str,
    pub given: String,
}

impl FromStr for Mode {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(Mode::Count),
            "atomic" => Ok(Mode::Atomic),
            _ => Err(UnknownName { what: "mode", given: s.into() }),
        }
    }
}

impl FromStr for Flavor {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bt" => Ok(Flavor::Bt),
            "llt" => Ok(Flavor::Llt),
            "bet" => Ok(Flavor::Bet),
            _ => Err(UnknownName { what: "flavor", given: s.into() }),
        }
    }
}

/// A node clock: a head-step count, or the exact list of head-step positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Annotation {
    Count(usize),
    Positions(Vec<Position>),
}

impl Annotation {
    pub fn from_trace(trace: &StepTrace, mode: Mode) -> Self {
        match mode {
            Mode::Count => Annotation::Count(trace.len()),
            Mode::Atomic => Annotation::Positions(trace.positions()),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            Annotation::Count(k) => *k,
            Annotation::Positions(ps) => ps.len(),
        }
    }

    /// Projects an atomic clock to its length.
    pub fn to_count(&self) -> Annotation {
        Annotation::Count(self.count())
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Annotation::Count(k) => write!(f, "{k}"),
            Annotation::Positions(ps) => {
                f.write_str("⟨")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("⟩")
            }
        }
    }
}

/// `a` embeds into `b` order-preservingly, i.e. `b ≥ a` in the atomic order.
pub fn subsequence_leq(a: &[Position], b: &[Position]) -> bool {
    let mut rest = b.iter();
    a.iter().all(|x| rest.any(|y| y == x))
}

/// Relations lifted from clocks to trees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    /// Evaluates the relation. Counts compare numerically; position lists
    /// compare under the subsequence order. Mixed pairs fall back to counts.
    pub fn eval(self, a: &Annotation, b: &Annotation) -> bool {
        match (a, b) {
            (Annotation::Positions(x), Annotation::Positions(y)) => {
                let le = || subsequence_leq(x, y);
                let ge = || subsequence_leq(y, x);
                match self {
                    Relation::Eq => x == y,
                    Relation::Ne => x != y,
                    Relation::Le => le(),
                    Relation::Lt => x != y && le(),
                    Relation::Ge => ge(),
                    Relation::Gt => x != y && ge(),
                }
            }
            _ => {
                let (x, y) = (a.count(), b.count());
                match self {
                    Relation::Eq => x == y,
                    Relation::Ne => x != y,
                    Relation::Le => x <= y,
                    Relation::Lt => x < y,
                    Relation::Ge => x >= y,
                    Relation::Gt => x > y,
                }
            }
        }
    }
}

impl FromStr for Relation {
    type Err = UnknownName;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "=" | "==" | "eq" => Relation::Eq,
            "!=" | "≠" | "ne" => Relation::Ne,
            "<=" | "≤" | "le" => Relation::Le,
            "<" | "lt" => Relation::Lt,
            ">=" | "≥" | "ge" => Relation::Ge,
            ">" | "gt" => Relation::Gt,
            _ => return Err(UnknownName { what: "relation", given: s.into() }),
        })
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A head variable. `name` is a display hint; bound indices count binders
/// of enclosing nodes, innermost first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Head {
    pub var: Var,
    pub name: Hint,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ClockedTree {
    /// Certified meaningless.
    Bot,
    /// Budget or depth ran out.
    Unknown,
    Bt {
        clock: Option<Annotation>,
        binders: Vec<Hint>,
        head: Head,
        args: Vec<ClockedTree>,
    },
    LlAbs {
        clock: Option<Annotation>,
        binder: Hint,
        body: Box<ClockedTree>,
    },
    LlHead {
        clock: Option<Annotation>,
        head: Head,
        args: Vec<ClockedTree>,
    },
    BeVar {
        clock: Option<Annotation>,
        head: Head,
    },
    BeAbs {
        clock: Option<Annotation>,
        binder: Hint,
        body: Box<ClockedTree>,
    },
    BeApp {
        clock: Option<Annotation>,
        fun: Box<ClockedTree>,
        arg: Box<ClockedTree>,
    },
}

impl ClockedTree {
    pub fn clock(&self) -> Option<&Annotation> {
        match self {
            ClockedTree::Bot | ClockedTree::Unknown => None,
            ClockedTree::Bt { clock, .. }
            | ClockedTree::LlAbs { clock, .. }
            | ClockedTree::LlHead { clock, .. }
            | ClockedTree::BeVar { clock, .. }
            | ClockedTree::BeAbs { clock, .. }
            | ClockedTree::BeApp { clock, .. } => clock.as_ref(),
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, ClockedTree::Unknown)
    }

    /// Whether any `Unknown` leaf occurs.
    pub fn has_unknown(&self) -> bool {
        self.is_unknown() || self.children().iter().any(|(_, c)| c.has_unknown())
    }

    /// Children paired with their position relative to this node.
    pub fn children(&self) -> Vec<(Position, &ClockedTree)> {
        match self {
            ClockedTree::Bot | ClockedTree::Unknown | ClockedTree::BeVar { .. } => Vec::new(),
            ClockedTree::Bt { binders, args, .. } => hnf_children(binders.len(), args),
            ClockedTree::LlHead { args, .. } => hnf_children(0, args),
            ClockedTree::LlAbs { body, .. } | ClockedTree::BeAbs { body, .. } => {
                vec![(Position::root().child(0), body)]
            }
            ClockedTree::BeApp { fun, arg, .. } => vec![
                (Position::root().child(1), fun),
                (Position::root().child(2), arg),
            ],
        }
    }

    /// Two nodes have the same shape when they agree after dropping clocks
    /// and children.
    pub fn same_shape(&self, other: &ClockedTree) -> bool {
        use ClockedTree::*;
        match (self, other) {
            (Bot, Bot) | (Unknown, Unknown) => true,
            (
                Bt { binders: b1, head: h1, args: a1, .. },
                Bt { binders: b2, head: h2, args: a2, .. },
            ) => b1.len() == b2.len() && h1.var == h2.var && a1.len() == a2.len(),
            (LlAbs { .. }, LlAbs { .. }) | (BeAbs { .. }, BeAbs { .. }) => true,
            (LlHead { head: h1, args: a1, .. }, LlHead { head: h2, args: a2, .. }) => {
                h1.var == h2.var && a1.len() == a2.len()
            }
            (BeVar { head: h1, .. }, BeVar { head: h2, .. }) => h1.var == h2.var,
            (BeApp { .. }, BeApp { .. }) => true,
            _ => false,
        }
    }

    /// Drops every clock.
    pub fn deannotate(&self) -> ClockedTree {
        self.map_clocks(&|_| None)
    }

    /// Replaces position lists by their lengths.
    pub fn to_counts(&self) -> ClockedTree {
        self.map_clocks(&|a| Some(a.to_count()))
    }

    fn map_clocks(&self, f: &dyn Fn(&Annotation) -> Option<Annotation>) -> ClockedTree {
        let m = |c: &Option<Annotation>| c.as_ref().and_then(f);
        match self {
            ClockedTree::Bot => ClockedTree::Bot,
            ClockedTree::Unknown => ClockedTree::Unknown,
            ClockedTree::Bt { clock, binders, head, args } => ClockedTree::Bt {
                clock: m(clock),
                binders: binders.clone(),
                head: head.clone(),
                args: args.iter().map(|a| a.map_clocks(f)).collect(),
            },
            ClockedTree::LlAbs { clock, binder, body } => ClockedTree::LlAbs {
                clock: m(clock),
                binder: binder.clone(),
                body: Box::new(body.map_clocks(f)),
            },
            ClockedTree::LlHead { clock, head, args } => ClockedTree::LlHead {
                clock: m(clock),
                head: head.clone(),
                args: args.iter().map(|a| a.map_clocks(f)).collect(),
            },
            ClockedTree::BeVar { clock, head } => ClockedTree::BeVar {
                clock: m(clock),
                head: head.clone(),
            },
            ClockedTree::BeAbs { clock, binder, body } => ClockedTree::BeAbs {
                clock: m(clock),
                binder: binder.clone(),
                body: Box::new(body.map_clocks(f)),
            },
            ClockedTree::BeApp { clock, fun, arg } => ClockedTree::BeApp {
                clock: m(clock),
                fun: Box::new(fun.map_clocks(f)),
                arg: Box::new(arg.map_clocks(f)),
            },
        }
    }

    /// Clocks level by level, in left-to-right order.
    pub fn clocks_by_level(&self) -> Vec<Vec<Option<Annotation>>> {
        let mut levels = Vec::new();
        let mut frontier = vec![self];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            let mut row = Vec::new();
            for t in frontier {
                if t.is_unknown() {
                    continue;
                }
                row.push(t.clock().cloned());
                next.extend(t.children().into_iter().map(|(_, c)| c));
            }
            if !row.is_empty() {
                levels.push(row);
            }
            frontier = next;
        }
        levels
    }

    /// Every known node with its absolute position and level.
    pub fn nodes(&self) -> Vec<(Position, usize, &ClockedTree)> {
        let mut out = Vec::new();
        let mut stack = vec![(Position::root(), 0usize, self)];
        while let Some((p, level, t)) = stack.pop() {
            for (q, c) in t.children().into_iter().rev() {
                stack.push((p.concat(&q), level + 1, c));
            }
            out.push((p, level, t));
        }
        out
    }

    /// Number of node levels before the first `Unknown`, or the full height.
    pub fn known_depth(&self) -> usize {
        if self.is_unknown() {
            return 0;
        }
        1 + self
            .children()
            .iter()
            .map(|(_, c)| c.known_depth())
            .min()
            .unwrap_or(usize::MAX - 1)
    }

    /// Resolves a position to the node at that position, or reports that
    /// it lies strictly inside a node.
    pub fn locate(&self, p: &Position) -> Located<'_> {
        let mut cur = self;
        let mut rest: &[u8] = p.digits();
        loop {
            if rest.is_empty() {
                return Located::Node(cur);
            }
            if cur.is_unknown() {
                return Located::Unknown;
            }
            let mut hit = None;
            for (q, child) in cur.children() {
                let d = q.digits();
                if rest.starts_with(d) {
                    hit = Some((d.len(), child));
                    break;
                }
                if d.starts_with(rest) {
                    return Located::Inner;
                }
            }
            match hit {
                Some((n, child)) => {
                    rest = &rest[n..];
                    cur = child;
                }
                None => {
                    return if inner_position(cur, rest) {
                        Located::Inner
                    } else {
                        Located::Invalid
                    }
                }
            }
        }
    }
}

fn hnf_children(n: usize, args: &[ClockedTree]) -> Vec<(Position, &ClockedTree)> {
    let m = args.len();
    args.iter()
        .enumerate()
        .map(|(i, a)| (child_position(n, m, i), a))
        .collect()
}

/// Position of argument `i` (0-based) of an hnf with `n` binders and `m`
/// arguments, relative to the node.
pub fn child_position(n: usize, m: usize, i: usize) -> Position {
    let mut d = vec![0u8; n];
    d.extend(std::iter::repeat_n(1u8, m - 1 - i));
    d.push(2);
    Position::from_digits(d).expect("digits in range")
}

/// Whether `rest` names a non-node position inside `t` (binders, the head
/// variable, or an application spine node).
fn inner_position(t: &ClockedTree, rest: &[u8]) -> bool {
    let (n, m) = match t {
        ClockedTree::Bt { binders, args, .. } => (binders.len(), args.len()),
        ClockedTree::LlHead { args, .. } => (0, args.len()),
        _ => return false,
    };
    let zeros = rest.iter().take_while(|&&d| d == 0).count().min(n);
    let tail = &rest[zeros..];
    if zeros < n {
        return tail.is_empty();
    }
    tail.len() <= m && tail.iter().all(|&d| d == 1)
}

#[derive(Debug, PartialEq, Eq)]
pub enum Located<'a> {
    Node(&'a ClockedTree),
    /// Inside a node's head normal form: an unannotated position.
    Inner,
    /// Beyond an `Unknown` leaf.
    Unknown,
    Invalid,
}

/// Three-valued answer for relation checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Holds,
    Fails,
    Unknown,
}

/// Outcome of a relation check on truncated trees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelCheck {
    pub outcome: Tri,
    /// A violating position, or where knowledge ran out.
    pub witness: Option<Position>,
    /// Node levels examined.
    pub depth: usize,
}

/// The lifted relation at one position.
pub fn rel_at(t1: &ClockedTree, t2: &ClockedTree, p: &Position, r: Relation) -> Tri {
    match (t1.locate(p), t2.locate(p)) {
        (Located::Unknown, _) | (_, Located::Unknown) => Tri::Unknown,
        (Located::Node(a), Located::Node(b)) => {
            if a.is_unknown() || b.is_unknown() {
                return Tri::Unknown;
            }
            pair_holds(a, b, r)
        }
        (Located::Inner, Located::Inner) => Tri::Holds,
        _ => Tri::Fails,
    }
}

fn pair_holds(a: &ClockedTree, b: &ClockedTree, r: Relation) -> Tri {
    if !a.same_shape(b) {
        return Tri::Fails;
    }
    match (a.clock(), b.clock()) {
        (None, None) => Tri::Holds,
        (Some(x), Some(y)) if r.eval(x, y) => Tri::Holds,
        _ => Tri::Fails,
    }
}

/// Walks both trees in lockstep, reporting every visited node pair.
fn zip_walk(
    t1: &ClockedTree,
    t2: &ClockedTree,
    visit: &mut dyn FnMut(&Position, usize, &ClockedTree, &ClockedTree),
) {
    let mut stack = vec![(Position::root(), 0usize, t1, t2)];
    while let Some((p, level, a, b)) = stack.pop() {
        visit(&p, level, a, b);
        if a.is_unknown() || b.is_unknown() || !a.same_shape(b) {
            continue;
        }
        let (ca, cb) = (a.children(), b.children());
        for ((q, x), (_, y)) in ca.into_iter().zip(cb).rev() {
            stack.push((p.concat(&q), level + 1, x, y));
        }
    }
}

fn check_from(t1: &ClockedTree, t2: &ClockedTree, r: Relation, from_level: usize) -> RelCheck {
    let mut fail: Option<(usize, Position)> = None;
    let mut unknown: Option<(usize, Position)> = None;
    let mut depth = 0;
    zip_walk(t1, t2, &mut |p, level, a, b| {
        if a.is_unknown() || b.is_unknown() {
            if level >= from_level && unknown.as_ref().is_none_or(|(l, _)| level < *l) {
                unknown = Some((level, p.clone()));
            }
            return;
        }
        depth = depth.max(level + 1);
        if level >= from_level
            && pair_holds(a, b, r) == Tri::Fails
            && fail.as_ref().is_none_or(|(l, _)| level < *l)
        {
            fail = Some((level, p.clone()));
        }
    });
    match (fail, unknown) {
        (Some((_, p)), _) => RelCheck { outcome: Tri::Fails, witness: Some(p), depth },
        (None, Some((_, p))) => RelCheck { outcome: Tri::Unknown, witness: Some(p), depth },
        (None, None) => RelCheck { outcome: Tri::Holds, witness: None, depth },
    }
}

/// `R` at every position. A definite violation wins over missing knowledge.
pub fn rel_all(t1: &ClockedTree, t2: &ClockedTree, r: Relation) -> RelCheck {
    check_from(t1, t2, r, 0)
}

/// `R` at every node of level at least `prefix_cut`. Truncated trees can only
/// hold when nothing is unknown; use the rational checks for certificates.
pub fn rel_eventually(
    t1: &ClockedTree,
    t2: &ClockedTree,
    r: Relation,
    prefix_cut: usize,
) -> RelCheck {
    check_from(t1, t2, r, prefix_cut)
}

/// Expansion limits shared by the tree builders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub depth: usize,
    pub fuel: usize,
    pub mode: Mode,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            depth: DEFAULT_DEPTH,
            fuel: crate::reduction::DEFAULT_FUEL,
            mode: Mode::Count,
        }
    }
}

pub fn clocked_bt(t: &Term, depth: usize, fuel: usize, mode: Mode) -> ClockedTree {
    clocked_tree(t, Flavor::Bt, Limits { depth, fuel, mode })
}

pub fn clocked_llt(t: &Term, depth: usize, fuel: usize, mode: Mode) -> ClockedTree {
    clocked_tree(t, Flavor::Llt, Limits { depth, fuel, mode })
}

pub fn clocked_bet(t: &Term, depth: usize, fuel: usize, mode: Mode) -> ClockedTree {
    clocked_tree(t, Flavor::Bet, Limits { depth, fuel, mode })
}

pub fn clocked_tree(t: &Term, flavor: Flavor, limits: Limits) -> ClockedTree {
    let mut b = Builder {
        flavor,
        limits,
        memo: HashMap::new(),
    };
    let mut ctx = Vec::new();
    b.expand(t, limits.depth, &mut ctx)
}

struct Builder {
    flavor: Flavor,
    limits: Limits,
    memo: HashMap<Term, ReductionOutcome>,
}

impl Builder {
    fn reduce(&mut self, t: &Term) -> ReductionOutcome {
        if let Some(out) = self.memo.get(t) {
            return out.clone();
        }
        let fuel = self.limits.fuel;
        let out = match self.flavor {
            Flavor::Bt => reduce_to_hnf(t, fuel),
            Flavor::Llt => reduce_to_whnf(t, fuel),
            Flavor::Bet => reduce_to_root_stable(t, fuel),
        };
        self.memo.insert(t.clone(), out.clone());
        out
    }

    fn expand(&mut self, t: &Term, depth: usize, ctx: &mut Vec<Hint>) -> ClockedTree {
        if depth == 0 {
            return ClockedTree::Unknown;
        }
        let (form, trace) = match self.reduce(t) {
            ReductionOutcome::Reached { form, trace } => (form, trace),
            ReductionOutcome::Cycle { .. } => return ClockedTree::Bot,
            ReductionOutcome::FuelExhausted { .. } => return ClockedTree::Unknown,
        };
        let clock = Some(Annotation::from_trace(&trace, self.limits.mode));
        match self.flavor {
            Flavor::Bt => {
                let (binders, body) = form.binders();
                let (head, args) = body.spine();
                let n = binders.len();
                ctx.extend(binders.iter().cloned());
                let head = head_of(head, ctx);
                let args = args
                    .into_iter()
                    .map(|a| self.expand(a, depth - 1, ctx))
                    .collect();
                ctx.truncate(ctx.len() - n);
                ClockedTree::Bt { clock, binders, head, args }
            }
            Flavor::Llt => {
                if let Some((hint, body)) = form.as_lam() {
                    ctx.push(hint.clone());
                    let body = self.expand(body, depth - 1, ctx);
                    ctx.pop();
                    return ClockedTree::LlAbs {
                        clock,
                        binder: hint.clone(),
                        body: Box::new(body),
                    };
                }
                let (head, args) = form.spine();
                let head = head_of(head, ctx);
                let args = args
                    .into_iter()
                    .map(|a| self.expand(a, depth - 1, ctx))
                    .collect();
                ClockedTree::LlHead { clock, head, args }
            }
            Flavor::Bet => match form.kind() {
                TermKind::Var(_) => ClockedTree::BeVar {
                    clock,
                    head: head_of(&form, ctx),
                },
                TermKind::Lam(hint, body) => {
                    ctx.push(hint.clone());
                    let body = self.expand(body, depth - 1, ctx);
                    ctx.pop();
                    ClockedTree::BeAbs {
                        clock,
                        binder: hint.clone(),
                        body: Box::new(body),
                    }
                }
                TermKind::App(f, a) => {
                    let fun = self.expand(f, depth - 1, ctx);
                    let arg = self.expand(a, depth - 1, ctx);
                    ClockedTree::BeApp {
                        clock,
                        fun: Box::new(fun),
                        arg: Box::new(arg),
                    }
                }
            },
        }
    }
}

pub(crate) fn head_of(head: &Term, ctx: &[Hint]) -> Head {
    let var = head.as_var().expect("head normal forms have a variable head").clone();
    let name = match &var {
        Var::Free(n) => Hint::new(n),
        Var::Bound(i) => ctx
            .len()
            .checked_sub(i + 1)
            .map(|j| ctx[j].clone())
            .unwrap_or_else(|| Hint::new(&format!("#{i}"))),
    };
    Head { var, name }
}

/// Text rendering: `[2]f([1]f(?))`, `⊥` for Bot and `?` for Unknown.
impl fmt::Display for ClockedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<String> = Vec::new();
        write_tree(self, &mut names, f)
    }
}

fn write_clock(clock: &Option<Annotation>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match clock {
        Some(a) => write!(f, "[{a}]"),
        None => Ok(()),
    }
}

pub(crate) fn bind_name(hint: &Hint, names: &[String]) -> String {
    let base = hint.as_str();
    if !names.iter().any(|n| n == base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|c| !names.contains(c))
        .expect("unbounded suffixes")
}

pub(crate) fn head_name(head: &Head, names: &[String]) -> String {
    match &head.var {
        Var::Free(n) => n.to_string(),
        Var::Bound(i) => names
            .len()
            .checked_sub(i + 1)
            .map(|j| names[j].clone())
            .unwrap_or_else(|| format!("#{i}")),
    }
}

fn write_args(
    args: &[ClockedTree],
    names: &mut Vec<String>,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    for a in args {
        f.write_str("(")?;
        write_tree(a, names, f)?;
        f.write_str(")")?;
    }
    Ok(())
}

fn write_tree(t: &ClockedTree, names: &mut Vec<String>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        ClockedTree::Bot => f.write_str("⊥"),
        ClockedTree::Unknown => f.write_str("?"),
        ClockedTree::Bt { clock, binders, head, args } => {
            write_clock(clock, f)?;
            let base = names.len();
            if !binders.is_empty() {
                f.write_str("λ")?;
                for (i, b) in binders.iter().enumerate() {
                    let n = bind_name(b, names);
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    f.write_str(&n)?;
                    names.push(n);
                }
                f.write_str(".")?;
            }
            f.write_str(&head_name(head, names))?;
            write_args(args, names, f)?;
            names.truncate(base);
            Ok(())
        }
        ClockedTree::LlAbs { clock, binder, body } | ClockedTree::BeAbs { clock, binder, body } => {
            write_clock(clock, f)?;
            let n = bind_name(binder, names);
            write!(f, "λ{n}.")?;
            names.push(n);
            write_tree(body, names, f)?;
            names.pop();
            Ok(())
        }
        ClockedTree::LlHead { clock, head, args } => {
            write_clock(clock, f)?;
            f.write_str(&head_name(head, names))?;
            write_args(args, names, f)
        }
        ClockedTree::BeVar { clock, head } => {
            write_clock(clock, f)?;
            f.write_str(&head_name(head, names))
        }
        ClockedTree::BeApp { clock, fun, arg } => {
            write_clock(clock, f)?;
            f.write_str("(")?;
            write_tree(fun, names, f)?;
            f.write_str(" ")?;
            write_tree(arg, names, f)?;
            f.write_str(")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    const FUEL: usize = 1000;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    fn pos(s: &str) -> Position {
        s.parse().unwrap()
    }

    fn y0() -> Term {
        t("\\f. (\\x. f (x x)) (\\x. f (x x))")
    }

    fn y1() -> Term {
        t("(\\x f. f (x x f)) (\\x f. f (x x f))")
    }

    #[test]
    fn curry_and_turing_trees() {
        let a = clocked_bt(&Term::app(y0(), Term::free("f")), 4, FUEL, Mode::Count);
        assert_eq!(a.to_string(), "[2]f([1]f([1]f([1]f(?))))");
        let b = clocked_bt(&Term::app(y1(), Term::free("f")), 4, FUEL, Mode::Count);
        assert_eq!(b.to_string(), "[2]f([2]f([2]f([2]f(?))))");
        assert_eq!(a.deannotate(), b.deannotate());
    }

    #[test]
    fn depth_zero_is_unknown() {
        assert_eq!(clocked_bt(&t("x"), 0, FUEL, Mode::Count), ClockedTree::Unknown);
    }

    #[test]
    fn omega_is_bot() {
        let omega = t("(\\x.x x)(\\x.x x)");
        assert_eq!(clocked_bt(&omega, 3, FUEL, Mode::Count), ClockedTree::Bot);
        assert_eq!(clocked_bet(&omega, 3, FUEL, Mode::Count), ClockedTree::Bot);
        let lam = Term::lam("x", omega);
        assert_eq!(clocked_bet(&lam, 3, FUEL, Mode::Count).to_string(), "[0]λx.⊥");
    }

    #[test]
    fn berarducci_leaves() {
        assert_eq!(clocked_bet(&t("(\\y.y) x"), 3, FUEL, Mode::Count).to_string(), "[1]x");
        assert_eq!(clocked_bet(&t("x"), 3, FUEL, Mode::Count).to_string(), "[0]x");
    }

    #[test]
    fn levy_longo_examples() {
        let aa = t("(\\x y. x x) (\\x y. x x)");
        assert_eq!(
            clocked_llt(&aa, 3, FUEL, Mode::Count).to_string(),
            "[1]λy.[1]λy1.[1]λy2.?"
        );
        let bb = t("(\\x y z. x x) (\\x y z. x x)");
        assert_eq!(
            clocked_llt(&bb, 4, FUEL, Mode::Count).to_string(),
            "[1]λy.[0]λz.[1]λy1.[0]λz1.?"
        );
        assert_eq!(clocked_llt(&t("\\x.x"), 3, FUEL, Mode::Count).to_string(), "[0]λx.[0]x");
    }

    #[test]
    fn atomic_clock_of_xi() {
        let xi = t("\\a b. b (a a b)");
        let delta = t("\\a b. b (a b)");
        let term = Term::apply(xi.clone(), [xi, delta, Term::free("x")]);
        let tree = clocked_bt(&term, 3, FUEL, Mode::Atomic);
        assert_eq!(tree.to_string(), "[⟨11,1,1,ε⟩]x([⟨11,1,1,ε⟩]x([⟨11,1,1,ε⟩]x(?)))");
        let counts = clocked_bt(&term, 3, FUEL, Mode::Count);
        assert_eq!(tree.to_counts(), counts);
    }

    #[test]
    fn subsequence_order() {
        let ps = |v: &[&str]| v.iter().map(|s| pos(s)).collect::<Vec<_>>();
        assert!(subsequence_leq(&[], &ps(&["1"])));
        assert!(subsequence_leq(&ps(&["11", "1"]), &ps(&["11", "1", ""])));
        let a = ps(&["11", "1", "", "1"]);
        let b = ps(&["11", "1", "1", ""]);
        assert!(!subsequence_leq(&a, &b));
        assert!(!subsequence_leq(&b, &a));
    }

    #[test]
    fn positions_of_nodes() {
        let tree = clocked_bt(&Term::app(y0(), Term::free("f")), 3, FUEL, Mode::Count);
        let b = clocked_bt(&Term::app(y1(), Term::free("f")), 3, FUEL, Mode::Count);
        assert_eq!(rel_at(&tree, &b, &Position::root(), Relation::Le), Tri::Holds);
        assert_eq!(rel_at(&tree, &b, &pos("2"), Relation::Le), Tri::Holds);
        assert_eq!(rel_at(&tree, &b, &pos("2"), Relation::Ge), Tri::Fails);
        assert_eq!(rel_at(&tree, &b, &pos("1"), Relation::Ge), Tri::Holds);
        assert_eq!(rel_at(&tree, &b, &pos("222"), Relation::Eq), Tri::Unknown);
        assert_eq!(rel_at(&tree, &b, &pos("0"), Relation::Eq), Tri::Fails);
    }

    #[test]
    fn binder_positions_are_inner() {
        let tree = clocked_bt(&t("\\a b. a (b b) b"), 3, FUEL, Mode::Count);
        assert!(matches!(tree.locate(&pos("0")), Located::Inner));
        assert!(matches!(tree.locate(&pos("0011")), Located::Inner));
        assert!(matches!(tree.locate(&pos("0012")), Located::Node(_)));
        assert!(matches!(tree.locate(&pos("002")), Located::Node(_)));
        assert!(matches!(tree.locate(&pos("00122")), Located::Node(_)));
        assert!(matches!(tree.locate(&pos("0022")), Located::Invalid));
        assert!(matches!(tree.locate(&pos("0021")), Located::Invalid));
        assert_eq!(tree.to_string(), "[0]λa b.a([0]b([0]b))([0]b)");
    }

    #[test]
    fn lifted_relations() {
        let f = Term::free("f");
        let a = clocked_bt(&Term::app(y1(), f.clone()), 5, FUEL, Mode::Count);
        let b = clocked_bt(&Term::app(y0(), f), 5, FUEL, Mode::Count);
        assert_eq!(rel_all(&a, &b, Relation::Ge).outcome, Tri::Unknown);
        let gt = rel_all(&a, &b, Relation::Gt);
        assert_eq!(gt.outcome, Tri::Fails);
        assert_eq!(gt.witness, Some(Position::root()));
        assert_eq!(rel_eventually(&a, &b, Relation::Gt, 1).outcome, Tri::Unknown);
        let x = clocked_bt(&t("\\a. a a"), 4, FUEL, Mode::Count);
        assert_eq!(rel_eventually(&x, &x, Relation::Eq, 0).outcome, Tri::Holds);
    }

    #[test]
    fn annotation_json() {
        let a = Annotation::Positions(vec![pos("11"), Position::root()]);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"["11",""]"#);
        assert_eq!(serde_json::to_string(&Annotation::Count(3)).unwrap(), "3");
    }
}
