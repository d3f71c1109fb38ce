//! Finite graph presentations of clocked Böhm trees, and relation checks on
//! them that hold for the whole infinite tree.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::reduction::{reduce_to_hnf, ReductionOutcome, DEFAULT_FUEL};
use crate::term::{Hint, Position, Term};
use crate::tree::{child_position, head_of, Annotation, ClockedTree, Head, Mode, Relation, Tri};

pub const DEFAULT_MAX_NODES: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RationalLimits {
    /// Head steps per node.
    pub fuel: usize,
    pub mode: Mode,
    pub max_nodes: usize,
}

impl Default for RationalLimits {
    fn default() -> Self {
        RationalLimits {
            fuel: DEFAULT_FUEL,
            mode: Mode::Count,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Bot,
    Hnf {
        clock: Annotation,
        binders: Vec<Hint>,
        head: Head,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub label: Label,
    /// Child edges with their position relative to this node.
    pub children: Vec<(Position, usize)>,
    /// The term this node was expanded from.
    pub term: Term,
}

/// A clocked Böhm tree as a finite graph. Node 0 is the root; nodes are
/// numbered in breadth-first discovery order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalTree {
    pub nodes: Vec<Node>,
}

impl RationalTree {
    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Edges pointing to a node discovered no later than their source.
    pub fn is_back_edge(&self, from: usize, to: usize) -> bool {
        to <= from
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, &Position, usize)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.children.iter().map(move |(p, j)| (i, p, *j)))
    }

    /// Unfolds to a truncated tree with `Unknown` below `depth` levels.
    pub fn unfold(&self, depth: usize) -> ClockedTree {
        self.unfold_from(self.root(), depth)
    }

    fn unfold_from(&self, id: usize, depth: usize) -> ClockedTree {
        if depth == 0 {
            return ClockedTree::Unknown;
        }
        let node = &self.nodes[id];
        match &node.label {
            Label::Bot => ClockedTree::Bot,
            Label::Hnf { clock, binders, head } => ClockedTree::Bt {
                clock: Some(clock.clone()),
                binders: binders.clone(),
                head: head.clone(),
                args: node
                    .children
                    .iter()
                    .map(|(_, c)| self.unfold_from(*c, depth - 1))
                    .collect(),
            },
        }
    }

    /// Clocks along the path that always takes the last child, until a node
    /// repeats. Returns the visited clocks and the index where the loop starts.
    pub fn spine_clocks(&self) -> (Vec<Option<Annotation>>, Option<usize>) {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        let mut cur = self.root();
        loop {
            if let Some(&i) = seen.get(&cur) {
                return (out, Some(i));
            }
            seen.insert(cur, out.len());
            let node = &self.nodes[cur];
            match &node.label {
                Label::Bot => {
                    out.push(None);
                    return (out, None);
                }
                Label::Hnf { clock, .. } => out.push(Some(clock.clone())),
            }
            match node.children.last() {
                Some((_, c)) => cur = *c,
                None => return (out, None),
            }
        }
    }
}

/// Expands the clocked Böhm tree of `t`, sharing alpha-equal subterms.
/// `None` when a node needs more than `fuel` steps, or the graph would
/// exceed `max_nodes`.
pub fn rational_expand(t: &Term, limits: RationalLimits) -> Option<RationalTree> {
    let mut ids: HashMap<Term, usize> = HashMap::new();
    let mut nodes: Vec<Option<Node>> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(t.clone(), 0);
    nodes.push(None);
    queue.push_back(t.clone());
    while let Some(cur) = queue.pop_front() {
        let id = ids[&cur];
        let node = match reduce_to_hnf(&cur, limits.fuel) {
            ReductionOutcome::Cycle { .. } => Node {
                label: Label::Bot,
                children: Vec::new(),
                term: cur,
            },
            ReductionOutcome::FuelExhausted { .. } => return None,
            ReductionOutcome::Reached { form, trace } => {
                let (binders, body) = form.binders();
                let (head, args) = body.spine();
                let head = head_of(head, &binders);
                let m = args.len();
                let mut children = Vec::with_capacity(m);
                for (i, a) in args.into_iter().enumerate() {
                    let next = match ids.get(a) {
                        Some(&j) => j,
                        None => {
                            if nodes.len() >= limits.max_nodes {
                                return None;
                            }
                            let j = nodes.len();
                            ids.insert(a.clone(), j);
                            nodes.push(None);
                            queue.push_back(a.clone());
                            j
                        }
                    };
                    children.push((child_position(binders.len(), m, i), next));
                }
                Node {
                    label: Label::Hnf {
                        clock: Annotation::from_trace(&trace, limits.mode),
                        binders,
                        head,
                    },
                    children,
                    term: cur,
                }
            }
        };
        nodes[id] = Some(node);
    }
    Some(RationalTree {
        nodes: nodes.into_iter().map(|n| n.expect("every node expanded")).collect(),
    })
}

/// Positions `prefix · pump^k · suffix`, for every k, all satisfy the relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pump {
    pub prefix: Position,
    pub pump: Position,
    pub suffix: Position,
}

impl Pump {
    pub fn instance(&self, k: usize) -> Position {
        let mut p = self.prefix.clone();
        for _ in 0..k {
            p = p.concat(&self.pump);
        }
        p.concat(&self.suffix)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalCheck {
    pub outcome: Tri,
    /// For `eventually`: the least node level from which the relation holds.
    pub from_level: Option<usize>,
    /// A position where the check is decided (a violation or a witness).
    pub witness: Option<Position>,
    /// For `infinitely often`: infinitely many witnesses.
    pub pump: Option<Pump>,
    /// Node pairs lying on cycles of the product graph.
    pub cycle_nodes: Vec<(usize, usize)>,
}

/// The synchronous product of two rational trees.
pub struct Product<'a> {
    left: &'a RationalTree,
    right: &'a RationalTree,
    pairs: Vec<(usize, usize)>,
    succ: Vec<Vec<(Position, usize)>>,
    /// Shortest position reaching each pair.
    reach: Vec<Position>,
    on_cycle: Vec<bool>,
    recurrent: Vec<bool>,
    mismatch: Option<Position>,
}

impl<'a> Product<'a> {
    pub fn new(left: &'a RationalTree, right: &'a RationalTree) -> Self {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pairs = vec![(left.root(), right.root())];
        let mut succ: Vec<Vec<(Position, usize)>> = vec![Vec::new()];
        let mut reach = vec![Position::root()];
        let mut mismatch = None;
        index.insert(pairs[0], 0);
        let mut i = 0;
        while i < pairs.len() {
            let (a, b) = pairs[i];
            let (na, nb) = (&left.nodes[a], &right.nodes[b]);
            if !same_label_shape(&na.label, &nb.label) || na.children.len() != nb.children.len() {
                if mismatch.is_none() {
                    mismatch = Some(reach[i].clone());
                }
                i += 1;
                continue;
            }
            for ((p, x), (_, y)) in na.children.iter().zip(&nb.children) {
                let key = (*x, *y);
                let j = *index.entry(key).or_insert_with(|| {
                    pairs.push(key);
                    succ.push(Vec::new());
                    reach.push(reach[i].concat(p));
                    pairs.len() - 1
                });
                succ[i].push((p.clone(), j));
            }
            i += 1;
        }
        let on_cycle = cyclic_nodes(&succ);
        let recurrent = reachable_from(&succ, &on_cycle);
        Product { left, right, pairs, succ, reach, on_cycle, recurrent, mismatch }
    }

    /// Whether the two trees agree once clocks are dropped.
    pub fn bt_equal(&self) -> bool {
        self.mismatch.is_none()
    }

    /// A shortest position where the underlying trees differ.
    pub fn mismatch(&self) -> Option<&Position> {
        self.mismatch.as_ref()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn labels(&self, i: usize) -> (&Label, &Label) {
        let (a, b) = self.pairs[i];
        (&self.left.nodes[a].label, &self.right.nodes[b].label)
    }

    /// Lifted relation at a node pair: both unannotated, or both annotated
    /// and related.
    fn holds(&self, i: usize, r: Relation) -> bool {
        match self.labels(i) {
            (Label::Bot, Label::Bot) => true,
            (Label::Hnf { clock: x, .. }, Label::Hnf { clock: y, .. }) => r.eval(x, y),
            _ => false,
        }
    }

    fn annotated_holds(&self, i: usize, r: Relation) -> bool {
        matches!(self.labels(i), (Label::Hnf { .. }, Label::Hnf { .. })) && self.holds(i, r)
    }

    fn cycle_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.pairs.len())
            .filter(|&i| self.on_cycle[i])
            .map(|i| self.pairs[i])
            .collect()
    }

    fn mismatch_check(&self) -> Option<RationalCheck> {
        self.mismatch.as_ref().map(|p| RationalCheck {
            outcome: Tri::Fails,
            from_level: None,
            witness: Some(p.clone()),
            pump: None,
            cycle_nodes: Vec::new(),
        })
    }

    /// `R` at all node positions from some level on.
    pub fn eventually(&self, r: Relation) -> RationalCheck {
        if let Some(c) = self.mismatch_check() {
            return c;
        }
        let cycle_nodes = self.cycle_pairs();
        let violations: Vec<usize> = (0..self.pairs.len()).filter(|&i| !self.holds(i, r)).collect();
        if let Some(&i) = violations.iter().find(|&&i| self.recurrent[i]) {
            return RationalCheck {
                outcome: Tri::Fails,
                from_level: None,
                witness: Some(self.reach[i].clone()),
                pump: self.pump_to(i),
                cycle_nodes,
            };
        }
        let levels = self.max_levels();
        let from_level = violations.iter().map(|&i| levels[i] + 1).max().unwrap_or(0);
        RationalCheck {
            outcome: Tri::Holds,
            from_level: Some(from_level),
            witness: None,
            pump: None,
            cycle_nodes,
        }
    }

    /// `R` at infinitely many positions where both trees carry a clock.
    pub fn infinitely_often(&self, r: Relation) -> RationalCheck {
        if let Some(c) = self.mismatch_check() {
            return c;
        }
        let cycle_nodes = self.cycle_pairs();
        let hit = (0..self.pairs.len()).find(|&i| self.recurrent[i] && self.annotated_holds(i, r));
        match hit {
            Some(i) => RationalCheck {
                outcome: Tri::Holds,
                from_level: None,
                witness: Some(self.reach[i].clone()),
                pump: self.pump_to(i),
                cycle_nodes,
            },
            None => RationalCheck {
                outcome: Tri::Fails,
                from_level: None,
                witness: None,
                pump: None,
                cycle_nodes,
            },
        }
    }

    /// Longest node level at which each non-recurrent pair occurs.
    fn max_levels(&self) -> Vec<usize> {
        let n = self.pairs.len();
        let mut indeg = vec![0usize; n];
        for (i, out) in self.succ.iter().enumerate() {
            if self.recurrent[i] {
                continue;
            }
            for (_, j) in out {
                indeg[*j] += 1;
            }
        }
        let mut level = vec![0usize; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| !self.recurrent[i] && indeg[i] == 0).collect();
        while let Some(i) = queue.pop_front() {
            for (_, j) in &self.succ[i] {
                if self.recurrent[*j] {
                    continue;
                }
                level[*j] = level[*j].max(level[i] + 1);
                indeg[*j] -= 1;
                if indeg[*j] == 0 {
                    queue.push_back(*j);
                }
            }
        }
        level
    }

    /// A pump through a cycle that reaches pair `target`.
    fn pump_to(&self, target: usize) -> Option<Pump> {
        if !self.recurrent[target] {
            return None;
        }
        // nearest cycle pair from which `target` is reachable
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); self.pairs.len()];
        for (i, out) in self.succ.iter().enumerate() {
            for (_, j) in out {
                pred[*j].push(i);
            }
        }
        let mut seen = vec![false; self.pairs.len()];
        let mut queue = VecDeque::from([target]);
        seen[target] = true;
        let mut anchor = None;
        while let Some(i) = queue.pop_front() {
            if self.on_cycle[i] {
                anchor = Some(i);
                break;
            }
            for &j in &pred[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        let c = anchor?;
        let pump = self.cycle_path(c)?;
        let suffix = self.path(c, target)?;
        Some(Pump {
            prefix: self.reach[c].clone(),
            pump,
            suffix,
        })
    }

    /// Shortest relative position leading from pair `from` to pair `to`.
    fn path(&self, from: usize, to: usize) -> Option<Position> {
        if from == to {
            return Some(Position::root());
        }
        self.search(from, |j| j == to)
    }

    fn cycle_path(&self, c: usize) -> Option<Position> {
        self.search(c, |j| j == c)
    }

    fn search(&self, from: usize, goal: impl Fn(usize) -> bool) -> Option<Position> {
        let mut back: HashMap<usize, (usize, Position)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(i) = queue.pop_front() {
            for (p, j) in &self.succ[i] {
                if goal(*j) {
                    let mut parts = vec![p.clone()];
                    let mut k = i;
                    while k != from {
                        let (prev, q) = back[&k].clone();
                        parts.push(q);
                        k = prev;
                    }
                    return Some(parts.iter().rev().fold(Position::root(), |acc, q| acc.concat(q)));
                }
                if *j != from && !back.contains_key(j) {
                    back.insert(*j, (i, p.clone()));
                    queue.push_back(*j);
                }
            }
        }
        None
    }
}

fn same_label_shape(a: &Label, b: &Label) -> bool {
    match (a, b) {
        (Label::Bot, Label::Bot) => true,
        (
            Label::Hnf { binders: b1, head: h1, .. },
            Label::Hnf { binders: b2, head: h2, .. },
        ) => b1.len() == b2.len() && h1.var == h2.var,
        _ => false,
    }
}

/// Nodes lying on some cycle (including self-loops).
fn cyclic_nodes(succ: &[Vec<(Position, usize)>]) -> Vec<bool> {
    let n = succ.len();
    let comp = strongly_connected(succ);
    let mut size = vec![0usize; n];
    for &c in &comp {
        size[c] += 1;
    }
    (0..n)
        .map(|i| size[comp[i]] > 1 || succ[i].iter().any(|(_, j)| *j == i))
        .collect()
}

fn reachable_from(succ: &[Vec<(Position, usize)>], start: &[bool]) -> Vec<bool> {
    let mut mark = start.to_vec();
    let mut stack: Vec<usize> = (0..succ.len()).filter(|&i| start[i]).collect();
    while let Some(i) = stack.pop() {
        for (_, j) in &succ[i] {
            if !mark[*j] {
                mark[*j] = true;
                stack.push(*j);
            }
        }
    }
    mark
}

/// Kosaraju's algorithm with explicit stacks; returns a component id per node.
fn strongly_connected(succ: &[Vec<(Position, usize)>]) -> Vec<usize> {
    let n = succ.len();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for s in 0..n {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((v, k)) = stack.pop() {
            if k < succ[v].len() {
                stack.push((v, k + 1));
                let w = succ[v][k].1;
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, out) in succ.iter().enumerate() {
        for (_, w) in out {
            pred[*w].push(v);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &pred[v] {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use crate::tree::clocked_bt;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    const Y0: &str = "(\\f. (\\x. f (x x)) (\\x. f (x x)))";
    const Y1: &str = "((\\x f. f (x x f)) (\\x f. f (x x f)))";

    fn expand(s: &str) -> RationalTree {
        rational_expand(&t(s), RationalLimits::default()).expect("rational")
    }

    fn clocks(r: &RationalTree) -> Vec<usize> {
        r.nodes
            .iter()
            .map(|n| match &n.label {
                Label::Hnf { clock, .. } => clock.count(),
                Label::Bot => usize::MAX,
            })
            .collect()
    }

    #[test]
    fn turing_is_one_node() {
        let r = expand(&format!("{Y1} f"));
        assert_eq!(r.len(), 1);
        assert_eq!(clocks(&r), vec![2]);
        assert_eq!(r.nodes[0].children.len(), 1);
        assert!(r.is_back_edge(0, r.nodes[0].children[0].1));
    }

    #[test]
    fn curry_is_two_nodes() {
        let r = expand(&format!("{Y0} f"));
        assert_eq!(clocks(&r), vec![2, 1]);
        assert_eq!(r.nodes[1].children[0].1, 1);
        let (spine, loop_at) = r.spine_clocks();
        assert_eq!(spine.len(), 2);
        assert_eq!(loop_at, Some(1));
    }

    #[test]
    fn plotkin_a_is_one_node_with_two_loops() {
        let r = expand(&format!("{Y1} (\\z. f z z)"));
        assert_eq!(clocks(&r), vec![3]);
        let targets: Vec<usize> = r.nodes[0].children.iter().map(|c| c.1).collect();
        assert_eq!(targets, vec![0, 0]);
    }

    #[test]
    fn unfolding_agrees_with_truncation() {
        for s in [format!("{Y0} f"), format!("{Y1} (\\x. {Y1} (\\y. f x y))")] {
            let r = expand(&s);
            for d in 0..5 {
                assert_eq!(r.unfold(d), clocked_bt(&t(&s), d, 1000, Mode::Count));
            }
        }
    }

    #[test]
    fn bot_nodes() {
        let r = expand("x ((\\x.x x)(\\x.x x))");
        assert_eq!(r.len(), 2);
        assert_eq!(r.nodes[1].label, Label::Bot);
    }

    #[test]
    fn non_rational_gives_none() {
        // x (c1 x), x (c2 x), ... with ever larger arguments
        let grow = t("(\\a f. f (a a (\\y. f y))) (\\a f. f (a a (\\y. f y))) x");
        let limits = RationalLimits { max_nodes: 32, ..Default::default() };
        assert!(rational_expand(&grow, limits).is_none());
    }

    #[test]
    fn product_relations() {
        let a = expand(&format!("{Y1} f"));
        let b = expand(&format!("{Y0} f"));
        let prod = Product::new(&a, &b);
        assert!(prod.bt_equal());
        let gt = prod.infinitely_often(Relation::Gt);
        assert_eq!(gt.outcome, Tri::Holds);
        let pump = gt.pump.unwrap();
        assert_eq!(pump.pump, Position::root().child(2));
        let ev = prod.eventually(Relation::Gt);
        assert_eq!(ev.outcome, Tri::Holds);
        assert_eq!(ev.from_level, Some(1));
        assert_eq!(prod.eventually(Relation::Eq).outcome, Tri::Fails);
        let same = Product::new(&a, &a);
        assert_eq!(same.eventually(Relation::Eq).from_level, Some(0));
        assert_eq!(same.infinitely_often(Relation::Ne).outcome, Tri::Fails);
    }

    #[test]
    fn product_detects_bt_difference() {
        let a = expand(&format!("{Y1} f"));
        let b = expand(&format!("{Y1} g"));
        let prod = Product::new(&a, &b);
        assert_eq!(prod.mismatch(), Some(&Position::root()));
        assert_eq!(prod.eventually(Relation::Eq).outcome, Tri::Fails);
    }

    #[test]
    fn pump_positions_replay() {
        let a = expand(&format!("{Y1} (\\x. {Y1} (\\y. f x y))"));
        let b = expand(&format!("{Y1} (\\z. f z z)"));
        let prod = Product::new(&a, &b);
        let io = prod.infinitely_often(Relation::Gt);
        assert_eq!(io.outcome, Tri::Holds);
        let pump = io.pump.unwrap();
        let (ta, tb) = (a.unfold(8), b.unfold(8));
        for k in 0..3 {
            let p = pump.instance(k);
            assert_eq!(crate::tree::rel_at(&ta, &tb, &p, Relation::Gt), Tri::Holds, "{p}");
        }
    }
}
