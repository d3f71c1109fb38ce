//! Beta-reduction, head reduction with step traces, and bounded searches.
//!
//! Every search that can diverge takes a fuel bound and distinguishes a
//! certified loop ([`ReductionOutcome::Cycle`]) from running out of fuel.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::term::{Position, Term, TermError, TermKind};

pub const DEFAULT_FUEL: usize = 10_000;

/// Steps of leftmost-outermost reduction tried before the two-sided search.
const NF_PREPASS: usize = 1_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RedexKind {
    Linear,
    #[serde(rename = "cbv")]
    CallByValue,
    Both,
    Neither,
}

impl RedexKind {
    pub fn is_simple(self) -> bool {
        self != RedexKind::Neither
    }

    pub fn label(self) -> &'static str {
        match self {
            RedexKind::Linear => "linear",
            RedexKind::CallByValue => "cbv",
            RedexKind::Both => "both",
            RedexKind::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub position: Position,
    pub kind: RedexKind,
}

/// Sequence of contracted redexes; serializes as `[{"position":"11","kind":"cbv"}, ...]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepTrace {
    pub steps: Vec<Step>,
}

impl StepTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn positions(&self) -> Vec<Position> {
        self.steps.iter().map(|s| s.position.clone()).collect()
    }

    pub fn all_simple(&self) -> bool {
        self.steps.iter().all(|s| s.kind.is_simple())
    }

    /// Replays the trace from `start`.
    pub fn replay(&self, start: &Term) -> Result<Term, TermError> {
        self.steps
            .iter()
            .try_fold(start.clone(), |t, s| beta_step_at(&t, &s.position))
    }

    fn push(&mut self, position: Position, kind: RedexKind) {
        self.steps.push(Step { position, kind });
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionOutcome {
    Reached { form: Term, trace: StepTrace },
    /// The reduction revisited `witness`; it will loop forever.
    Cycle { witness: Term, trace: StepTrace },
    FuelExhausted { last: Term, trace: StepTrace },
}

impl ReductionOutcome {
    pub fn trace(&self) -> &StepTrace {
        match self {
            ReductionOutcome::Reached { trace, .. }
            | ReductionOutcome::Cycle { trace, .. }
            | ReductionOutcome::FuelExhausted { trace, .. } => trace,
        }
    }

    pub fn reached(&self) -> Option<&Term> {
        match self {
            ReductionOutcome::Reached { form, .. } => Some(form),
            _ => None,
        }
    }

    pub fn term(&self) -> &Term {
        match self {
            ReductionOutcome::Reached { form: t, .. }
            | ReductionOutcome::Cycle { witness: t, .. }
            | ReductionOutcome::FuelExhausted { last: t, .. } => t,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ReductionOutcome::Reached { .. } => "reached",
            ReductionOutcome::Cycle { .. } => "cycle",
            ReductionOutcome::FuelExhausted { .. } => "fuel-exhausted",
        }
    }
}

/// Position of the head redex of `λx1..xn.(λy.M) N N1 .. Nm`, if any.
pub fn head_redex_position(t: &Term) -> Option<Position> {
    let (binders, body) = t.binders();
    let (head, args) = body.spine();
    if !head.is_lam() || args.is_empty() {
        return None;
    }
    let mut digits = vec![0u8; binders.len()];
    digits.extend(std::iter::repeat_n(1u8, args.len() - 1));
    Position::from_digits(digits)
}

/// Position of the weak head redex (no reduction under a leading abstraction).
pub fn weak_head_redex_position(t: &Term) -> Option<Position> {
    if t.is_lam() {
        return None;
    }
    head_redex_position(t)
}

pub fn beta_step_at(t: &Term, p: &Position) -> Result<Term, TermError> {
    t.replace_at(p, |r| r.contract().ok_or_else(|| TermError::NotARedex(p.clone())))
}

pub fn classify_redex(t: &Term, p: &Position) -> Result<RedexKind, TermError> {
    let r = t.subterm_at(p)?;
    classify_root(r).ok_or_else(|| TermError::NotARedex(p.clone()))
}

fn classify_root(r: &Term) -> Option<RedexKind> {
    let (f, arg) = r.as_app()?;
    let (_, body) = f.as_lam()?;
    let linear = body.count_bound(0) <= 1;
    let cbv = arg.is_normal();
    Some(match (linear, cbv) {
        (true, true) => RedexKind::Both,
        (true, false) => RedexKind::Linear,
        (false, true) => RedexKind::CallByValue,
        (false, false) => RedexKind::Neither,
    })
}

/// Contracts the redex at `p` and reports its kind.
fn step(t: &Term, p: &Position) -> (Term, RedexKind) {
    let kind = classify_redex(t, p).expect("caller passes a redex position");
    let next = beta_step_at(t, p).expect("caller passes a redex position");
    (next, kind)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Hnf,
    Whnf,
}

/// Head-reduces until `stop` holds, with loop detection on alpha-normal states.
fn head_reduce(t: &Term, fuel: usize, target: Target) -> ReductionOutcome {
    let mut seen: HashSet<Term> = HashSet::new();
    let mut cur = t.clone();
    let mut trace = StepTrace::default();
    loop {
        let redex = match target {
            Target::Hnf => head_redex_position(&cur),
            Target::Whnf => weak_head_redex_position(&cur),
        };
        let Some(p) = redex else {
            return ReductionOutcome::Reached { form: cur, trace };
        };
        if !seen.insert(cur.clone()) {
            return ReductionOutcome::Cycle { witness: cur, trace };
        }
        if trace.len() >= fuel {
            return ReductionOutcome::FuelExhausted { last: cur, trace };
        }
        let (next, kind) = step(&cur, &p);
        trace.push(p, kind);
        cur = next;
    }
}

pub fn reduce_to_hnf(t: &Term, fuel: usize) -> ReductionOutcome {
    head_reduce(t, fuel, Target::Hnf)
}

pub fn reduce_to_whnf(t: &Term, fuel: usize) -> ReductionOutcome {
    head_reduce(t, fuel, Target::Whnf)
}

/// Head-reduces to a root-stable term: a variable, an abstraction, or an
/// application whose function part provably never becomes an abstraction.
///
/// `Cycle` certifies root-activeness: every state on the loop reduces to a
/// root redex.
pub fn reduce_to_root_stable(t: &Term, fuel: usize) -> ReductionOutcome {
    let mut seen: HashSet<Term> = HashSet::new();
    let mut cur = t.clone();
    let mut trace = StepTrace::default();
    loop {
        let Some((fun, arg)) = cur.as_app() else {
            return ReductionOutcome::Reached { form: cur, trace };
        };
        if !seen.insert(cur.clone()) {
            return ReductionOutcome::Cycle { witness: cur, trace };
        }
        if !fun.is_lam() {
            // Reduce the function part to weak head normal form; its head steps
            // are head steps of the whole term under position 1.
            let budget = fuel.saturating_sub(trace.len());
            match reduce_to_whnf(fun, budget) {
                ReductionOutcome::Reached { form, trace: inner } => {
                    if !form.is_lam() {
                        // variable-headed: root-stable after the inner steps
                        extend_under(&mut trace, &inner, 1);
                        let next = Term::app(form, arg.clone());
                        return ReductionOutcome::Reached { form: next, trace };
                    }
                    extend_under(&mut trace, &inner, 1);
                    cur = Term::app(form, arg.clone());
                    continue;
                }
                ReductionOutcome::Cycle { .. } => {
                    // the function part has no whnf, so `cur` is root-stable
                    return ReductionOutcome::Reached { form: cur, trace };
                }
                ReductionOutcome::FuelExhausted { last, trace: inner } => {
                    extend_under(&mut trace, &inner, 1);
                    let last = Term::app(last, arg.clone());
                    return ReductionOutcome::FuelExhausted { last, trace };
                }
            }
        }
        if trace.len() >= fuel {
            return ReductionOutcome::FuelExhausted { last: cur, trace };
        }
        let (next, kind) = step(&cur, &Position::root());
        trace.push(Position::root(), kind);
        cur = next;
    }
}

fn extend_under(trace: &mut StepTrace, inner: &StepTrace, digit: u8) {
    let prefix = Position::root().child(digit);
    for s in &inner.steps {
        trace.push(prefix.concat(&s.position), s.kind);
    }
}

/// Leftmost-outermost normalization.
pub fn normalize(t: &Term, fuel: usize) -> ReductionOutcome {
    let mut seen: HashSet<Term> = HashSet::new();
    let mut cur = t.clone();
    let mut trace = StepTrace::default();
    loop {
        let Some(p) = leftmost_outermost(&cur) else {
            return ReductionOutcome::Reached { form: cur, trace };
        };
        if !seen.insert(cur.clone()) {
            return ReductionOutcome::Cycle { witness: cur, trace };
        }
        if trace.len() >= fuel {
            return ReductionOutcome::FuelExhausted { last: cur, trace };
        }
        let (next, kind) = step(&cur, &p);
        trace.push(p, kind);
        cur = next;
    }
}

pub fn leftmost_outermost(t: &Term) -> Option<Position> {
    // the cached normal-form flag tells which branch holds the first redex
    if t.is_normal() {
        return None;
    }
    let mut path = Vec::new();
    let mut cur = t;
    loop {
        match cur.kind() {
            TermKind::Var(_) => unreachable!("non-normal terms contain a redex"),
            TermKind::Lam(_, b) => {
                path.push(0);
                cur = b;
            }
            TermKind::App(f, a) => {
                if f.is_lam() {
                    break;
                }
                if f.is_normal() {
                    path.push(2);
                    cur = a;
                } else {
                    path.push(1);
                    cur = f;
                }
            }
        }
    }
    Some(Position::from_digits(path).expect("digits in range"))
}

/// A reduct together with the steps leading to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduct {
    pub term: Term,
    pub path: Vec<Position>,
}

impl Reduct {
    pub fn origin(t: &Term) -> Self {
        Reduct {
            term: t.clone(),
            path: Vec::new(),
        }
    }

    pub fn then(&self, p: Position, term: Term) -> Self {
        let mut path = self.path.clone();
        path.push(p);
        Reduct { term, path }
    }

    pub fn replay_from(&self, start: &Term) -> Result<Term, TermError> {
        self.path.iter().try_fold(start.clone(), |t, p| beta_step_at(&t, p))
    }
}

/// Serializes as `{"term": "...", "path": ["1", ""]}` with the term in ASCII syntax.
impl Serialize for Reduct {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Reduct", 2)?;
        st.serialize_field("term", &crate::syntax::print(&self.term, crate::syntax::Style::Ascii))?;
        st.serialize_field("path", &self.path)?;
        st.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Convertibility {
    /// Both sides reduce to `witness`.
    Convertible {
        witness: Term,
        left: Reduct,
        right: Reduct,
    },
    Unknown,
}

impl Convertibility {
    pub fn is_convertible(&self) -> bool {
        matches!(self, Convertibility::Convertible { .. })
    }
}

/// Bounded semi-decision of `a =β b`.
///
/// First normalizes both sides leftmost-outermost (a normal form is a common
/// reduct when they agree), then searches reducts of both sides breadth-first
/// by number of steps, alternating sides, until the two explored sets meet or
/// `budget` terms have been visited in total.
pub fn convertible_bounded(a: &Term, b: &Term, budget: usize) -> Convertibility {
    if a == b {
        return Convertibility::Convertible {
            witness: a.clone(),
            left: Reduct::origin(a),
            right: Reduct::origin(b),
        };
    }
    let nf_fuel = budget.min(NF_PREPASS);
    if let (ReductionOutcome::Reached { form: na, trace: ta }, ReductionOutcome::Reached { form: nb, trace: tb }) =
        (normalize(a, nf_fuel), normalize(b, nf_fuel))
    {
        if na == nb {
            return Convertibility::Convertible {
                witness: na.clone(),
                left: Reduct {
                    term: na.clone(),
                    path: ta.positions(),
                },
                right: Reduct {
                    term: nb,
                    path: tb.positions(),
                },
            };
        }
    }

    struct Side {
        seen: HashMap<Term, Reduct>,
        frontier: VecDeque<Reduct>,
    }
    let mut sides = [
        Side {
            seen: HashMap::from([(a.clone(), Reduct::origin(a))]),
            frontier: VecDeque::from([Reduct::origin(a)]),
        },
        Side {
            seen: HashMap::from([(b.clone(), Reduct::origin(b))]),
            frontier: VecDeque::from([Reduct::origin(b)]),
        },
    ];
    let mut visited = 2usize;
    loop {
        let mut progressed = false;
        for s in 0..2 {
            // expand one full BFS level of side `s`
            let level: Vec<Reduct> = sides[s].frontier.drain(..).collect();
            for r in level {
                for p in r.term.redex_positions() {
                    let next = beta_step_at(&r.term, &p).expect("redex position");
                    if sides[s].seen.contains_key(&next) {
                        continue;
                    }
                    let reduct = r.then(p, next.clone());
                    if let Some(other) = sides[1 - s].seen.get(&next) {
                        let (left, right) = if s == 0 {
                            (reduct, other.clone())
                        } else {
                            (other.clone(), reduct)
                        };
                        return Convertibility::Convertible {
                            witness: next,
                            left,
                            right,
                        };
                    }
                    sides[s].seen.insert(next, reduct.clone());
                    sides[s].frontier.push_back(reduct);
                    visited += 1;
                    progressed = true;
                    if visited >= budget {
                        return Convertibility::Unknown;
                    }
                }
            }
        }
        if !progressed {
            return Convertibility::Unknown;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    fn pos(s: &str) -> Position {
        s.parse().unwrap()
    }

    const OMEGA: &str = "(\\x.x x)(\\x.x x)";
    const ETA: &str = "(\\x f. f (x x f))";

    #[test]
    fn head_redex_positions() {
        assert_eq!(head_redex_position(&t(OMEGA)), Some(Position::root()));
        let etaeta_f = t(&format!("{ETA} {ETA} f"));
        assert_eq!(head_redex_position(&etaeta_f), Some(pos("1")));
        assert_eq!(head_redex_position(&t("\\x. x (I I)")), None);
        assert_eq!(head_redex_position(&t("\\x. (\\y.y) x")), Some(pos("0")));
    }

    #[test]
    fn beta_steps() {
        assert_eq!(beta_step_at(&t("(\\y.y) x"), &Position::root()).unwrap(), t("x"));
        assert_eq!(beta_step_at(&t("x ((\\y.y) y)"), &pos("2")).unwrap(), t("x y"));
        assert_eq!(
            beta_step_at(&t("x y"), &Position::root()),
            Err(TermError::NotARedex(Position::root()))
        );
        assert_eq!(
            beta_step_at(&t("x y"), &pos("0")),
            Err(TermError::InvalidPosition(pos("0")))
        );
    }

    #[test]
    fn xi_xi_delta_x_first_step() {
        let xi = "(\\a b. b (a a b))";
        let delta = "(\\a b. b (a b))";
        let start = t(&format!("{xi} {xi} {delta} x"));
        let got = beta_step_at(&start, &pos("11")).unwrap();
        let expected = t(&format!("(\\b. b ({xi} {xi} b)) {delta} x"));
        assert_eq!(got, expected);
    }

    #[test]
    fn classification() {
        let p = Position::root();
        assert_eq!(
            classify_redex(&t("(\\x.y) ((\\z.z) w)"), &p).unwrap(),
            RedexKind::Linear
        );
        let omega_f = "(\\x. f (x x))";
        let y0x = t(&format!("(\\f. {omega_f} {omega_f}) x"));
        assert_eq!(classify_redex(&y0x, &p).unwrap(), RedexKind::CallByValue);
        assert_eq!(classify_redex(&t("(\\x.x) y"), &p).unwrap(), RedexKind::Both);
        let b_step = t(&format!("(\\z. f z z) ({ETA} {ETA} (\\z. f z z))"));
        assert_eq!(classify_redex(&b_step, &p).unwrap(), RedexKind::Neither);
        assert!(classify_redex(&t("x y"), &p).is_err());
    }

    #[test]
    fn turing_reaches_hnf_in_two_steps() {
        let out = reduce_to_hnf(&t(&format!("{ETA} {ETA} f")), DEFAULT_FUEL);
        let ReductionOutcome::Reached { form, trace } = out else {
            panic!("expected hnf")
        };
        assert_eq!(trace.len(), 2);
        assert_eq!(form, t(&format!("f ({ETA} {ETA} f)")));
        assert_eq!(trace.positions(), vec![pos("1"), Position::root()]);
    }

    #[test]
    fn omega_cycles() {
        let out = reduce_to_hnf(&t(OMEGA), DEFAULT_FUEL);
        assert!(matches!(out, ReductionOutcome::Cycle { ref trace, .. } if trace.len() == 1));
        assert!(matches!(reduce_to_whnf(&t(OMEGA), 100), ReductionOutcome::Cycle { .. }));
        assert!(matches!(normalize(&t(OMEGA), 100), ReductionOutcome::Cycle { .. }));
        assert!(matches!(
            reduce_to_root_stable(&t(OMEGA), 100),
            ReductionOutcome::Cycle { .. }
        ));
    }

    #[test]
    fn owl_owl_owl_owl_is_not_certified() {
        let d = "(\\a b. b (a b))";
        let out = reduce_to_hnf(&t(&format!("{d} {d} ({d} {d})")), DEFAULT_FUEL);
        assert!(matches!(out, ReductionOutcome::FuelExhausted { .. }));
    }

    #[test]
    fn whnf_examples() {
        let lam_omega = t(&format!("\\y. {OMEGA}"));
        assert!(matches!(
            reduce_to_whnf(&lam_omega, 10),
            ReductionOutcome::Reached { ref trace, .. } if trace.is_empty()
        ));
        let a = "(\\x y. x x)";
        let out = reduce_to_whnf(&t(&format!("{a} {a}")), 10);
        let ReductionOutcome::Reached { form, trace } = out else { panic!() };
        assert_eq!(trace.len(), 1);
        assert_eq!(form, t(&format!("\\y. {a} {a}")));
    }

    #[test]
    fn root_stable_examples() {
        let out = reduce_to_root_stable(&t(&format!("\\x. {OMEGA}")), 10);
        assert!(matches!(out, ReductionOutcome::Reached { ref trace, .. } if trace.is_empty()));
        let out = reduce_to_root_stable(&t("(\\y.y) x"), 10);
        assert_eq!(out.reached(), Some(&t("x")));
        assert_eq!(out.trace().len(), 1);
        // function part without whnf: Ω x is root-stable as it stands
        let out = reduce_to_root_stable(&t(&format!("{OMEGA} x")), 10);
        assert_eq!(out.reached(), Some(&t(&format!("{OMEGA} x"))));
        // (λx.x) y z: the function part reduces to a variable
        let out = reduce_to_root_stable(&t("(\\x.x) y z"), 10);
        assert_eq!(out.reached(), Some(&t("y z")));
        assert_eq!(out.trace().positions(), vec![pos("1")]);
    }

    #[test]
    fn normalization() {
        let omega_delta = t("\\x. (\\a b. b (a b)) (x x)");
        let out = normalize(&omega_delta, 100);
        assert_eq!(out.reached(), Some(&t("\\a b. b (a a b)")));
        let si = t("(\\x y z. x z (y z)) (\\x.x)");
        let out = normalize(&si, 100);
        assert_eq!(out.reached(), Some(&t("\\y z. z (y z)")));
    }

    #[test]
    fn traces_replay() {
        let start = t(&format!("{ETA} {ETA} f"));
        let out = reduce_to_hnf(&start, 10);
        assert_eq!(&out.trace().replay(&start).unwrap(), out.term());
        let json = serde_json::to_string(out.trace()).unwrap();
        assert_eq!(
            json,
            r#"[{"position":"1","kind":"cbv"},{"position":"","kind":"cbv"}]"#
        );
    }

    #[test]
    fn bounded_convertibility() {
        let i = t("\\x.x");
        let w = t(&format!("(\\y.y) {OMEGA}"));
        assert!(convertible_bounded(&i, &i, 10).is_convertible());
        assert!(convertible_bounded(&t("(\\y.y) (\\x.x)"), &i, 10).is_convertible());
        assert!(!convertible_bounded(&w, &t("\\x.x"), 50).is_convertible());
    }
}
