//! Untyped lambda terms in a nameless (de Bruijn) representation.
//!
//! Binders keep the name the user wrote as a [`Hint`]. Hints never take part in
//! equality or hashing, so alpha-equivalent terms compare equal and land in the
//! same bucket of a `HashSet`.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Display name attached to a binder. Ignored by `==` and `Hash`.
#[derive(Clone)]
pub struct Hint(Arc<str>);

impl Hint {
    pub fn new(name: &str) -> Self {
        Hint(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Hint {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Hint {}

impl Hash for Hint {
    fn hash<H: Hasher>(&self, _state: &mut H) {}
}

impl fmt::Debug for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Hint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A variable occurrence: either a de Bruijn index or a free name.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Bound(usize),
    Free(Arc<str>),
}

/// The three term formers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermKind {
    Var(Var),
    Lam(Hint, Term),
    App(Term, Term),
}

/// An immutable, shared lambda term.
///
/// Each node caches a structural hash, its tree size and an upper bound on its
/// loose de Bruijn indices, so hashing is O(1) and substitution can skip
/// subterms that cannot mention the variable being replaced.
#[derive(Clone)]
pub struct Term(Arc<Node>);

struct Node {
    kind: TermKind,
    hash: u64,
    size: u64,
    /// One more than the largest loose index, 0 when closed.
    loose: usize,
    normal: bool,
    has_free: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("position {0} is not a position of the term")]
    InvalidPosition(Position),
    #[error("subterm at position {0} is not a beta-redex")]
    NotARedex(Position),
}

const TAG_BOUND: u64 = 0x9e37_79b9_7f4a_7c15;
const TAG_FREE: u64 = 0xc2b2_ae3d_27d4_eb4f;
const TAG_LAM: u64 = 0x1656_67b1_9e37_79f9;
const TAG_APP: u64 = 0x27d4_eb2f_1656_67c5;

fn mix(a: u64, b: u64) -> u64 {
    let x = (a ^ b.rotate_left(29)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    (x ^ (x >> 32)).wrapping_mul(0xc4ce_b9fe_1a85_ec53) ^ (x >> 29)
}

fn hash_str(s: &str) -> u64 {
    let mut h = std::hash::DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

impl Drop for Node {
    // Deep spines would otherwise be freed recursively.
    fn drop(&mut self) {
        let mut stack = Vec::new();
        take_children(&mut self.kind, &mut stack);
        while let Some(t) = stack.pop() {
            if let Some(mut node) = Arc::into_inner(t.0) {
                take_children(&mut node.kind, &mut stack);
            }
        }
    }
}

fn take_children(kind: &mut TermKind, out: &mut Vec<Term>) {
    if matches!(kind, TermKind::Var(_)) {
        return;
    }
    match std::mem::replace(kind, TermKind::Var(Var::Bound(0))) {
        TermKind::Lam(_, b) => out.push(b),
        TermKind::App(f, a) => {
            out.push(f);
            out.push(a);
        }
        TermKind::Var(_) => {}
    }
}

fn extend(path: &[u8], d: u8) -> Vec<u8> {
    let mut p = Vec::with_capacity(path.len() + 1);
    p.extend_from_slice(path);
    p.push(d);
    p
}

impl Term {
    fn from_kind(kind: TermKind) -> Term {
        let (hash, size, loose, normal, has_free) = match &kind {
            TermKind::Var(Var::Bound(k)) => (mix(TAG_BOUND, *k as u64), 1, k + 1, true, false),
            TermKind::Var(Var::Free(n)) => (mix(TAG_FREE, hash_str(n)), 1, 0, true, true),
            TermKind::Lam(_, b) => (
                mix(TAG_LAM, b.0.hash),
                b.0.size.saturating_add(1),
                b.0.loose.saturating_sub(1),
                b.0.normal,
                b.0.has_free,
            ),
            TermKind::App(f, a) => (
                mix(mix(TAG_APP, f.0.hash), a.0.hash),
                f.0.size.saturating_add(a.0.size).saturating_add(1),
                f.0.loose.max(a.0.loose),
                !f.is_lam() && f.0.normal && a.0.normal,
                f.0.has_free || a.0.has_free,
            ),
        };
        Term(Arc::new(Node {
            kind,
            hash,
            size,
            loose,
            normal,
            has_free,
        }))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    pub fn free(name: &str) -> Term {
        Term::var(Var::Free(Arc::from(name)))
    }

    pub fn bound(index: usize) -> Term {
        Term::var(Var::Bound(index))
    }

    pub fn var(v: Var) -> Term {
        Term::from_kind(TermKind::Var(v))
    }

    pub fn lam(hint: &str, body: Term) -> Term {
        Term::from_kind(TermKind::Lam(Hint::new(hint), body))
    }

    pub fn lam_hint(hint: Hint, body: Term) -> Term {
        Term::from_kind(TermKind::Lam(hint, body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::from_kind(TermKind::App(fun, arg))
    }

    /// Left-nested application `head a1 a2 ... an`.
    pub fn apply<I>(head: Term, args: I) -> Term
    where
        I: IntoIterator<Item = Term>,
    {
        args.into_iter().fold(head, Term::app)
    }

    /// Closes `body` over the free variable `name`, producing `λname.body`.
    pub fn abstract_free(name: &str, body: &Term) -> Term {
        fn go(t: &Term, name: &str, depth: usize) -> Term {
            match t.kind() {
                TermKind::Var(Var::Free(n)) if &**n == name => Term::bound(depth),
                TermKind::Var(_) => t.clone(),
                TermKind::Lam(h, b) => Term::lam_hint(h.clone(), go(b, name, depth + 1)),
                TermKind::App(f, a) => Term::app(go(f, name, depth), go(a, name, depth)),
            }
        }
        Term::lam(name, go(body, name, 0))
    }

    pub fn as_lam(&self) -> Option<(&Hint, &Term)> {
        match self.kind() {
            TermKind::Lam(h, b) => Some((h, b)),
            _ => None,
        }
    }

    pub fn as_app(&self) -> Option<(&Term, &Term)> {
        match self.kind() {
            TermKind::App(f, a) => Some((f, a)),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self.kind() {
            TermKind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_lam(&self) -> bool {
        matches!(self.kind(), TermKind::Lam(..))
    }

    pub fn is_app(&self) -> bool {
        matches!(self.kind(), TermKind::App(..))
    }

    pub fn is_var(&self) -> bool {
        matches!(self.kind(), TermKind::Var(..))
    }

    /// `(λx.A) B` at the root.
    pub fn is_redex(&self) -> bool {
        matches!(self.kind(), TermKind::App(f, _) if f.is_lam())
    }

    /// Tree size (saturating; shared subterms count once per occurrence).
    pub fn size(&self) -> u64 {
        self.0.size
    }

    /// Splits `h a1 ... an` into the head and its arguments.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let TermKind::App(f, a) = cur.kind() {
            args.push(a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Strips leading abstractions, returning their hints and the body.
    pub fn binders(&self) -> (Vec<Hint>, &Term) {
        let mut hints = Vec::new();
        let mut cur = self;
        while let TermKind::Lam(h, b) = cur.kind() {
            hints.push(h.clone());
            cur = b;
        }
        (hints, cur)
    }

    /// True when no de Bruijn index escapes the term.
    pub fn is_closed(&self) -> bool {
        self.0.loose == 0
    }

    /// One more than the largest loose index (0 for closed terms).
    pub fn loose_bound(&self) -> usize {
        self.0.loose
    }

    /// True when the term contains no free names and no loose indices.
    pub fn is_combinator(&self) -> bool {
        self.is_closed() && !self.0.has_free
    }

    pub fn free_names(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if !t.0.has_free {
                continue;
            }
            match t.kind() {
                TermKind::Var(Var::Free(n)) => {
                    out.insert(n.clone());
                }
                TermKind::Var(_) => {}
                TermKind::Lam(_, b) => stack.push(b),
                TermKind::App(f, a) => {
                    stack.push(f);
                    stack.push(a);
                }
            }
        }
        out
    }

    /// Number of occurrences of the variable bound `depth` binders above.
    pub fn count_bound(&self, depth: usize) -> usize {
        let mut n = 0;
        let mut stack = vec![(self, depth)];
        while let Some((t, d)) = stack.pop() {
            if t.0.loose <= d {
                continue;
            }
            match t.kind() {
                TermKind::Var(Var::Bound(k)) => n += usize::from(*k == d),
                TermKind::Var(_) => {}
                TermKind::Lam(_, b) => stack.push((b, d + 1)),
                TermKind::App(f, a) => {
                    stack.push((f, d));
                    stack.push((a, d));
                }
            }
        }
        n
    }

    /// Beta-normal form check.
    pub fn is_normal(&self) -> bool {
        self.0.normal
    }

    /// Whether any free name occurs.
    pub fn has_free_names(&self) -> bool {
        self.0.has_free
    }

    /// `λx1...xn. y M1 ... Mm`
    pub fn is_hnf(&self) -> bool {
        let (_, body) = self.binders();
        body.spine().0.is_var()
    }

    /// An hnf or an abstraction.
    pub fn is_whnf(&self) -> bool {
        self.is_lam() || self.spine().0.is_var()
    }

    /// Shifts loose indices `>= cutoff` by `by`.
    pub fn shift(&self, by: usize, cutoff: usize) -> Term {
        if by == 0 || self.0.loose <= cutoff {
            return self.clone();
        }
        match self.kind() {
            TermKind::Var(Var::Bound(k)) => Term::bound(k + by),
            TermKind::Var(_) => self.clone(),
            TermKind::Lam(h, b) => Term::lam_hint(h.clone(), b.shift(by, cutoff + 1)),
            TermKind::App(f, a) => Term::app(f.shift(by, cutoff), a.shift(by, cutoff)),
        }
    }

    /// All valid positions in preorder.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((t, path)) = stack.pop() {
            match t.kind() {
                TermKind::Var(_) => {}
                TermKind::Lam(_, b) => stack.push((b, extend(&path, 0))),
                TermKind::App(f, a) => {
                    stack.push((a, extend(&path, 2)));
                    stack.push((f, extend(&path, 1)));
                }
            }
            out.push(Position(path));
        }
        out
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &d in p.digits() {
            cur = match (cur.kind(), d) {
                (TermKind::Lam(_, b), 0) => b,
                (TermKind::App(f, _), 1) => f,
                (TermKind::App(_, a), 2) => a,
                _ => return Err(TermError::InvalidPosition(p.clone())),
            };
        }
        Ok(cur)
    }

    /// Rebuilds the term with the subterm at `p` replaced by `f(subterm)`.
    pub fn replace_at<F>(&self, p: &Position, f: F) -> Result<Term, TermError>
    where
        F: FnOnce(&Term) -> Result<Term, TermError>,
    {
        // walk down iteratively, then rebuild bottom-up
        let mut trail: Vec<(&Term, u8)> = Vec::with_capacity(p.len());
        let mut cur = self;
        for &d in p.digits() {
            let next = match (cur.kind(), d) {
                (TermKind::Lam(_, b), 0) => b,
                (TermKind::App(l, _), 1) => l,
                (TermKind::App(_, r), 2) => r,
                _ => return Err(TermError::InvalidPosition(p.clone())),
            };
            trail.push((cur, d));
            cur = next;
        }
        let mut acc = f(cur)?;
        for (parent, d) in trail.into_iter().rev() {
            acc = match (parent.kind(), d) {
                (TermKind::Lam(h, _), 0) => Term::lam_hint(h.clone(), acc),
                (TermKind::App(_, r), 1) => Term::app(acc, r.clone()),
                (TermKind::App(l, _), 2) => Term::app(l.clone(), acc),
                _ => unreachable!("trail follows valid digits"),
            };
        }
        Ok(acc)
    }

    /// Contracts a root redex `(λx.A) B` to `A[B/x]`.
    pub fn contract(&self) -> Option<Term> {
        let (f, arg) = self.as_app()?;
        let (_, body) = f.as_lam()?;
        Some(substitute(body, arg))
    }

    /// Positions of all redexes, leftmost-outermost first.
    pub fn redex_positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((t, path)) = stack.pop() {
            if t.is_normal() {
                continue;
            }
            match t.kind() {
                TermKind::Var(_) => {}
                TermKind::Lam(_, b) => stack.push((b, extend(&path, 0))),
                TermKind::App(f, a) => {
                    stack.push((a, extend(&path, 2)));
                    stack.push((f, extend(&path, 1)));
                    if f.is_lam() {
                        out.push(Position(path));
                    }
                }
            }
        }
        out
    }

    /// Whether `needle` occurs as a subterm at some position.
    pub fn contains(&self, needle: &Term) -> bool {
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if t == needle {
                return true;
            }
            if t.size() <= needle.size() {
                continue;
            }
            match t.kind() {
                TermKind::Var(_) => {}
                TermKind::Lam(_, b) => stack.push(b),
                TermKind::App(f, a) => {
                    stack.push(f);
                    stack.push(a);
                }
            }
        }
        false
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        let mut stack = vec![(self, other)];
        while let Some((x, y)) = stack.pop() {
            if Arc::ptr_eq(&x.0, &y.0) {
                continue;
            }
            if x.0.hash != y.0.hash || x.0.size != y.0.size || x.0.loose != y.0.loose {
                return false;
            }
            match (x.kind(), y.kind()) {
                (TermKind::Var(a), TermKind::Var(b)) if a == b => {}
                (TermKind::Lam(_, a), TermKind::Lam(_, b)) => stack.push((a, b)),
                (TermKind::App(f, a), TermKind::App(g, b)) => {
                    stack.push((f, g));
                    stack.push((a, b));
                }
                _ => return false,
            }
        }
        true
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({})", crate::syntax::print(self, crate::syntax::Style::Ascii))
    }
}

/// Instantiates the outermost binder of `body` (de Bruijn index 0) with `value`.
///
/// Capture is impossible in the nameless representation: `value` is shifted
/// under every binder it crosses.
pub fn substitute(body: &Term, value: &Term) -> Term {
    fn go(t: &Term, value: &Term, depth: usize) -> Term {
        if t.0.loose <= depth {
            return t.clone();
        }
        match t.kind() {
            TermKind::Var(Var::Bound(k)) => {
                if *k == depth {
                    value.shift(depth, 0)
                } else {
                    Term::bound(k - 1)
                }
            }
            TermKind::Var(Var::Free(_)) => t.clone(),
            TermKind::Lam(h, b) => Term::lam_hint(h.clone(), go(b, value, depth + 1)),
            TermKind::App(f, a) => Term::app(go(f, value, depth), go(a, value, depth)),
        }
    }
    go(body, value, 0)
}

/// Replaces every free occurrence of `name` by `value`.
pub fn substitute_free(body: &Term, name: &str, value: &Term) -> Term {
    fn go(t: &Term, name: &str, value: &Term, depth: usize) -> Term {
        match t.kind() {
            TermKind::Var(Var::Free(n)) if &**n == name => value.shift(depth, 0),
            TermKind::Var(_) => t.clone(),
            TermKind::Lam(h, b) => Term::lam_hint(h.clone(), go(b, name, value, depth + 1)),
            TermKind::App(f, a) => Term::app(go(f, name, value, depth), go(a, name, value, depth)),
        }
    }
    go(body, name, value, 0)
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    a == b
}

/// A path into a term: 0 under an abstraction, 1 to the function, 2 to the argument.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(Vec<u8>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn from_digits(digits: Vec<u8>) -> Option<Self> {
        digits.iter().all(|d| *d <= 2).then_some(Position(digits))
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, d: u8) -> Position {
        debug_assert!(d <= 2);
        let mut v = self.0.clone();
        v.push(d);
        Position(v)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Digit string with the empty path rendered as `""`.
    pub fn to_digit_string(&self) -> String {
        self.0.iter().map(|d| char::from(b'0' + d)).collect()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("ε")
        } else {
            f.write_str(&self.to_digit_string())
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid position {0:?}: expected digits 0, 1, 2 or ε")]
pub struct PositionParseError(pub String);

impl FromStr for Position {
    type Err = PositionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "e" {
            return Ok(Position::root());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(PositionParseError(s.to_string())),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Position)
    }
}

impl serde::Serialize for Position {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_digit_string())
    }
}

impl<'de> serde::Deserialize<'de> for Position {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(s: &str) -> Position {
        s.parse().unwrap()
    }

    #[test]
    fn hints_do_not_affect_equality() {
        let a = Term::lam("x", Term::bound(0));
        let b = Term::lam("y", Term::bound(0));
        assert!(alpha_eq(&a, &b));
        let k = Term::lam("x", Term::lam("y", Term::bound(1)));
        let ki = Term::lam("x", Term::lam("y", Term::bound(0)));
        assert!(!alpha_eq(&k, &ki));
    }

    #[test]
    fn positions_of_small_terms() {
        assert_eq!(Term::free("x").positions(), vec![pos("")]);
        assert_eq!(
            Term::lam("x", Term::bound(0)).positions(),
            vec![pos(""), pos("0")]
        );
        let xy = Term::app(Term::free("x"), Term::free("y"));
        assert_eq!(xy.positions(), vec![pos(""), pos("1"), pos("2")]);
    }

    #[test]
    fn subterm_at_follows_the_path() {
        let m = Term::app(Term::lam("x", Term::bound(0)), Term::free("y"));
        assert_eq!(m.subterm_at(&Position::root()).unwrap(), &m);
        assert_eq!(m.subterm_at(&pos("10")).unwrap(), &Term::bound(0));
        assert_eq!(m.subterm_at(&pos("2")).unwrap(), &Term::free("y"));
        assert_eq!(
            m.subterm_at(&pos("0")),
            Err(TermError::InvalidPosition(pos("0")))
        );
    }

    #[test]
    fn substitution_shifts_under_binders() {
        // (λx.λy.x) applied to a loose index must not capture it.
        let body = Term::lam("y", Term::bound(1));
        let out = substitute(&body, &Term::bound(0));
        assert_eq!(out, Term::lam("y", Term::bound(1)));
    }

    #[test]
    fn substitute_free_avoids_capture() {
        // (λy.x)[x := y] keeps y free
        let body = Term::lam("y", Term::free("x"));
        let out = substitute_free(&body, "x", &Term::free("y"));
        assert_eq!(out, Term::lam("y", Term::free("y")));
        assert_ne!(out, Term::lam("y", Term::bound(0)));
    }

    #[test]
    fn position_strings() {
        assert_eq!(pos("ε"), Position::root());
        assert_eq!(pos("120").to_string(), "120");
        assert_eq!(Position::root().to_string(), "ε");
        assert!("13".parse::<Position>().is_err());
    }

    #[test]
    fn normal_and_head_forms() {
        let omega_half = Term::lam("x", Term::app(Term::bound(0), Term::bound(0)));
        let omega = Term::app(omega_half.clone(), omega_half.clone());
        assert!(omega_half.is_normal());
        assert!(!omega.is_normal());
        assert!(!omega.is_hnf());
        assert!(Term::lam("y", omega.clone()).is_whnf());
        assert!(!Term::lam("y", omega).is_hnf());
    }
}
