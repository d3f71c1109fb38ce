//! Combinators, fixed point combinator families and bounded fpc checks.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::reduction::{convertible_bounded, reduce_to_hnf, ReductionOutcome};
use crate::syntax::{fresh_name, parse};
use crate::term::{Term, Var};
use crate::tree::{clocked_bt, ClockedTree, Mode, Tri};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FpcError {
    #[error("unknown combinator `{0}`")]
    UnknownCombinator(String),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Combinator {
    I,
    K,
    S,
    B,
    /// λab.a
    True,
    /// λab.b
    False,
    Delta,
    Eta,
    /// λx.f(xx), with `f` free.
    OmegaF,
    /// λab.b(aab), the normal form of ω_δ.
    OmegaDeltaNf,
    /// λabc.bc(aabc), the normal form of ω_SS.
    Theta,
    Epsilon,
    XiScheme,
    /// BS
    A,
    Q(usize),
    Y0,
    Y1,
}

impl Combinator {
    pub const ALL: [Combinator; 16] = [
        Combinator::I,
        Combinator::K,
        Combinator::S,
        Combinator::B,
        Combinator::True,
        Combinator::False,
        Combinator::Delta,
        Combinator::Eta,
        Combinator::OmegaF,
        Combinator::OmegaDeltaNf,
        Combinator::Theta,
        Combinator::Epsilon,
        Combinator::XiScheme,
        Combinator::A,
        Combinator::Y0,
        Combinator::Y1,
    ];

    pub fn name(self) -> String {
        match self {
            Combinator::I => "I".into(),
            Combinator::K => "K".into(),
            Combinator::S => "S".into(),
            Combinator::B => "B".into(),
            Combinator::True => "T".into(),
            Combinator::False => "F".into(),
            Combinator::Delta => "δ".into(),
            Combinator::Eta => "η".into(),
            Combinator::OmegaF => "ω_f".into(),
            Combinator::OmegaDeltaNf => "ξ".into(),
            Combinator::Theta => "θ".into(),
            Combinator::Epsilon => "ε".into(),
            Combinator::XiScheme => "xi-scheme".into(),
            Combinator::A => "A".into(),
            Combinator::Q(n) => format!("Q{n}"),
            Combinator::Y0 => "Y0".into(),
            Combinator::Y1 => "Y1".into(),
        }
    }

    /// The defining lambda text.
    pub fn source(self) -> String {
        match self {
            Combinator::I => "\\x.x".into(),
            Combinator::K => "\\x y.x".into(),
            Combinator::S => "\\x y z.x z (y z)".into(),
            Combinator::B => "\\x y z.x (y z)".into(),
            Combinator::True => "\\a b.a".into(),
            Combinator::False => "\\a b.b".into(),
            Combinator::Delta => "\\a b.b (a b)".into(),
            Combinator::Eta => "\\x f.f (x x f)".into(),
            Combinator::OmegaF => "\\x.f (x x)".into(),
            Combinator::OmegaDeltaNf => "\\a b.b (a a b)".into(),
            Combinator::Theta => "\\a b c.b c (a a b c)".into(),
            Combinator::Epsilon => "\\a b c.b c (a b c)".into(),
            Combinator::XiScheme => "\\n a b c.a b c (n a b c)".into(),
            Combinator::A => "(\\x y z.x (y z)) (\\x y z.x z (y z))".into(),
            Combinator::Q(n) => {
                let ps: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
                let ps = ps.join(" ");
                if n == 0 {
                    "\\y x.x (y x)".into()
                } else {
                    format!("\\y {ps} x.x (y {ps} x)")
                }
            }
            Combinator::Y0 => "\\f.(\\x.f (x x)) (\\x.f (x x))".into(),
            Combinator::Y1 => "(\\x f.f (x x f)) (\\x f.f (x x f))".into(),
        }
    }
}

impl fmt::Display for Combinator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Combinator {
    type Err = FpcError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let c = match s {
            "I" => Combinator::I,
            "K" => Combinator::K,
            "S" => Combinator::S,
            "B" => Combinator::B,
            "T" | "true" => Combinator::True,
            "F" | "false" => Combinator::False,
            "δ" | "delta" => Combinator::Delta,
            "η" | "eta" => Combinator::Eta,
            "ω_f" | "omega_f" => Combinator::OmegaF,
            "ξ" | "xi" | "omega-delta-nf" => Combinator::OmegaDeltaNf,
            "θ" | "theta" => Combinator::Theta,
            "ε" | "epsilon" => Combinator::Epsilon,
            "xi-scheme" => Combinator::XiScheme,
            "A" => Combinator::A,
            "Y0" => Combinator::Y0,
            "Y1" => Combinator::Y1,
            _ => match s.strip_prefix('Q').and_then(|n| n.parse().ok()) {
                Some(n) => Combinator::Q(n),
                None => return Err(FpcError::UnknownCombinator(s.into())),
            },
        };
        Ok(c)
    }
}

pub fn make(c: Combinator) -> Term {
    parse(&c.source()).expect("combinator sources parse")
}

fn apply_n(head: Term, arg: &Term, n: usize) -> Term {
    Term::apply(head, std::iter::repeat_n(arg.clone(), n))
}

/// Y0 δ^n.
pub fn bohm_fpc(n: usize) -> Term {
    apply_n(make(Combinator::Y0), &make(Combinator::Delta), n)
}

/// ηη δ^(n-1) for n ≥ 1 and Y0 for n = 0; alpha-distinct from `bohm_fpc`
/// but convertible with it.
pub fn turing_bohm_fpc(n: usize) -> Term {
    match n {
        0 => make(Combinator::Y0),
        _ => apply_n(make(Combinator::Y1), &make(Combinator::Delta), n - 1),
    }
}

/// B Y0 S^n I.
pub fn scott_fpc(n: usize) -> Term {
    let by = Term::app(make(Combinator::B), make(Combinator::Y0));
    Term::app(apply_n(by, &make(Combinator::S), n), make(Combinator::I))
}

/// Y (SS) S^n I.
pub fn reducing_scott_fpc(y: &Term, n: usize) -> Term {
    let s = make(Combinator::S);
    let head = Term::app(y.clone(), Term::app(s.clone(), s.clone()));
    Term::app(apply_n(head, &s, n), make(Combinator::I))
}

/// Y0 B_{n1} ... B_{nk} where B_n = □(SS)S^nI.
pub fn vector_fpc(ns: &[usize]) -> Term {
    ns.iter()
        .fold(make(Combinator::Y0), |y, &n| reducing_scott_fpc(&y, n))
}

/// N I^(n-1).
pub fn pre_fpc_close(n_term: &Term, n: usize) -> Term {
    apply_n(n_term.clone(), &make(Combinator::I), n.saturating_sub(1))
}

/// Y(λz.fzz)
pub fn plotkin_a(y: &Term) -> Term {
    Term::app(y.clone(), parse("\\z.f z z").expect("parses"))
}

/// Y(λx.Y(λy.fxy))
pub fn plotkin_b(y: &Term) -> Term {
    let fxy = Term::apply(Term::free("f"), [Term::bound(1), Term::bound(0)]);
    let inner = Term::app(y.shift(1, 0), Term::lam("y", fxy));
    Term::app(y.clone(), Term::lam("x", inner))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Y(S(AI))I
    I,
    /// Y(AAA)II
    Ii,
    /// Y(AII)
    Iii,
    /// Y(AAI)I
    Iv,
    /// Y(AAA)A^nII
    V(usize),
    /// YQP1..Pn
    Vi(Vec<Term>),
    /// YεI
    Epsilon,
    /// YξII with the four-place ξ
    Xi,
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::I => "i".into(),
            Scheme::Ii => "ii".into(),
            Scheme::Iii => "iii".into(),
            Scheme::Iv => "iv".into(),
            Scheme::V(n) => format!("v{n}"),
            Scheme::Vi(ps) => format!("vi{}", ps.len()),
            Scheme::Epsilon => "epsilon".into(),
            Scheme::Xi => "xi".into(),
        }
    }
}

impl FromStr for Scheme {
    type Err = FpcError;
    /// `i`, `ii`, `iii`, `iv`, `v<n>`, `vi<n>` (with free dummies P1..Pn),
    /// `epsilon`, `xi`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FpcError::UnknownScheme(s.into());
        Ok(match s {
            "i" => Scheme::I,
            "ii" => Scheme::Ii,
            "iii" => Scheme::Iii,
            "iv" => Scheme::Iv,
            "epsilon" | "ε" => Scheme::Epsilon,
            "xi" | "ξ" => Scheme::Xi,
            _ => {
                if let Some(n) = s.strip_prefix("vi") {
                    let n: usize = n.parse().map_err(|_| bad())?;
                    Scheme::Vi((1..=n).map(|i| Term::free(&format!("P{i}"))).collect())
                } else if let Some(n) = s.strip_prefix('v') {
                    Scheme::V(n.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

/// A constructed term together with its bounded fpc check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Built {
    pub term: Term,
    pub report: FpcCheckReport,
    pub warning: Option<String>,
}

/// Applies a generation scheme to `y` without checking.
pub fn scheme_term(id: &Scheme, y: &Term) -> Term {
    use Combinator as C;
    let a = || make(C::A);
    let i = || make(C::I);
    let s = || make(C::S);
    match id {
        Scheme::I => {
            let sai = Term::app(s(), Term::app(a(), i()));
            Term::apply(y.clone(), [sai, i()])
        }
        Scheme::Ii => Term::apply(y.clone(), [Term::apply(a(), [a(), a()]), i(), i()]),
        Scheme::Iii => Term::app(y.clone(), Term::apply(a(), [i(), i()])),
        Scheme::Iv => Term::apply(y.clone(), [Term::apply(a(), [a(), i()]), i()]),
        Scheme::V(n) => {
            let head = Term::app(y.clone(), Term::apply(a(), [a(), a()]));
            Term::apply(apply_n(head, &a(), *n), [i(), i()])
        }
        Scheme::Vi(ps) => Term::apply(
            Term::app(y.clone(), make(C::Q(ps.len()))),
            ps.iter().cloned(),
        ),
        Scheme::Epsilon => Term::apply(y.clone(), [make(C::Epsilon), i()]),
        Scheme::Xi => Term::apply(y.clone(), [make(C::XiScheme), i(), i()]),
    }
}

/// Applies a generation scheme and checks the result, warning when the
/// bounded checks do not confirm an fpc.
pub fn scheme_fpc(id: &Scheme, y: &Term, depth: usize, fuel: usize) -> Built {
    let term = scheme_term(id, y);
    let report = check_fpc(&term, depth, fuel);
    let warning = (!report.bt_passes()).then(|| {
        format!(
            "scheme {} yields a term whose tree is x^ω only to depth {} of {}",
            id.label(),
            report.bt_is_x_omega_to_depth,
            report.depth
        )
    });
    Built { term, report, warning }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FpcCheckReport {
    /// k with Yx →h^k x(Yx) syntactically.
    pub reducing_k: Option<usize>,
    /// Node levels of the tree of Yx confirmed to be x(x(...)).
    pub bt_is_x_omega_to_depth: usize,
    /// Requested depth.
    pub depth: usize,
    /// Whether Yx =β x(Yx) was confirmed.
    pub convertibility_check: Tri,
}

impl FpcCheckReport {
    pub fn bt_passes(&self) -> bool {
        self.bt_is_x_omega_to_depth >= self.depth
    }
}

pub fn check_fpc(y: &Term, depth: usize, fuel: usize) -> FpcCheckReport {
    let x = Term::free(&fresh_name("x", y));
    let yx = Term::app(y.clone(), x.clone());
    let target = Term::app(x.clone(), yx.clone());
    let reducing_k = match reduce_to_hnf(&yx, fuel) {
        ReductionOutcome::Reached { form, trace } if form == target => Some(trace.len()),
        _ => None,
    };
    let tree = clocked_bt(&yx, depth, fuel, Mode::Count);
    let convertibility_check = if reducing_k.is_some()
        || convertible_bounded(&yx, &target, fuel).is_convertible()
    {
        Tri::Holds
    } else {
        Tri::Unknown
    };
    FpcCheckReport {
        reducing_k,
        bt_is_x_omega_to_depth: x_omega_levels(&tree, &x),
        depth,
        convertibility_check,
    }
}

/// Checks only the tree of Zx, which is all a weak fpc guarantees.
pub fn wfpc_levels(z: &Term, depth: usize, fuel: usize) -> usize {
    let x = Term::free(&fresh_name("x", z));
    let tree = clocked_bt(&Term::app(z.clone(), x.clone()), depth, fuel, Mode::Count);
    x_omega_levels(&tree, &x)
}

/// Levels along which the tree is x(x(...)).
fn x_omega_levels(tree: &ClockedTree, x: &Term) -> usize {
    let name = match x.as_var() {
        Some(Var::Free(n)) => n.clone(),
        _ => return 0,
    };
    let mut levels = 0;
    let mut cur = tree;
    while let ClockedTree::Bt { binders, head, args, .. } = cur {
        let ok = binders.is_empty()
            && args.len() == 1
            && matches!(&head.var, Var::Free(n) if *n == name);
        if !ok {
            break;
        }
        levels += 1;
        cur = &args[0];
    }
    levels
}

/// Z, Z′ with Zx = x(Z′x) and Z′x = x(Zx), from one fixed point of a
/// selector-indexed pair: P = Y0(λp s. s (λx.x(p F x)) (λx.x(p T x))).
pub fn flipflop_wfpc() -> (Term, Term) {
    let body = parse("\\p s. s (\\x. x (p (\\a b.b) x)) (\\x. x (p (\\a b.a) x))")
        .expect("parses");
    let p = Term::app(make(Combinator::Y0), body);
    (
        Term::app(p.clone(), make(Combinator::True)),
        Term::app(p, make(Combinator::False)),
    )
}
