//! Named terms and families of fixed point combinators.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::delta::{delta_length, delta_sn_criterion, delta_sn_search, delta_terms, SnCriterion, SnSearch};
use crate::discrimination::{discriminate, find_simple_reduct, Budgets, Method, Verdict};
use crate::fpc::{
    bohm_fpc, check_fpc, make, scheme_fpc, scott_fpc, turing_bohm_fpc, vector_fpc, Combinator, FpcCheckReport,
    Scheme,
};
use crate::rational::{rational_expand, RationalLimits};
use crate::syntax::{fresh_name, parse_with, print, ParseError, Style};
use crate::term::Term;
use crate::tree::Annotation;

/// Depth of the tree check run on every family member.
pub const CHECK_DEPTH: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("unknown family `{0}` (expected bohm, scott, schemes, vectors or delta)")]
    UnknownFamily(String),
    #[error("bad range `{0}` (expected a..b, a..=b or n)")]
    BadRange(String),
    #[error("bad vector list `{0}` (expected e.g. \"(2,3),(3,2)\")")]
    BadVectors(String),
}

/// Closed terms that identifiers in term text may name. `Yn` is ηηδ^(n-1),
/// `Un` is BY0S^nI. A run of Greek letters such as `δδ` is their application.
pub fn resolve(name: &str) -> Option<Term> {
    if name.chars().count() > 1 && name.chars().all(|ch| "δηθξε".contains(ch)) {
        let mut parts = name.chars().map(|ch| resolve(ch.encode_utf8(&mut [0; 4])));
        let head = parts.next()??;
        return parts.try_fold(head, |f, a| Some(Term::app(f, a?)));
    }
    if let Some(n) = name.strip_prefix('Y').and_then(|d| d.parse::<usize>().ok()) {
        return Some(turing_bohm_fpc(n));
    }
    if let Some(n) = name.strip_prefix('U').and_then(|d| d.parse::<usize>().ok()) {
        return Some(scott_fpc(n));
    }
    let c = match name {
        "δ" | "delta" => Combinator::Delta,
        "η" | "eta" => Combinator::Eta,
        "θ" | "theta" => Combinator::Theta,
        "ξ" | "xi" => Combinator::OmegaDeltaNf,
        "ε" | "epsilon" => Combinator::Epsilon,
        "A" => Combinator::A,
        "B" => Combinator::B,
        "S" => Combinator::S,
        "I" => Combinator::I,
        "K" => Combinator::K,
        _ => return None,
    };
    Some(make(c))
}

/// Parses term text with catalog names resolved.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    parse_with(text, &resolve)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bohm,
    Scott,
    Schemes,
    Vectors,
    Delta,
}

impl FromStr for Family {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "bohm" | "böhm" => Family::Bohm,
            "scott" => Family::Scott,
            "schemes" => Family::Schemes,
            "vectors" => Family::Vectors,
            "delta" | "δ" => Family::Delta,
            _ => return Err(CatalogError::UnknownFamily(s.into())),
        })
    }
}

/// Inclusive index range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndexRange {
    pub start: usize,
    pub end: usize,
}

impl FromStr for IndexRange {
    type Err = CatalogError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CatalogError::BadRange(s.into());
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => (num(s)?, num(s)?),
        };
        if start > end {
            return Err(bad());
        }
        Ok(IndexRange { start, end })
    }
}

/// Parses `(2,3),(3,2)`; `()` is the empty vector.
pub fn parse_vectors(s: &str) -> Result<Vec<Vec<usize>>, CatalogError> {
    let bad = || CatalogError::BadVectors(s.into());
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(bad)?;
        let close = body.find(')').ok_or_else(bad)?;
        let inner = body[..close].trim();
        let v = if inner.is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|n| n.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?
        };
        out.push(v);
        rest = body[close + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Index vectors over {2,3} of length at most 2.
pub fn default_vectors() -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for a in [2, 3] {
        out.push(vec![a]);
    }
    for a in [2, 3] {
        for b in [2, 3] {
            out.push(vec![a, b]);
        }
    }
    out
}

/// Clocks along the rightmost branch of a simple reduct of Yx.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpineClock {
    pub reduct: String,
    pub clocks: Vec<Annotation>,
    /// Index into `clocks` where the branch starts repeating.
    pub loop_from: Option<usize>,
}

impl SpineClock {
    /// The clock that repeats forever.
    pub fn repeating(&self) -> Option<&Annotation> {
        self.clocks.get(self.loop_from?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DeltaInfo {
    pub length: usize,
    pub criterion: SnCriterion,
    pub search: SnSearch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Entry {
    pub name: String,
    #[serde(serialize_with = "ascii")]
    pub term: Term,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<FpcCheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clock: Option<SpineClock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn ascii<S: serde::Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&print(t, Style::Ascii))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PairResult {
    pub left: usize,
    pub right: usize,
    pub verdict: String,
    pub method: Option<Method>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub family: Family,
    pub entries: Vec<Entry>,
    pub pairs: Vec<PairResult>,
    pub notes: Vec<String>,
    pub budgets: Budgets,
}

/// Clocks of a simple reduct of `y x` on the rightmost branch.
pub fn spine_clock(y: &Term, budgets: &Budgets) -> Option<SpineClock> {
    let x = Term::free(&fresh_name("x", y));
    let r = find_simple_reduct(&Term::app(y.clone(), x), budgets)?;
    let limits = RationalLimits {
        fuel: budgets.fuel,
        mode: budgets.mode,
        max_nodes: budgets.max_nodes,
    };
    let tree = rational_expand(&r.term, limits)?;
    let (clocks, loop_from) = tree.spine_clocks();
    Some(SpineClock {
        reduct: print(&r.term, Style::Unicode),
        clocks: clocks.into_iter().collect::<Option<Vec<_>>>()?,
        loop_from,
    })
}

fn fpc_entry(name: String, term: Term, params: Value, budgets: &Budgets) -> Entry {
    let check = check_fpc(&term, CHECK_DEPTH, budgets.fuel);
    let warning = (!check.bt_passes()).then(|| format!("tree of {name} x is x^ω only to depth {}", check.bt_is_x_omega_to_depth));
    Entry {
        clock: spine_clock(&term, budgets),
        name,
        term,
        params,
        check: Some(check),
        delta: None,
        warning,
    }
}

/// Renders an applicative δ-combination with `δ` leaves.
pub fn delta_text(t: &Term) -> String {
    match t.as_app() {
        None => "δ".into(),
        Some((f, a)) => {
            let right = if a.is_app() { format!("({})", delta_text(a)) } else { delta_text(a) };
            format!("{}{}", delta_text(f), right)
        }
    }
}

fn scheme_list() -> Vec<Scheme> {
    ["i", "ii", "iii", "iv", "v0", "v1", "v2", "vi2", "epsilon", "xi"]
        .iter()
        .map(|s| s.parse().expect("scheme ids parse"))
        .collect()
}

/// Builds a family, checks each member and discriminates all pairs.
/// `selection` is an index range, or a vector list for `vectors`.
pub fn catalog(family: Family, selection: Option<&str>, budgets: &Budgets) -> Result<Report, CatalogError> {
    let range = |default: &str| selection.unwrap_or(default).parse::<IndexRange>();
    let entries: Vec<Entry> = match family {
        Family::Bohm => {
            let r = range("0..5")?;
            (r.start..=r.end)
                .into_par_iter()
                .map(|n| fpc_entry(format!("Y{n}"), bohm_fpc(n), json!({ "n": n }), budgets))
                .collect()
        }
        Family::Scott => {
            let r = range("0..5")?;
            (r.start..=r.end)
                .into_par_iter()
                .map(|n| fpc_entry(format!("U{n}"), scott_fpc(n), json!({ "n": n }), budgets))
                .collect()
        }
        Family::Vectors => {
            let vs = match selection {
                Some(s) => parse_vectors(s)?,
                None => default_vectors(),
            };
            vs.into_par_iter()
                .map(|v| {
                    let name = format!(
                        "Y⟨{}⟩",
                        v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
                    );
                    let term = vector_fpc(&v);
                    fpc_entry(name, term, json!({ "vector": v }), budgets)
                })
                .collect()
        }
        Family::Schemes => scheme_list()
            .into_par_iter()
            .map(|id| {
                let built = scheme_fpc(&id, &make(Combinator::Y0), CHECK_DEPTH, budgets.fuel);
                Entry {
                    name: format!("({})", id.label()),
                    clock: spine_clock(&built.term, budgets),
                    term: built.term,
                    params: json!({ "scheme": id.label(), "y": "Y0" }),
                    check: Some(built.report),
                    delta: None,
                    warning: built.warning,
                }
            })
            .collect(),
        Family::Delta => {
            let r = range("0..3")?;
            let terms: Vec<(usize, Term)> = (r.start..=r.end)
                .flat_map(|n| delta_terms(n).into_iter().map(move |t| (n, t)))
                .collect();
            terms
                .into_par_iter()
                .map(|(apps, t)| Entry {
                    name: delta_text(&t),
                    params: json!({ "applications": apps }),
                    check: None,
                    clock: None,
                    delta: Some(DeltaInfo {
                        length: delta_length(&t).expect("δ-term"),
                        criterion: delta_sn_criterion(&t).expect("δ-term"),
                        search: delta_sn_search(&t, budgets.fuel),
                    }),
                    warning: None,
                    term: t,
                })
                .collect()
        }
    };
    let pairs = if family == Family::Delta {
        Vec::new()
    } else {
        pairwise(&entries, budgets)
    };
    let notes = notes(family, &entries, &pairs);
    Ok(Report {
        family,
        entries,
        pairs,
        notes,
        budgets: *budgets,
    })
}

fn pairwise(entries: &[Entry], budgets: &Budgets) -> Vec<PairResult> {
    let idx: Vec<(usize, usize)> = (0..entries.len())
        .flat_map(|i| (i + 1..entries.len()).map(move |j| (i, j)))
        .collect();
    idx.into_par_iter()
        .map(|(i, j)| {
            let v: Verdict = discriminate(&entries[i].term, &entries[j].term, budgets);
            PairResult {
                left: i,
                right: j,
                verdict: v.label().into(),
                method: v.method(),
            }
        })
        .collect()
}

fn notes(family: Family, entries: &[Entry], pairs: &[PairResult]) -> Vec<String> {
    let mut out = Vec::new();
    for p in pairs {
        if p.method == Some(Method::AtomicSimpleSimple) {
            out.push(format!(
                "{} and {}: count clocks coincide; atomic clocks differ",
                entries[p.left].name, entries[p.right].name
            ));
        }
    }
    if family == Family::Delta {
        let disagreements = entries
            .iter()
            .filter_map(|e| e.delta.as_ref())
            .filter(|d| match d.criterion {
                SnCriterion::Sn | SnCriterion::Trivial => d.search != SnSearch::Sn,
                SnCriterion::NotSn => d.search == SnSearch::Sn,
            })
            .count();
        out.push(format!("criterion and search disagree on {disagreements} term(s)"));
    }
    for e in entries {
        if let Some(w) = &e.warning {
            out.push(format!("{}: {w}", e.name));
        }
    }
    out
}

impl Report {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let _ = write!(s, "{:<12}", e.name);
            if let Some(c) = &e.check {
                let k = c.reducing_k.map_or("-".to_string(), |k| k.to_string());
                let _ = write!(s, " reducing {k:<4} tree {}/{}", c.bt_is_x_omega_to_depth, c.depth);
            }
            if let Some(c) = &e.clock {
                let clocks: Vec<String> = c.clocks.iter().map(|a| a.to_string()).collect();
                let _ = write!(s, "  clocks {}", clocks.join(" "));
                if let Some(a) = c.repeating() {
                    let _ = write!(s, " (repeating {a})");
                }
            }
            if let Some(d) = &e.delta {
                let _ = write!(
                    s,
                    " length {} criterion {} search {}",
                    d.length,
                    json!(d.criterion).as_str().unwrap_or_default(),
                    json!(d.search).as_str().unwrap_or_default()
                );
            }
            s.push('\n');
        }
        if !self.pairs.is_empty() {
            s.push('\n');
            for p in &self.pairs {
                let method = p.method.map(|m| format!(" ({})", json!(m).as_str().unwrap_or_default()));
                let _ = writeln!(
                    s,
                    "{} vs {}: {}{}",
                    self.entries[p.left].name,
                    self.entries[p.right].name,
                    p.verdict,
                    method.unwrap_or_default()
                );
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}
