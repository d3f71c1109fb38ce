//! Applicative combinations of the Owl δ = λab.b(ab).

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::fpc::{make, Combinator};
use crate::reduction::beta_step_at;
use crate::term::Term;
use crate::tree::Tri;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("not a δ-term: {0}")]
pub struct NotADeltaTerm(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnCriterion {
    Sn,
    NotSn,
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnSearch {
    /// The reduction graph is finite and acyclic.
    Sn,
    /// A reduction returns to an earlier term, or to a term containing it.
    NotSn,
    /// The state budget ran out, or a reduct outgrew the size cap.
    Unknown,
}

fn delta() -> Term {
    make(Combinator::Delta)
}

pub fn is_delta_term(t: &Term) -> bool {
    let d = delta();
    let mut stack = vec![t];
    while let Some(u) = stack.pop() {
        if *u == d {
            continue;
        }
        match u.as_app() {
            Some((f, a)) => {
                stack.push(f);
                stack.push(a);
            }
            None => return false,
        }
    }
    true
}

fn guard(t: &Term) -> Result<(), NotADeltaTerm> {
    if is_delta_term(t) {
        Ok(())
    } else {
        Err(NotADeltaTerm(t.to_string()))
    }
}

/// Number of δ occurrences.
pub fn delta_length(t: &Term) -> Result<usize, NotADeltaTerm> {
    guard(t)?;
    Ok(count(t, &|u| *u == delta()))
}

fn count(t: &Term, pred: &dyn Fn(&Term) -> bool) -> usize {
    if pred(t) {
        return 1;
    }
    match t.as_app() {
        Some((f, a)) => count(f, pred) + count(a, pred),
        None => 0,
    }
}

/// SN iff exactly one occurrence of δδ, for terms other than δ itself.
pub fn delta_sn_criterion(t: &Term) -> Result<SnCriterion, NotADeltaTerm> {
    guard(t)?;
    let d = delta();
    if *t == d {
        return Ok(SnCriterion::Trivial);
    }
    let dd = Term::app(d.clone(), d);
    let n = occurrences(t, &dd);
    Ok(if n == 1 { SnCriterion::Sn } else { SnCriterion::NotSn })
}

fn occurrences(t: &Term, needle: &Term) -> usize {
    let here = usize::from(t == needle);
    match t.as_app() {
        Some((f, a)) => here + occurrences(f, needle) + occurrences(a, needle),
        None => here,
    }
}

/// Reducts larger than this are not explored.
pub const MAX_SEARCH_SIZE: u64 = 1024;

/// Explores every reduct of `t`, visiting at most `fuel` distinct terms.
pub fn delta_sn_search(t: &Term, fuel: usize) -> SnSearch {
    Search {
        fuel,
        done: HashSet::new(),
        on_path: HashSet::new(),
    }
    .run(t)
}

struct Search {
    fuel: usize,
    /// Terms all of whose reductions terminate.
    done: HashSet<Term>,
    on_path: HashSet<Term>,
}

enum Found {
    Sn,
    Loop,
    OutOfFuel,
}

impl Search {
    fn run(mut self, t: &Term) -> SnSearch {
        match self.visit(t) {
            Found::Sn => SnSearch::Sn,
            Found::Loop => SnSearch::NotSn,
            Found::OutOfFuel => SnSearch::Unknown,
        }
    }

    fn embeds_ancestor(&self, t: &Term) -> bool {
        let mut stack = vec![t];
        while let Some(u) = stack.pop() {
            if self.on_path.contains(u) {
                return true;
            }
            if let Some((f, a)) = u.as_app() {
                stack.push(f);
                stack.push(a);
            }
        }
        false
    }

    fn visit(&mut self, t: &Term) -> Found {
        if self.done.contains(t) {
            return Found::Sn;
        }
        // s ↠ C[s] repeats forever, C = □ included
        if self.embeds_ancestor(t) {
            return Found::Loop;
        }
        if self.fuel == 0 || t.size() > MAX_SEARCH_SIZE {
            return Found::OutOfFuel;
        }
        self.fuel -= 1;
        self.on_path.insert(t.clone());
        let mut result = Found::Sn;
        for p in t.redex_positions() {
            let next = beta_step_at(t, &p).expect("redex position");
            match self.visit(&next) {
                Found::Sn => {}
                other => {
                    result = other;
                    break;
                }
            }
        }
        self.on_path.remove(t);
        if matches!(result, Found::Sn) {
            self.done.insert(t.clone());
        }
        result
    }
}

/// Convertibility by length, for two SN non-trivial δ-terms.
pub fn delta_convertible_by_length(a: &Term, b: &Term) -> Result<Tri, NotADeltaTerm> {
    let sn = |t: &Term| delta_sn_criterion(t).map(|c| c == SnCriterion::Sn);
    if !(sn(a)? && sn(b)?) {
        return Ok(Tri::Unknown);
    }
    Ok(if delta_length(a)? == delta_length(b)? {
        Tri::Holds
    } else {
        Tri::Fails
    })
}

/// All δ-terms with exactly `apps` applications.
pub fn delta_terms(apps: usize) -> Vec<Term> {
    let mut table: Vec<Vec<Term>> = vec![vec![delta()]];
    for n in 1..=apps {
        let mut row = Vec::new();
        for left in 0..n {
            let right = n - 1 - left;
            for f in &table[left] {
                for a in &table[right] {
                    row.push(Term::app(f.clone(), a.clone()));
                }
            }
        }
        table.push(row);
    }
    table.swap_remove(apps)
}
