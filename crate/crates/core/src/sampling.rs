//! Seeded random reductions and the clock properties checked over them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discrimination::Budgets;
use crate::fpc::{bohm_fpc, make, plotkin_a, plotkin_b, scott_fpc, turing_bohm_fpc, vector_fpc, Combinator};
use crate::rational::{rational_expand, Product, RationalLimits};
use crate::reduction::{beta_step_at, Reduct};
use crate::syntax::{print, Style};
use crate::term::Term;
use crate::tree::{clocked_bt, rel_all, Mode, Relation, Tri};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Contracts a redex chosen uniformly among all redexes.
pub fn random_step<R: Rng>(r: &Reduct, rng: &mut R) -> Option<Reduct> {
    let ps = r.term.redex_positions();
    let p = ps.choose(rng)?.clone();
    let next = beta_step_at(&r.term, &p).expect("redex position");
    Some(r.then(p, next))
}

/// Up to `steps` random steps, fewer if a normal form comes first.
pub fn random_reduct<R: Rng>(t: &Term, steps: usize, rng: &mut R) -> Reduct {
    let mut r = Reduct::origin(t);
    for _ in 0..steps {
        match random_step(&r, rng) {
            Some(next) => r = next,
            None => break,
        }
    }
    r
}

fn x() -> Term {
    Term::free("x")
}

/// Fixed point combinators applied to `x`, and a few other named terms.
pub fn property_terms() -> Vec<(String, Term)> {
    let mut out = Vec::new();
    for n in 0..=4 {
        out.push((format!("Y0δ^{n} x"), Term::app(bohm_fpc(n), x())));
        out.push((format!("U{n} x"), Term::app(scott_fpc(n), x())));
    }
    for n in 1..=3 {
        out.push((format!("Y{n} x"), Term::app(turing_bohm_fpc(n), x())));
    }
    for v in [vec![2], vec![2, 3], vec![3, 2]] {
        out.push((format!("Y{v:?} x"), Term::app(vector_fpc(&v), x())));
    }
    let y1 = make(Combinator::Y1);
    out.push(("A_Y1".into(), plotkin_a(&y1)));
    out.push(("B_Y1".into(), plotkin_b(&y1)));
    out
}

/// Simple terms whose clocks are known.
pub fn simple_terms() -> Vec<(String, Term)> {
    let xi = make(Combinator::OmegaDeltaNf);
    let theta = make(Combinator::Theta);
    let delta = make(Combinator::Delta);
    let s = make(Combinator::S);
    let mut out = vec![
        ("Y0 f".to_string(), Term::app(make(Combinator::Y0), Term::free("f"))),
        ("Y1 f".to_string(), Term::app(make(Combinator::Y1), Term::free("f"))),
    ];
    for n in 2..=4 {
        let args = [xi.clone()]
            .into_iter()
            .chain(std::iter::repeat_n(delta.clone(), n - 1))
            .chain([x()]);
        out.push((format!("ξξδ^{} x", n - 1), Term::apply(xi.clone(), args)));
        let args = [theta.clone()]
            .into_iter()
            .chain(std::iter::repeat_n(s.clone(), n - 2))
            .chain([make(Combinator::I), x()]);
        out.push((format!("θθS^{}I x", n - 2), Term::apply(theta.clone(), args)));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyReport {
    pub property: String,
    pub seed: u64,
    pub samples: usize,
    pub violations: usize,
    /// Samples the check could not decide within the budgets.
    pub undecided: usize,
    /// Samples whose clocks differ somewhere, so the check had work to do.
    pub clock_changes: usize,
    pub first_violation: Option<String>,
}

/// Clocks never increase under a single step: `CBT(M) ≥ CBT(M')` at every
/// position known in both truncated trees.
pub fn check_acceleration(seed: u64, samples: usize, depth: usize, budgets: &Budgets) -> PropertyReport {
    let terms = property_terms();
    let mut rng = rng(seed);
    let mut report = PropertyReport {
        property: "acceleration".into(),
        seed,
        samples: 0,
        violations: 0,
        undecided: 0,
        clock_changes: 0,
        first_violation: None,
    };
    while report.samples < samples {
        let (name, t) = &terms[rng.gen_range(0..terms.len())];
        let Some(r) = random_step(&Reduct::origin(t), &mut rng) else {
            continue;
        };
        report.samples += 1;
        let before = clocked_bt(t, depth, budgets.fuel, Mode::Count);
        let after = clocked_bt(&r.term, depth, budgets.fuel, Mode::Count);
        if rel_all(&before, &after, Relation::Eq).outcome == Tri::Fails {
            report.clock_changes += 1;
        }
        if rel_all(&before, &after, Relation::Ge).outcome == Tri::Fails {
            report.violations += 1;
            report.first_violation.get_or_insert_with(|| format!("{name} at step {}", r.path[0]));
        }
    }
    report
}

/// Clocks of a simple term and of its reducts agree from some level on,
/// certified on the product of the rational trees.
pub fn check_simple_invariance(
    seed: u64,
    per_term: usize,
    max_steps: usize,
    budgets: &Budgets,
) -> PropertyReport {
    let mut rng = rng(seed);
    let limits = RationalLimits {
        fuel: budgets.fuel,
        mode: Mode::Count,
        max_nodes: budgets.max_nodes,
    };
    let mut report = PropertyReport {
        property: "simple-invariance".into(),
        seed,
        samples: 0,
        violations: 0,
        undecided: 0,
        clock_changes: 0,
        first_violation: None,
    };
    for (name, t) in simple_terms() {
        let Some(tree) = rational_expand(&t, limits) else {
            report.undecided += per_term;
            continue;
        };
        for _ in 0..per_term {
            let steps = rng.gen_range(1..=max_steps);
            let r = random_reduct(&t, steps, &mut rng);
            report.samples += 1;
            let Some(other) = rational_expand(&r.term, limits) else {
                report.undecided += 1;
                continue;
            };
            let check = Product::new(&tree, &other).eventually(Relation::Eq);
            if check.from_level.is_some_and(|l| l > 0) {
                report.clock_changes += 1;
            }
            if check.outcome != Tri::Holds {
                report.violations += 1;
                report
                    .first_violation
                    .get_or_insert_with(|| format!("{name} ↠ {}", print(&r.term, Style::Unicode)));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_reducts_repeat() {
        let t = Term::app(bohm_fpc(2), x());
        let a = random_reduct(&t, 5, &mut rng(7));
        let b = random_reduct(&t, 5, &mut rng(7));
        assert_eq!(a, b);
        assert_eq!(a.replay_from(&t), Ok(a.term.clone()));
        assert_eq!(a.path.len(), 5);
    }

    #[test]
    fn normal_forms_stop() {
        let t = crate::syntax::parse("\\x. x").unwrap();
        assert!(random_reduct(&t, 3, &mut rng(1)).path.is_empty());
    }

    #[test]
    fn small_property_runs() {
        let b = Budgets::default();
        let acc = check_acceleration(1, 40, 4, &b);
        assert_eq!((acc.samples, acc.violations), (40, 0), "{acc:?}");
        let inv = check_simple_invariance(1, 5, 6, &b);
        assert_eq!(inv.violations, 0, "{inv:?}");
    }
}
