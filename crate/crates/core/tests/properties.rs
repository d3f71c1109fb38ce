use proptest::prelude::*;

use clocklam::reduction::{beta_step_at, reduce_to_hnf, Reduct};
use clocklam::sampling::{random_reduct, rng};
use clocklam::term::substitute_free;
use clocklam::tree::{clocked_bt, rel_all, Mode, Relation, Tri};
use clocklam::{parse, print, Position, ReductionOutcome, Style, Term};

const NAMES: [&str; 5] = ["a", "b", "c", "x", "y"];

#[derive(Clone, Debug)]
enum Raw {
    Var(usize),
    Lam(usize, Box<Raw>),
    App(Box<Raw>, Box<Raw>),
}

impl Raw {
    fn text(&self) -> String {
        match self {
            Raw::Var(i) => NAMES[*i].into(),
            Raw::Lam(i, b) => format!("(\\{}. {})", NAMES[*i], b.text()),
            Raw::App(f, a) => format!("({} {})", f.text(), a.text()),
        }
    }
}

fn raw() -> impl Strategy<Value = Raw> {
    let leaf = (0..NAMES.len()).prop_map(Raw::Var);
    leaf.prop_recursive(6, 40, 2, |inner| {
        prop_oneof![
            (0..3usize, inner.clone()).prop_map(|(i, b)| Raw::Lam(i, Box::new(b))),
            (inner.clone(), inner).prop_map(|(f, a)| Raw::App(Box::new(f), Box::new(a))),
        ]
    })
}

fn term() -> impl Strategy<Value = Term> {
    raw().prop_map(|r| parse(&r.text()).expect("generated text parses"))
}

fn position() -> impl Strategy<Value = Position> {
    proptest::collection::vec(0u8..3, 0..8).prop_map(|d| Position::from_digits(d).unwrap())
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(t in term()) {
        for style in [Style::Ascii, Style::Unicode] {
            let s = print(&t, style);
            prop_assert_eq!(parse(&s).unwrap(), t.clone(), "{}", s);
        }
    }

    #[test]
    fn positions_round_trip(p in position()) {
        prop_assert_eq!(p.to_string().parse::<Position>().unwrap(), p.clone());
        prop_assert_eq!(p.to_digit_string().parse::<Position>().unwrap(), p);
    }

    #[test]
    fn substitution_free_names(body in term(), value in term()) {
        let out = substitute_free(&body, "x", &value);
        let mut expected = body.free_names();
        if expected.remove("x") {
            expected.extend(value.free_names());
        }
        prop_assert_eq!(out.free_names(), expected);
    }

    #[test]
    fn redex_positions_contract(t in term()) {
        for p in t.redex_positions() {
            prop_assert!(t.subterm_at(&p).unwrap().is_redex());
            prop_assert!(beta_step_at(&t, &p).is_ok());
        }
        prop_assert_eq!(t.is_normal(), t.redex_positions().is_empty());
    }

    #[test]
    fn head_reduction_replays(t in term()) {
        let out = reduce_to_hnf(&t, 200);
        let mut cur = t.clone();
        for step in &out.trace().steps {
            cur = beta_step_at(&cur, &step.position).unwrap();
        }
        prop_assert_eq!(&cur, out.term());
        if let ReductionOutcome::Reached { form, .. } = &out {
            prop_assert!(form.is_hnf());
        }
    }

    #[test]
    fn seeded_reducts_replay(t in term(), seed in any::<u64>(), steps in 0usize..6) {
        let r = random_reduct(&t, steps, &mut rng(seed));
        prop_assert_eq!(r.replay_from(&t).unwrap(), r.term.clone());
        prop_assert_eq!(Reduct::origin(&t).replay_from(&t).unwrap(), t);
    }

    #[test]
    fn single_steps_never_slow_clocks(seed in any::<u64>(), n in 0usize..4) {
        let t = Term::app(clocklam::fpc::bohm_fpc(n), Term::free("x"));
        let r = random_reduct(&t, 1, &mut rng(seed));
        let before = clocked_bt(&t, 3, 10_000, Mode::Count);
        let after = clocked_bt(&r.term, 3, 10_000, Mode::Count);
        prop_assert_ne!(rel_all(&before, &after, Relation::Ge).outcome, Tri::Fails);
    }
}
