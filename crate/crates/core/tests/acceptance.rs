//! End-to-end checks, one line per criterion. Every comparison is exact.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use clocklam::catalog::default_vectors;
use clocklam::delta::{delta_length, delta_sn_criterion, delta_sn_search, delta_terms, SnCriterion, SnSearch};
use clocklam::discrimination::{discriminate, find_simple_reduct, verify_verdict, Budgets, Method, Verdict};
use clocklam::fpc::{
    bohm_fpc, check_fpc, make, plotkin_a, plotkin_b, reducing_scott_fpc, scott_fpc, vector_fpc, Combinator,
};
use clocklam::rational::{rational_expand, Product, RationalLimits, DEFAULT_MAX_NODES};
use clocklam::reduction::{convertible_bounded, DEFAULT_FUEL};
use clocklam::sampling::{check_acceleration, check_simple_invariance};
use clocklam::term::{TermKind, Var};
use clocklam::tree::{clocked_bt, clocked_llt, Annotation, ClockedTree, Mode, Relation, Tri};
use clocklam::{parse, Term};

const SEED: u64 = 20_240_601;
const TIME_LIMIT_7: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Pairs discriminated by earlier criteria, replayed under the fuel sweep.
static PAIRS: Mutex<Vec<(String, Term, Term, Mode)>> = Mutex::new(Vec::new());

fn remember(name: String, m: &Term, n: &Term, mode: Mode) {
    PAIRS.lock().unwrap().push((name, m.clone(), n.clone(), mode));
}

fn x() -> Term {
    Term::free("x")
}

fn c(k: Combinator) -> Term {
    make(k)
}

fn limits(mode: Mode) -> RationalLimits {
    RationalLimits {
        fuel: DEFAULT_FUEL,
        mode,
        max_nodes: DEFAULT_MAX_NODES,
    }
}

fn budgets(mode: Mode) -> Budgets {
    Budgets {
        mode,
        ..Budgets::default()
    }
}

/// ξξδ^(n-1)x
fn bohm_reduct(n: usize) -> Term {
    let xi = c(Combinator::OmegaDeltaNf);
    let args = [xi.clone()]
        .into_iter()
        .chain(std::iter::repeat_n(c(Combinator::Delta), n - 1))
        .chain([x()]);
    Term::apply(xi, args)
}

/// θθS^(n-2)Ix
fn scott_reduct(n: usize) -> Term {
    let th = c(Combinator::Theta);
    let args = [th.clone()]
        .into_iter()
        .chain(std::iter::repeat_n(c(Combinator::S), n - 2))
        .chain([c(Combinator::I), x()]);
    Term::apply(th, args)
}

/// A separate head reducer on plain de Bruijn terms, sharing nothing with
/// the library beyond reading its terms.
mod oracle {
    use super::*;

    #[derive(Clone, Debug, PartialEq, Eq)]
    pub enum Tm {
        Bound(usize),
        Free(String),
        Lam(Box<Tm>),
        App(Box<Tm>, Box<Tm>),
    }

    pub fn from(t: &Term) -> Tm {
        match t.kind() {
            TermKind::Var(Var::Bound(i)) => Tm::Bound(*i),
            TermKind::Var(Var::Free(s)) => Tm::Free(s.to_string()),
            TermKind::Lam(_, b) => Tm::Lam(Box::new(from(b))),
            TermKind::App(f, a) => Tm::App(Box::new(from(f)), Box::new(from(a))),
        }
    }

    fn shift(t: &Tm, d: isize, cutoff: usize) -> Tm {
        match t {
            Tm::Bound(i) if *i >= cutoff => Tm::Bound((*i as isize + d) as usize),
            Tm::Bound(_) | Tm::Free(_) => t.clone(),
            Tm::Lam(b) => Tm::Lam(Box::new(shift(b, d, cutoff + 1))),
            Tm::App(f, a) => Tm::App(Box::new(shift(f, d, cutoff)), Box::new(shift(a, d, cutoff))),
        }
    }

    fn subst(t: &Tm, j: usize, s: &Tm) -> Tm {
        match t {
            Tm::Bound(i) if *i == j => shift(s, j as isize, 0),
            Tm::Bound(i) if *i > j => Tm::Bound(i - 1),
            Tm::Bound(_) | Tm::Free(_) => t.clone(),
            Tm::Lam(b) => Tm::Lam(Box::new(subst(b, j + 1, s))),
            Tm::App(f, a) => Tm::App(Box::new(subst(f, j, s)), Box::new(subst(a, j, s))),
        }
    }

    /// One head step, or `None` at a head normal form.
    pub fn head_step(t: &Tm) -> Option<Tm> {
        match t {
            Tm::Lam(b) => head_step(b).map(|b| Tm::Lam(Box::new(b))),
            Tm::App(f, a) => match &**f {
                Tm::Lam(body) => Some(subst(body, 0, a)),
                _ => head_step(f).map(|f| Tm::App(Box::new(f), a.clone())),
            },
            _ => None,
        }
    }

    /// Head steps to reach `x t'`, and `t'`.
    pub fn unfold_x(t: &Tm, fuel: usize) -> Option<(usize, Tm)> {
        let mut cur = t.clone();
        for k in 0..=fuel {
            match head_step(&cur) {
                Some(next) => cur = next,
                None => {
                    return match cur {
                        Tm::App(f, a) if *f == Tm::Free("x".into()) => Some((k, *a)),
                        _ => None,
                    }
                }
            }
        }
        None
    }

    /// Head-step counts of the first `levels` nodes along the x-spine.
    pub fn spine(t: &Term, levels: usize) -> Option<Vec<usize>> {
        let mut cur = from(t);
        let mut out = Vec::new();
        for _ in 0..levels {
            let (k, next) = unfold_x(&cur, 10_000)?;
            out.push(k);
            cur = next;
        }
        Some(out)
    }
}

fn every_clock(t: &ClockedTree, pred: &dyn Fn(&[usize], &Annotation) -> bool) -> Result<usize, String> {
    // path of argument indices from the root
    fn go(
        t: &ClockedTree,
        path: &mut Vec<usize>,
        pred: &dyn Fn(&[usize], &Annotation) -> bool,
        n: &mut usize,
    ) -> Result<(), String> {
        if let ClockedTree::Bt { clock, args, .. } = t {
            let a = clock.as_ref().ok_or("node without clock")?;
            if !pred(path, a) {
                return Err(format!("clock {a} at argument path {path:?}"));
            }
            *n += 1;
            for (i, child) in args.iter().enumerate() {
                path.push(i);
                go(child, path, pred, n)?;
                path.pop();
            }
        }
        Ok(())
    }
    let mut n = 0;
    go(t, &mut Vec::new(), pred, &mut n)?;
    Ok(n)
}

fn crit1() -> Outcome {
    let f = Term::free("f");
    let t0 = clocked_bt(&Term::app(c(Combinator::Y0), f.clone()), 6, DEFAULT_FUEL, Mode::Count);
    let t1 = clocked_bt(&Term::app(c(Combinator::Y1), f), 6, DEFAULT_FUEL, Mode::Count);
    let want0 = "[2]f([1]f([1]f([1]f([1]f([1]f(?))))))";
    let want1 = "[2]f([2]f([2]f([2]f([2]f([2]f(?))))))";
    if t0.to_string() != want0 || t1.to_string() != want1 {
        return Err(format!("got {t0} and {t1}"));
    }
    Ok("Y0 f = [2]f([1]f(...)), Y1 f = [2] on 6 levels".into())
}

fn spine_constant(t: &Term, mode: Mode) -> Result<Annotation, String> {
    let tree = rational_expand(t, limits(mode)).ok_or(format!("no finite graph for {t}"))?;
    let (clocks, loop_from) = tree.spine_clocks();
    if loop_from != Some(0) {
        return Err(format!("spine of {t} does not loop back to the root"));
    }
    let first = clocks[0].clone().ok_or("⊥ on the spine")?;
    if clocks.iter().any(|a| a.as_ref() != Some(&first)) {
        return Err(format!("spine clocks of {t} vary: {clocks:?}"));
    }
    Ok(first)
}

fn clock_family(
    ns: std::ops::RangeInclusive<usize>,
    fpc: fn(usize) -> Term,
    reduct: fn(usize) -> Term,
    expected: fn(usize) -> usize,
) -> Outcome {
    let mut seen = Vec::new();
    for n in ns {
        let r = reduct(n);
        let found = find_simple_reduct(&Term::app(fpc(n), x()), &Budgets::default())
            .ok_or(format!("no simple reduct found for n = {n}"))?;
        if found.term != r {
            return Err(format!("n = {n}: simple reduct {} is not {r}", found.term));
        }
        let lib = spine_constant(&r, Mode::Count)?;
        let ora = oracle::spine(&r, 4).ok_or(format!("oracle stuck on n = {n}"))?;
        let want = expected(n);
        if lib != Annotation::Count(want) || ora.iter().any(|&k| k != want) {
            return Err(format!("n = {n}: library {lib}, oracle {ora:?}, expected {want}"));
        }
        seen.push(want.to_string());
    }
    Ok(format!("spine clocks {}", seen.join(" ")))
}

fn crit2() -> Outcome {
    clock_family(2..=6, bohm_fpc, bohm_reduct, |n| 2 * n)
}

fn crit3() -> Outcome {
    clock_family(2..=6, scott_fpc, scott_reduct, |n| 3 * n - 2)
}

fn crit4() -> Outcome {
    let y1 = c(Combinator::Y1);
    let base = check_fpc(&y1, 8, DEFAULT_FUEL).reducing_k;
    if base != Some(2) {
        return Err(format!("Y1 reducing_k = {base:?}"));
    }
    let mut ks = Vec::new();
    for n in 0..=5 {
        let k = check_fpc(&reducing_scott_fpc(&y1, n), 8, DEFAULT_FUEL).reducing_k;
        if k != Some(3 * n + 9) {
            return Err(format!("n = {n}: reducing_k = {k:?}"));
        }
        ks.push(3 * n + 9);
    }
    Ok(format!("k = {ks:?}"))
}

fn crit5() -> Outcome {
    for n in 0..=5 {
        let r = check_fpc(&scott_fpc(n), 8, DEFAULT_FUEL);
        if !r.bt_passes() {
            return Err(format!("n = {n}: tree confirmed to depth {}", r.bt_is_x_omega_to_depth));
        }
        if n >= 2 && r.reducing_k.is_some() {
            return Err(format!("n = {n}: reducing_k = {:?}", r.reducing_k));
        }
    }
    Ok("trees pass to depth 8; non-reducing from n = 2".into())
}

fn atomic(ps: &[&str]) -> Annotation {
    Annotation::Positions(ps.iter().map(|p| p.parse().unwrap()).collect())
}

fn crit6() -> Outcome {
    let xi = spine_constant(&bohm_reduct(2), Mode::Atomic)?;
    let th = spine_constant(&scott_reduct(2), Mode::Atomic)?;
    if xi != atomic(&["11", "1", "1", ""]) || th != atomic(&["11", "1", "", "1"]) {
        return Err(format!("atomic clocks {xi} and {th}"));
    }
    let (y2, u2) = (bohm_fpc(2), scott_fpc(2));
    remember("Y2/U2".into(), &y2, &u2, Mode::Atomic);
    remember("Y2/U2".into(), &y2, &u2, Mode::Count);
    let b = budgets(Mode::Atomic);
    let v = discriminate(&y2, &u2, &b);
    if !v.is_inconvertible() {
        return Err(format!("atomic verdict {}", v.label()));
    }
    verify_verdict(&y2, &u2, &v, &b).map_err(|e| e.to_string())?;
    let count = discriminate(&y2, &u2, &budgets(Mode::Count));
    if count.method() == Some(Method::SimpleSimple) || count.is_convertible() {
        return Err(format!("count mode separated them: {:?}", count.method()));
    }
    Ok(format!("ξξδx {xi}, θθIx {th}; atomic {:?}, count {}", v.method().unwrap(), count.label()))
}

fn pairwise(name: &str, terms: &[(String, Term)], mode: Mode) -> Result<usize, String> {
    let b = budgets(mode);
    let pairs: Vec<(usize, usize)> = (0..terms.len())
        .flat_map(|i| (i + 1..terms.len()).map(move |j| (i, j)))
        .collect();
    let bad: Vec<String> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let (m, n) = (&terms[i].1, &terms[j].1);
            let v = discriminate(m, n, &b);
            match v {
                Verdict::Inconvertible { .. } => verify_verdict(m, n, &v, &b)
                    .err()
                    .map(|e| format!("{} vs {}: {e}", terms[i].0, terms[j].0)),
                _ => Some(format!("{} vs {}: {}", terms[i].0, terms[j].0, v.label())),
            }
        })
        .collect();
    for &(i, j) in &pairs {
        remember(format!("{name} {}/{}", terms[i].0, terms[j].0), &terms[i].1, &terms[j].1, mode);
    }
    if bad.is_empty() {
        Ok(pairs.len())
    } else {
        Err(bad.join("; "))
    }
}

fn crit7() -> Outcome {
    let start = Instant::now();
    let bohm: Vec<_> = (0..=5).map(|n| (format!("Y{n}"), bohm_fpc(n))).collect();
    let scott: Vec<_> = (0..=5).map(|n| (format!("U{n}"), scott_fpc(n))).collect();
    let a = pairwise("bohm", &bohm, Mode::Count)?;
    let b = pairwise("scott", &scott, Mode::Count)?;
    for (n, y, u) in [(0, bohm_fpc(0), scott_fpc(0)), (1, bohm_fpc(1), scott_fpc(1))] {
        remember(format!("Y{n}/U{n}"), &y, &u, Mode::Count);
        match discriminate(&y, &u, &Budgets::default()) {
            Verdict::Convertible { .. } => {}
            v => return Err(format!("Y{n} vs U{n}: {}", v.label())),
        }
    }
    let took = start.elapsed();
    if took > TIME_LIMIT_7 {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{} inconvertible pairs, 2 convertible, {:.1}s", a + b, took.as_secs_f64()))
}

fn crit8() -> Outcome {
    let terms: Vec<_> = default_vectors()
        .into_iter()
        .map(|v| (format!("{v:?}"), vector_fpc(&v)))
        .collect();
    let n = pairwise("vectors", &terms, Mode::Atomic)?;
    // node-wise on the simple reducts
    let ra = find_simple_reduct(&Term::app(vector_fpc(&[2, 3]), x()), &Budgets::default()).ok_or("no reduct")?;
    let rb = find_simple_reduct(&Term::app(vector_fpc(&[3, 2]), x()), &Budgets::default()).ok_or("no reduct")?;
    let (ta, tb) = (
        rational_expand(&ra.term, limits(Mode::Count)).ok_or("no graph")?,
        rational_expand(&rb.term, limits(Mode::Count)).ok_or("no graph")?,
    );
    let eq = Product::new(&ta, &tb).eventually(Relation::Eq);
    if eq.outcome != Tri::Holds || eq.from_level != Some(0) {
        return Err(format!("count clocks of the permutation pair: {eq:?}"));
    }
    Ok(format!("{n} pairs inconvertible; ⟨2,3⟩ and ⟨3,2⟩ count clocks equal at every node"))
}

fn crit9() -> Outcome {
    let y1 = c(Combinator::Y1);
    let a = clocked_bt(&plotkin_a(&y1), 3, DEFAULT_FUEL, Mode::Count);
    let b = clocked_bt(&plotkin_b(&y1), 3, DEFAULT_FUEL, Mode::Count);
    let na = every_clock(&a, &|_, k| *k == Annotation::Count(3))?;
    let nb = every_clock(&b, &|path, k| {
        let want = match path.last() {
            None | Some(0) => 6,
            Some(_) => 3,
        };
        *k == Annotation::Count(want)
    })?;
    if na != 7 || nb != 7 {
        return Err(format!("{na} and {nb} nodes within depth 3"));
    }
    Ok(format!("A {a}; B {b}"))
}

fn crit10() -> Outcome {
    let aa = parse("(\\x y. x x) (\\x y. x x)").unwrap();
    let bb = parse("(\\x y z. x x) (\\x y z. x x)").unwrap();
    let la = clocked_llt(&aa, 6, DEFAULT_FUEL, Mode::Count).to_string();
    let lb = clocked_llt(&bb, 6, DEFAULT_FUEL, Mode::Count).to_string();
    let want_a = "[1]λy.[1]λy1.[1]λy2.[1]λy3.[1]λy4.[1]λy5.?";
    let want_b = "[1]λy.[0]λz.[1]λy1.[0]λz1.[1]λy2.[0]λz2.?";
    if la != want_a || lb != want_b {
        return Err(format!("got {la} and {lb}"));
    }
    Ok(format!("{la}; {lb}"))
}

fn crit11() -> Outcome {
    let r = check_acceleration(SEED, 500, 4, &Budgets::default());
    if r.samples != 500 || r.violations != 0 {
        return Err(format!("{r:?}"));
    }
    Ok(format!("500 steps, 0 violations, {} changed a clock", r.clock_changes))
}

fn crit12() -> Outcome {
    let r = check_simple_invariance(SEED, 50, 6, &Budgets::default());
    if r.violations != 0 || r.undecided != 0 {
        return Err(format!("{r:?}"));
    }
    Ok(format!("{} reducts, 0 violations, 0 undecided", r.samples))
}

fn crit13() -> Outcome {
    let terms: Vec<Term> = (0..=5).flat_map(delta_terms).collect();
    let results: Vec<(Term, SnCriterion, SnSearch)> = terms
        .par_iter()
        .map(|t| (t.clone(), delta_sn_criterion(t).unwrap(), delta_sn_search(t, DEFAULT_FUEL)))
        .collect();
    let mut disagreements = Vec::new();
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for (t, crit, search) in &results {
        *tally.entry(format!("{crit:?}/{search:?}")).or_default() += 1;
        let agree = match crit {
            SnCriterion::Sn | SnCriterion::Trivial => *search == SnSearch::Sn,
            SnCriterion::NotSn => *search != SnSearch::Sn,
        };
        if !agree {
            disagreements.push(t.to_string());
        }
    }
    let d = c(Combinator::Delta);
    let dd = Term::app(d.clone(), d);
    if delta_sn_criterion(&Term::app(dd.clone(), dd)).unwrap() != SnCriterion::NotSn {
        return Err("δδ(δδ) not classified not-SN".into());
    }
    let sn: Vec<&Term> = results
        .iter()
        .filter(|r| r.1 == SnCriterion::Sn)
        .map(|r| &r.0)
        .collect();
    let mut same = Vec::new();
    for (i, a) in sn.iter().enumerate() {
        for b in &sn[i + 1..] {
            if delta_length(a).unwrap() == delta_length(b).unwrap() {
                same.push((*a, *b));
            }
        }
    }
    let unconverted: Vec<String> = same
        .par_iter()
        .filter(|(a, b)| !convertible_bounded(a, b, DEFAULT_FUEL).is_convertible())
        .map(|(a, b)| format!("{a} / {b}"))
        .collect();
    if !disagreements.is_empty() || !unconverted.is_empty() {
        return Err(format!("disagree on {disagreements:?}; not joined {unconverted:?}"));
    }
    Ok(format!(
        "{} terms, 0 disagreements {tally:?}, {} equal-length SN pairs joined",
        terms.len(),
        same.len()
    ))
}

fn crit14() -> Outcome {
    let pairs = PAIRS.lock().unwrap().clone();
    if pairs.is_empty() {
        return Err("no pairs recorded".into());
    }
    let conflicts: Vec<String> = pairs
        .par_iter()
        .filter_map(|(name, m, n, mode)| {
            let mut conv = false;
            let mut inconv = false;
            for fuel in [100, 1_000, 10_000] {
                let b = Budgets {
                    fuel,
                    mode: *mode,
                    ..Budgets::default()
                };
                let v = discriminate(m, n, &b);
                conv |= v.is_convertible();
                inconv |= v.is_inconvertible();
            }
            (conv && inconv).then(|| name.clone())
        })
        .collect();
    if !conflicts.is_empty() {
        return Err(format!("conflicting verdicts for {conflicts:?}"));
    }
    Ok(format!("{} pairs × 3 fuels, no conflicts", pairs.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 14] = [
        ("fixed point trees", crit1),
        ("Böhm sequence clocks 2n", crit2),
        ("Scott sequence clocks 3n-2", crit3),
        ("reducing Scott fpcs 3n+9", crit4),
        ("Scott sequence non-reducing", crit5),
        ("atomic clocks", crit6),
        ("duplicate-free sequences", crit7),
        ("vector fpcs", crit8),
        ("Plotkin terms", crit9),
        ("Lévy-Longo trees", crit10),
        ("clock acceleration", crit11),
        ("simple clock invariance", crit12),
        ("δ-terms", crit13),
        ("soundness under fuel sweep", crit14),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match &result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria {failed:?}");
}
