//! Command-line front end. `run` returns the output and exit code instead of
//! printing, so it can be driven from tests.

use std::fmt::Write as _;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::catalog::{catalog, parse_term, spine_clock, Family};
use crate::discrimination::{discriminate, is_simple_term, Budgets, Verdict};
use crate::fpc::check_fpc;
use crate::rational::{rational_expand, Product, RationalLimits, DEFAULT_MAX_NODES};
use crate::reduction::{
    beta_step_at, normalize, reduce_to_hnf, reduce_to_root_stable, reduce_to_whnf, ReductionOutcome, DEFAULT_FUEL,
};
use crate::render::{rational_dot, rational_json, rational_text, tree_dot, tree_json};
use crate::sampling::{check_acceleration, check_simple_invariance};
use crate::syntax::{print, Style};
use crate::term::Term;
use crate::tree::{clocked_tree, rel_eventually, Flavor, Limits, Mode, Relation, DEFAULT_DEPTH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CYCLE: i32 = 2;
pub const EXIT_FUEL: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;
pub const EXIT_CONVERTIBLE: i32 = 10;
pub const EXIT_INCONCLUSIVE: i32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Dot,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "dot" => Ok(Format::Dot),
            _ => Err(format!("unknown format `{s}` (expected text, json or dot)")),
        }
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Head,
    Whnf,
    RootStable,
    Normalize,
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "head" => Ok(Strategy::Head),
            "whnf" => Ok(Strategy::Whnf),
            "root-stable" => Ok(Strategy::RootStable),
            "normalize" | "normal" => Ok(Strategy::Normalize),
            _ => Err(format!("unknown strategy `{s}` (expected head, whnf, root-stable or normalize)")),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "clocklam", version, about = "Clocked Böhm trees of untyped lambda terms")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Node levels to expand
    #[arg(long, global = true, env = "CLOCKLAM_DEPTH", default_value_t = DEFAULT_DEPTH,
          value_parser = positive)]
    pub depth: usize,
    /// Reduction steps per node
    #[arg(long, global = true, env = "CLOCKLAM_FUEL", default_value_t = DEFAULT_FUEL,
          value_parser = positive)]
    pub fuel: usize,
    /// count or atomic
    #[arg(long, global = true, env = "CLOCKLAM_MODE", default_value = "count")]
    pub mode: Mode,
    /// Node levels ignored by `eventually` checks
    #[arg(long, global = true, env = "CLOCKLAM_PREFIX_CUT", default_value_t = 0)]
    pub prefix_cut: usize,
    /// text, json or dot
    #[arg(long, global = true, env = "CLOCKLAM_FORMAT", default_value = "text")]
    pub format: Format,
    /// Terms visited by reduct searches
    #[arg(long, global = true, env = "CLOCKLAM_SEARCH", default_value_t = 2_000,
          value_parser = positive)]
    pub search: usize,
    /// Largest finite graph built for a tree
    #[arg(long, global = true, env = "CLOCKLAM_MAX_NODES", default_value_t = DEFAULT_MAX_NODES,
          value_parser = positive)]
    pub max_nodes: usize,
}

impl RunConfig {
    pub fn budgets(&self) -> Budgets {
        Budgets {
            depth: self.depth,
            fuel: self.fuel,
            search: self.search,
            max_nodes: self.max_nodes,
            mode: self.mode,
        }
    }

    fn rational(&self) -> RationalLimits {
        RationalLimits {
            fuel: self.fuel,
            mode: self.mode,
            max_nodes: self.max_nodes,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reduce a term, printing each contracted redex
    Reduce {
        term: String,
        /// head, whnf, root-stable or normalize
        #[arg(long, default_value = "head")]
        strategy: Strategy,
        /// Also print the term after each step
        #[arg(long)]
        show_terms: bool,
    },
    /// Render a clocked tree
    Tree {
        term: String,
        /// bt, llt or bet
        #[arg(long, default_value = "bt")]
        flavor: Flavor,
        /// Print the finite graph of the Böhm tree instead
        #[arg(long)]
        rational: bool,
    },
    /// Decide whether two terms are inconvertible
    Discriminate { left: String, right: String },
    /// Compare the clocks of two terms
    Relate {
        left: String,
        right: String,
        /// =, !=, <=, <, >= or >
        #[arg(long, default_value = "=")]
        relation: Relation,
    },
    /// Check that a term is a fixed point combinator, and whether it is simple
    Check { term: String },
    /// Build a family of fixed point combinators and compare all pairs
    Catalog {
        /// bohm, scott, schemes, vectors or delta
        family: Family,
        /// Index range like 0..5, or vectors like "(2,3),(3,2)"
        selection: Option<String>,
        /// Also write the JSON manifest here
        #[arg(long)]
        manifest: Option<std::path::PathBuf>,
    },
    /// Run the clock properties over seeded random reductions
    Props {
        #[arg(long, env = "CLOCKLAM_SEED", default_value_t = 0)]
        seed: u64,
        /// Single steps sampled for the acceleration property
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Reducts sampled per simple term
        #[arg(long, default_value_t = 50)]
        per_term: usize,
        #[arg(long, default_value_t = 6)]
        max_steps: usize,
        /// Tree depth for the acceleration property
        #[arg(long, default_value_t = 4)]
        tree_depth: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String, code: i32) -> Self {
        Output {
            stdout,
            stderr: String::new(),
            code,
        }
    }

    fn error(message: String) -> Self {
        Output {
            stdout: String::new(),
            stderr: message,
            code: EXIT_INPUT,
        }
    }
}

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output::error(text)
            } else {
                Output::ok(text, EXIT_OK)
            };
        }
    };
    execute(&cli)
}

fn term(text: &str) -> Result<Term, Output> {
    parse_term(text).map_err(|e| Output::error(format!("parse error in `{text}`: {e}\n")))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn execute(cli: &Cli) -> Output {
    let c = &cli.config;
    let result = match &cli.command {
        Command::Reduce {
            term: t,
            strategy,
            show_terms,
        } => cmd_reduce(t, *strategy, *show_terms, c),
        Command::Tree {
            term: t,
            flavor,
            rational,
        } => cmd_tree(t, *flavor, *rational, c),
        Command::Discriminate { left, right } => cmd_discriminate(left, right, c),
        Command::Relate { left, right, relation } => cmd_relate(left, right, *relation, c),
        Command::Check { term: t } => cmd_check(t, c),
        Command::Catalog {
            family,
            selection,
            manifest,
        } => cmd_catalog(*family, selection.as_deref(), manifest.as_deref(), c),
        Command::Props {
            seed,
            samples,
            per_term,
            max_steps,
            tree_depth,
        } => Ok(cmd_props(*seed, *samples, *per_term, *max_steps, *tree_depth, c)),
    };
    result.unwrap_or_else(|e| e)
}

fn cmd_reduce(text: &str, strategy: Strategy, show_terms: bool, c: &RunConfig) -> Result<Output, Output> {
    let t = term(text)?;
    let out = match strategy {
        Strategy::Head => reduce_to_hnf(&t, c.fuel),
        Strategy::Whnf => reduce_to_whnf(&t, c.fuel),
        Strategy::RootStable => reduce_to_root_stable(&t, c.fuel),
        Strategy::Normalize => normalize(&t, c.fuel),
    };
    let code = match out {
        ReductionOutcome::Reached { .. } => EXIT_OK,
        ReductionOutcome::Cycle { .. } => EXIT_CYCLE,
        ReductionOutcome::FuelExhausted { .. } => EXIT_FUEL,
    };
    let trace = out.trace();
    if c.format == Format::Json {
        let v = json!({
            "outcome": out.label(),
            "steps": trace.len(),
            "trace": trace,
            "term": print(out.term(), Style::Ascii),
        });
        return Ok(Output::ok(pretty(&v), code));
    }
    let mut s = String::new();
    let _ = writeln!(s, "    {t}");
    let mut cur = t.clone();
    for (i, step) in trace.steps.iter().enumerate() {
        let _ = write!(s, "{:>3} {:<7} at {}", i + 1, step.kind.label(), step.position);
        if show_terms {
            cur = beta_step_at(&cur, &step.position).expect("trace replays");
            let _ = write!(s, "  {cur}");
        }
        s.push('\n');
    }
    let n = trace.len();
    let _ = match &out {
        ReductionOutcome::Reached { form, .. } => writeln!(s, "reached in {n} steps: {form}"),
        ReductionOutcome::Cycle { witness, .. } => writeln!(s, "cycle after {n} steps, repeating {witness}"),
        ReductionOutcome::FuelExhausted { .. } => writeln!(s, "fuel exhausted after {n} steps"),
    };
    Ok(Output::ok(s, code))
}

fn cmd_tree(text: &str, flavor: Flavor, rational: bool, c: &RunConfig) -> Result<Output, Output> {
    let t = term(text)?;
    let mut stderr = String::new();
    if rational {
        if flavor != Flavor::Bt {
            return Err(Output::error("--rational applies to --flavor bt only\n".into()));
        }
        match rational_expand(&t, c.rational()) {
            Some(r) => {
                let s = match c.format {
                    Format::Text => rational_text(&r),
                    Format::Json => pretty(&rational_json(&r)),
                    Format::Dot => rational_dot(&r),
                };
                return Ok(Output::ok(s, EXIT_OK));
            }
            None => stderr.push_str("no finite graph within the budgets; showing the truncated tree\n"),
        }
    }
    let limits = Limits {
        depth: c.depth,
        fuel: c.fuel,
        mode: c.mode,
    };
    let tree = clocked_tree(&t, flavor, limits);
    let stdout = match c.format {
        Format::Text => format!("{tree}\n"),
        Format::Json => pretty(&tree_json(&tree)),
        Format::Dot => tree_dot(&tree),
    };
    Ok(Output {
        stdout,
        stderr,
        code: EXIT_OK,
    })
}

fn cmd_discriminate(left: &str, right: &str, c: &RunConfig) -> Result<Output, Output> {
    let (m, n) = (term(left)?, term(right)?);
    let budgets = c.budgets();
    let v = discriminate(&m, &n, &budgets);
    let code = match v {
        Verdict::Inconvertible { .. } => EXIT_OK,
        Verdict::Convertible { .. } => EXIT_CONVERTIBLE,
        Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    };
    if c.format == Format::Json {
        return Ok(Output::ok(pretty(&v.to_json(&budgets)), code));
    }
    let mut s = String::new();
    match &v {
        Verdict::Inconvertible { method, certificate: cert } => {
            let _ = writeln!(s, "inconvertible ({})", json!(method).as_str().unwrap_or_default());
            let _ = writeln!(s, "reduct of M: {} ({} steps)", cert.reduct_m.term, cert.reduct_m.path.len());
            let _ = writeln!(s, "reduct of N: {} ({} steps)", cert.reduct_n.term, cert.reduct_n.path.len());
            match cert.relation {
                Some(r) => {
                    let mode = json!(cert.mode);
                    let _ = writeln!(s, "clocks: M {r} N infinitely often ({} clocks)", mode.as_str().unwrap_or_default());
                }
                None => {
                    let _ = writeln!(s, "Böhm trees differ");
                }
            }
            let ps: Vec<String> = cert.witness_positions.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(s, "witness positions: {}", ps.join(", "));
            if let Some(p) = &cert.pump {
                let _ = writeln!(s, "pump: {} ({})* {}", p.prefix, p.pump, p.suffix);
            }
            if !cert.cycle_nodes.is_empty() {
                let cs: Vec<String> = cert.cycle_nodes.iter().map(|(a, b)| format!("({a},{b})")).collect();
                let _ = writeln!(s, "cycle nodes: {}", cs.join(" "));
            }
        }
        Verdict::Convertible {
            common_reduct,
            left,
            right,
        } => {
            let _ = writeln!(s, "convertible");
            let _ = writeln!(
                s,
                "common reduct: {common_reduct} ({} and {} steps)",
                left.path.len(),
                right.path.len()
            );
        }
        Verdict::Inconclusive { reason } => {
            let _ = writeln!(s, "inconclusive: {reason}");
        }
    }
    Ok(Output::ok(s, code))
}

fn cmd_relate(left: &str, right: &str, r: Relation, c: &RunConfig) -> Result<Output, Output> {
    let (m, n) = (term(left)?, term(right)?);
    let limits = Limits {
        depth: c.depth,
        fuel: c.fuel,
        mode: c.mode,
    };
    let ta = clocked_tree(&m, Flavor::Bt, limits);
    let tb = clocked_tree(&n, Flavor::Bt, limits);
    let truncated = rel_eventually(&ta, &tb, r, c.prefix_cut);
    let rational = match (rational_expand(&m, c.rational()), rational_expand(&n, c.rational())) {
        (Some(a), Some(b)) => {
            let p = Product::new(&a, &b);
            Some((p.eventually(r), p.infinitely_often(r)))
        }
        _ => None,
    };
    let tri = |t: crate::tree::Tri| json!(t).as_str().unwrap_or_default().to_string();
    if c.format == Format::Json {
        let v = json!({
            "relation": r,
            "prefixCut": c.prefix_cut,
            "truncated": truncated,
            "eventually": rational.as_ref().map(|x| &x.0),
            "infinitelyOften": rational.as_ref().map(|x| &x.1),
        });
        return Ok(Output::ok(pretty(&v), EXIT_OK));
    }
    let mut s = String::new();
    let _ = write!(s, "from level {}, to depth {}: {}", c.prefix_cut, c.depth, tri(truncated.outcome));
    if let Some(w) = &truncated.witness {
        let _ = write!(s, " at {w}");
    }
    s.push('\n');
    match rational {
        Some((ev, io)) => {
            let _ = write!(s, "eventually: {}", tri(ev.outcome));
            if let Some(l) = ev.from_level {
                let _ = write!(s, " from level {l}");
            }
            s.push('\n');
            let _ = write!(s, "infinitely often: {}", tri(io.outcome));
            if let Some(p) = &io.pump {
                let _ = write!(s, " along {} ({})* {}", p.prefix, p.pump, p.suffix);
            }
            s.push('\n');
        }
        None => s.push_str("no finite graphs within the budgets\n"),
    }
    Ok(Output::ok(s, EXIT_OK))
}

fn cmd_check(text: &str, c: &RunConfig) -> Result<Output, Output> {
    let t = term(text)?;
    let budgets = c.budgets();
    let report = check_fpc(&t, c.depth.min(crate::catalog::CHECK_DEPTH), c.fuel);
    let simple = is_simple_term(&t, c.depth, c.fuel);
    let clock = spine_clock(&t, &budgets);
    if c.format == Format::Json {
        let v = json!({ "fpc": report, "simple": simple, "clock": clock });
        return Ok(Output::ok(pretty(&v), EXIT_OK));
    }
    let mut s = String::new();
    let k = report.reducing_k.map_or("no".into(), |k| format!("{k} steps"));
    let _ = writeln!(s, "reducing: {k}");
    let _ = writeln!(s, "tree of Yx is x(x(...)) to depth {} of {}", report.bt_is_x_omega_to_depth, report.depth);
    let _ = writeln!(s, "Yx = x(Yx) confirmed: {}", json!(report.convertibility_check).as_str().unwrap_or_default());
    let _ = writeln!(s, "simple: {}", json!(simple)["result"].as_str().unwrap_or_default());
    if let Some(cl) = clock {
        let cs: Vec<String> = cl.clocks.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(s, "clocks of {}: {}", cl.reduct, cs.join(" "));
    }
    Ok(Output::ok(s, EXIT_OK))
}

fn cmd_catalog(
    family: Family,
    selection: Option<&str>,
    manifest: Option<&std::path::Path>,
    c: &RunConfig,
) -> Result<Output, Output> {
    let report = catalog(family, selection, &c.budgets()).map_err(|e| Output::error(format!("{e}\n")))?;
    let json = pretty(&report.to_json());
    if let Some(path) = manifest {
        std::fs::write(path, &json)
            .map_err(|e| Output::error(format!("cannot write {}: {e}\n", path.display())))?;
    }
    let stdout = match c.format {
        Format::Json => json,
        _ => report.to_text(),
    };
    Ok(Output::ok(stdout, EXIT_OK))
}

fn cmd_props(seed: u64, samples: usize, per_term: usize, max_steps: usize, tree_depth: usize, c: &RunConfig) -> Output {
    let budgets = c.budgets();
    let reports = [
        check_acceleration(seed, samples, tree_depth, &budgets),
        check_simple_invariance(seed, per_term, max_steps, &budgets),
    ];
    let code = if reports.iter().any(|r| r.violations > 0) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    };
    if c.format == Format::Json {
        return Output::ok(pretty(&json!(reports)), code);
    }
    let mut s = String::new();
    for r in &reports {
        let _ = writeln!(
            s,
            "{}: {} samples, {} violations, {} undecided, {} with changed clocks",
            r.property, r.samples, r.violations, r.undecided, r.clock_changes
        );
        if let Some(v) = &r.first_violation {
            let _ = writeln!(s, "  first violation: {v}");
        }
    }
    Output::ok(s, code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Output {
        run(std::iter::once("clocklam").chain(args.iter().copied()))
    }

    #[test]
    fn reduce_exit_codes() {
        let out = cli(&["reduce", "Y1 x", "--strategy", "head"]);
        assert_eq!(out.code, EXIT_OK);
        assert!(out.stdout.contains("reached in 2 steps"), "{}", out.stdout);
        assert_eq!(cli(&["reduce", "(\\x.x x)(\\x.x x)"]).code, EXIT_CYCLE);
        assert_eq!(cli(&["reduce", "Y0 x", "--strategy", "normalize", "--fuel", "50"]).code, EXIT_FUEL);
        assert_eq!(cli(&["reduce", "(\\x."]).code, EXIT_INPUT);
        assert!(cli(&["reduce", "Y3 x"]).stdout.contains("reached in 6 steps"));
    }

    #[test]
    fn reduce_json() {
        let out = cli(&["reduce", "Y1 x", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["steps"], 2);
        assert_eq!(v["outcome"], "reached");
        assert_eq!(v["trace"][0]["position"], "1");
    }

    #[test]
    fn trees() {
        let out = cli(&["tree", "Y0 f", "--flavor", "bt", "--depth", "4"]);
        assert_eq!(out.stdout, "[2]f([1]f([1]f([1]f(?))))\n");
        assert_eq!(cli(&["tree", "x", "--flavor", "bet"]).stdout, "[0]x\n");
        let dot = cli(&["tree", "Y0 f", "--rational", "--format", "dot"]).stdout;
        assert!(dot.contains("style=dashed"));
        assert_eq!(cli(&["tree", "Y0 f", "--depth", "0"]).code, EXIT_INPUT);
    }

    #[test]
    fn discriminate_exit_codes() {
        assert_eq!(cli(&["discriminate", "Y0", "Y1"]).code, EXIT_OK);
        assert_eq!(cli(&["discriminate", "Y0", "B Y0 I"]).code, EXIT_CONVERTIBLE);
        assert_eq!(cli(&["discriminate", "Y2", "U2", "--mode", "atomic"]).code, EXIT_OK);
        let out = cli(&["discriminate", "Y0", "Y1", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["verdict"], "inconvertible");
    }

    #[test]
    fn env_overrides() {
        std::env::set_var("CLOCKLAM_PREFIX_CUT", "1");
        let out = cli(&["relate", "Y0 f", "Y1 f"]);
        std::env::remove_var("CLOCKLAM_PREFIX_CUT");
        assert!(out.stdout.starts_with("from level 1"), "{}", out.stdout);
        assert!(out.stdout.contains("eventually: fails"), "{}", out.stdout);
    }

    #[test]
    fn output_is_deterministic() {
        let a = cli(&["catalog", "bohm", "0..2", "--format", "json"]);
        let b = cli(&["catalog", "bohm", "0..2", "--format", "json"]);
        assert_eq!(a, b);
        assert_eq!(a.code, EXIT_OK);
    }
}
