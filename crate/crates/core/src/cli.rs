//! Command-line adapter. Every verb parses its flags, calls one library
//! entry point and prints the result as JSON (default) or a plain table.
//!
//! Exit codes: 0 success, 1 domain error, 2 exhausted work budget or scan
//! cap, 64 malformed input.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde_json::{json, Map, Value};

use crate::closure::{build_closure, SuccessorEngine, DEFAULT_ENGINE_BUDGET, DEFAULT_SCAN_CAP};
use crate::embedding::{build_embedding, thm_cont_demo};
use crate::error::{Error, Result};
use crate::generator::{denominator_profile, generate, GeneratorSystem, LinearFunction};
use crate::mrec::{check_m_invariants, grid, MRecursion, DEFAULT_WORK_BUDGET};
use crate::numbers::Extended;
use crate::ordinal::{
    classify_limit, compare, enumerate_terms, expected_order_type, nat_prod, nat_sum, OrderTypeKind, OrdinalTerm,
};
use crate::scalar::Scalar;
use crate::star::{star_compare, star_enumerate, VeblenStarTerm};
use crate::ExactRational as Q;

/// Overrides the default work budget of `m`, `check-invariants` and the
/// successor verbs.
pub const BUDGET_ENV: &str = "FUSIBLE_WORK_BUDGET";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "fusible", version, about = "Exact fusible-number, closure and ordinal-notation tools")]
struct Cli {
    /// Print a plain table instead of JSON.
    #[arg(long, global = true, conflicts_with = "json")]
    table: bool,
    /// Print JSON (the default).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Evaluate M_n(x) with its t-vector.
    M {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Cache misses allowed.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Enumerate F(G, P) up to an application budget.
    Generate {
        #[command(flatten)]
        system: SystemArgs,
        /// Maximum applications per term.
        #[arg(long)]
        budget: usize,
        /// Maximum number of values kept.
        #[arg(long, default_value_t = usize::MAX)]
        cap: usize,
        /// Include the denominator prime profile.
        #[arg(long)]
        profile: bool,
    },
    /// Least closure element above r.
    Succ(EngineArgs),
    /// Closure element immediately below the successor element r.
    Pred(EngineArgs),
    /// Largest closure element at most r.
    Weakpred(EngineArgs),
    /// Whether r lies in the closure.
    Member(EngineArgs),
    /// Show cl(g) for a system.
    ClosureBuild {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Ordinal notation operations.
    Ord {
        #[command(subcommand)]
        op: OrdOp,
    },
    /// List star terms up to a size bound in ascending order.
    StarEnum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        size_bound: usize,
    },
    /// Build and verify the rational embedding of star terms.
    Embed {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        terms: usize,
    },
    /// Generate from the extended grid function and compare with the terms.
    Demo {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        terms: usize,
        /// Application budget for generation.
        #[arg(long, default_value_t = 4)]
        budget: usize,
    },
    /// Check the structural identities of M_n on a grid.
    CheckInvariants {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "-1", allow_hyphen_values = true)]
        lo: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        hi: String,
        #[arg(long, default_value = "1/16")]
        step: String,
        /// Comma-separated fractions in [0, 1).
        #[arg(long, default_value = "0,1/4,1/2,3/4")]
        fractions: String,
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// f2, f3, …; f-le-N for {g_1..g_N}; lin:a1,a2,…:b for a custom linear g.
    #[arg(long)]
    system: String,
    /// Comma-separated constants P.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    constants: String,
}

#[derive(Args, Debug)]
struct EngineArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, allow_hyphen_values = true)]
    r: String,
    /// Engine calls allowed per query.
    #[arg(long)]
    budget: Option<u64>,
    /// Enumeration positions a predecessor scan may inspect.
    #[arg(long, default_value_t = DEFAULT_SCAN_CAP)]
    cap: usize,
}

#[derive(Subcommand, Debug)]
enum OrdOp {
    Cmp { a: String, b: String },
    Sum { a: String, b: String },
    Prod { a: String, b: String },
    Classify { a: String },
    /// Normal-form terms up to a size bound, ascending.
    Enum {
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long)]
        size_bound: usize,
    },
    /// The order type the theory predicts.
    Expected {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: usize,
    },
    /// Compare two star terms.
    StarCmp { a: String, b: String },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KindArg {
    Fusible,
    Continuous,
}

/// Runs one invocation and returns the exit code. Output goes to `out`,
/// diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(&cli.verb) {
        Ok(value) => {
            let text = if cli.table { to_table(&value) } else { to_json_line(&value) };
            let _ = writeln!(out, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_usage() {
        EXIT_USAGE
    } else if e.is_resource() {
        EXIT_RESOURCE
    } else {
        EXIT_DOMAIN
    }
}

fn to_json_line(v: &Value) -> String {
    serde_json::to_string(v).expect("JSON values serialize")
}

/// `key<TAB>value` per line; arrays one element per line.
fn to_table(v: &Value) -> String {
    let mut lines = Vec::new();
    table_lines(v, "", &mut lines);
    lines.join("\n")
}

fn table_lines(v: &Value, prefix: &str, lines: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                table_lines(x, &key, lines);
            }
        }
        Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                lines.push(format!("{prefix}[{i}]\t{}", scalar_text(x)));
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                table_lines(x, &format!("{prefix}[{i}]"), lines);
            }
        }
        other => lines.push(format!("{prefix}\t{}", scalar_text(other))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn default_budget(flag: Option<u64>, fallback: u64) -> Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{BUDGET_ENV} = {text:?} is not a nonnegative integer"))),
        Err(_) => Ok(fallback),
    }
}

fn rational(text: &str) -> Result<Q> {
    Q::parse_canonical(text)
}

fn rational_list(text: &str) -> Result<Vec<Q>> {
    text.split(',').map(|t| rational(t.trim())).collect()
}

fn named_system(spec: &str) -> Result<Vec<LinearFunction<Q>>> {
    let arity = |digits: &str| -> Result<usize> {
        digits
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Parse(format!("bad arity in system {spec:?}")))
    };
    if let Some(rest) = spec.strip_prefix("f-le-") {
        let n = arity(rest)?;
        return Ok((1..=n).map(LinearFunction::g_n).collect());
    }
    if let Some(rest) = spec.strip_prefix("lin:") {
        let (coefs, b) = rest
            .rsplit_once(':')
            .ok_or_else(|| Error::Parse(format!("expected lin:a1,…,an:b, got {spec:?}")))?;
        return Ok(vec![LinearFunction::new(rational_list(coefs)?, rational(b)?)?]);
    }
    if let Some(rest) = spec.strip_prefix('f') {
        return Ok(vec![LinearFunction::g_n(arity(rest)?)]);
    }
    Err(Error::Parse(format!("unknown system {spec:?}")))
}

fn generator_system(args: &SystemArgs) -> Result<GeneratorSystem<Q>> {
    GeneratorSystem::new(named_system(&args.system)?, rational_list(&args.constants)?)
}

/// The single linear function of the system, with zero coefficients removed.
fn single_function(args: &SystemArgs) -> Result<LinearFunction<Q>> {
    let mut fs = named_system(&args.system)?;
    if fs.len() != 1 {
        return Err(Error::Domain(format!(
            "closure procedures need a single generating function, {:?} has {}",
            args.system,
            fs.len()
        )));
    }
    fs.pop().expect("one function").collapse_zero_coefficients()
}

fn engine(args: &EngineArgs) -> Result<SuccessorEngine<Q>> {
    let sys = build_closure(single_function(&args.system)?, rational_list(&args.system.constants)?)?;
    let budget = default_budget(args.budget, DEFAULT_ENGINE_BUDGET)?;
    Ok(SuccessorEngine::new(sys).with_limits(budget, args.cap))
}

fn ordinal(text: &str) -> Result<OrdinalTerm> {
    OrdinalTerm::parse(text)
}

fn ordering_name(o: std::cmp::Ordering) -> &'static str {
    match o {
        std::cmp::Ordering::Less => "less",
        std::cmp::Ordering::Equal => "equal",
        std::cmp::Ordering::Greater => "greater",
    }
}

fn dispatch(verb: &Verb) -> Result<Value> {
    match verb {
        Verb::M { n, x, budget } => {
            let mut rec = MRecursion::<Q>::with_budget(*n, default_budget(*budget, DEFAULT_WORK_BUDGET)?)?;
            Ok(rec.trace(&rational(x)?)?.to_json())
        }
        Verb::Generate {
            system,
            budget,
            cap,
            profile,
        } => {
            let sys = generator_system(system)?;
            let frag = generate(&sys, *budget, *cap);
            let mut v = frag.to_json(&sys);
            if *profile {
                let prof: Map<String, Value> = denominator_profile(&frag.values)
                    .into_iter()
                    .map(|(p, e)| (p.to_string(), json!(e)))
                    .collect();
                v["denominator_profile"] = Value::Object(prof);
            }
            Ok(v)
        }
        Verb::Succ(args) => {
            let mut e = engine(args)?;
            let r = Extended::<Q>::parse(&args.r)?;
            let s = e.succ(&r)?;
            Ok(json!({"r": r.canonical(), "succ": s.canonical(), "stats": e.stats()}))
        }
        Verb::Pred(args) => {
            let mut e = engine(args)?;
            let r = rational(&args.r)?;
            let p = e.pred(&r)?;
            Ok(json!({"r": r.canonical(), "pred": p.canonical(), "stats": e.stats()}))
        }
        Verb::Weakpred(args) => {
            let mut e = engine(args)?;
            let r = rational(&args.r)?;
            let p = e.weak_pred(&r)?;
            Ok(json!({"r": r.canonical(), "weak_pred": p.canonical(), "stats": e.stats()}))
        }
        Verb::Member(args) => {
            let mut e = engine(args)?;
            let r = rational(&args.r)?;
            Ok(json!({"r": r.canonical(), "in_closure": e.is_in_closure(&r)?}))
        }
        Verb::ClosureBuild { system } => {
            let sys = build_closure(single_function(system)?, rational_list(&system.constants)?)?;
            let mut v = sys.describe();
            v["functions"] = json!(sys.generator_system().names());
            Ok(v)
        }
        Verb::Ord { op } => ord(op),
        Verb::StarEnum { n, size_bound } => {
            if *n == 0 {
                return Err(Error::Precondition("arity must be positive".into()));
            }
            let terms: Vec<String> = star_enumerate(*n, *size_bound).iter().map(ToString::to_string).collect();
            Ok(json!({"n": n, "size_bound": size_bound, "terms": terms}))
        }
        Verb::Embed { n, terms } => {
            let emb = build_embedding(*n, *terms)?;
            Ok(json!({
                "n": n,
                "terms": emb.terms().iter().map(ToString::to_string).collect::<Vec<_>>(),
                "images": emb.images().iter().map(Scalar::canonical).collect::<Vec<_>>(),
                "check": emb.verify(),
            }))
        }
        Verb::Demo { n, terms, budget } => Ok(serde_json::to_value(thm_cont_demo(*n, *terms, *budget)?)
            .expect("report serializes")),
        Verb::CheckInvariants {
            n,
            lo,
            hi,
            step,
            fractions,
            budget,
        } => {
            let step = rational(step)?;
            if !step.is_positive() {
                return Err(Error::Precondition("step must be positive".into()));
            }
            let fr = rational_list(fractions)?;
            if fr.iter().any(|f| f.is_negative() || *f >= Q::int(1)) {
                return Err(Error::Precondition("fractions must lie in [0, 1)".into()));
            }
            let mut rec = MRecursion::<Q>::with_budget(*n, default_budget(*budget, DEFAULT_WORK_BUDGET)?)?;
            let report = check_m_invariants(&mut rec, &grid(&rational(lo)?, &rational(hi)?, &step), &fr)?;
            Ok(serde_json::to_value(report).expect("report serializes"))
        }
    }
}

fn ord(op: &OrdOp) -> Result<Value> {
    match op {
        OrdOp::Cmp { a, b } => Ok(json!({"order": ordering_name(compare(&ordinal(a)?, &ordinal(b)?))})),
        OrdOp::Sum { a, b } => {
            let s = nat_sum(&ordinal(a)?, &ordinal(b)?);
            Ok(json!({"term": s.to_string(), "pretty": s.pretty()}))
        }
        OrdOp::Prod { a, b } => {
            let p = nat_prod(&ordinal(a)?, &ordinal(b)?);
            Ok(json!({"term": p.to_string(), "pretty": p.pretty()}))
        }
        OrdOp::Classify { a } => Ok(json!({"class": classify_limit(&ordinal(a)?).as_str()})),
        OrdOp::Enum { arity, size_bound } => {
            if *arity < 2 {
                return Err(Error::Precondition("arity must be at least 2".into()));
            }
            let terms: Vec<String> = enumerate_terms(*arity, *size_bound).iter().map(ToString::to_string).collect();
            Ok(json!({"terms": terms}))
        }
        OrdOp::Expected { kind, n } => {
            let kind = match kind {
                KindArg::Fusible => OrderTypeKind::Fusible,
                KindArg::Continuous => OrderTypeKind::Continuous,
            };
            let t = expected_order_type(kind, *n)?;
            Ok(json!({"term": t.to_string(), "pretty": t.pretty()}))
        }
        OrdOp::StarCmp { a, b } => Ok(json!({
            "order": ordering_name(star_compare(&VeblenStarTerm::parse(a)?, &VeblenStarTerm::parse(b)?)?)
        })),
    }
}
