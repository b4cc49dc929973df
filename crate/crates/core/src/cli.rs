//! The `invmean` command-line front end.
//!
//! Means are given either as JSON mean-specs or in a short token form:
//!
//! ```text
//! arith | geo | harm | min | max | beta | gini
//! power(2) | proj(2) | subset(1,2) | hfamily(1/4)
//! [arith,harm]            a mapping
//! @path/to/spec.json      read the spec from a file
//! ```
//!
//! Results go to standard output as JSON (or CSV/DOT where that makes sense).
//! Exit codes: 0 on success, 1 on usage or parse errors, 2 on numerical
//! domain errors, which are reported as `{"error": {"kind", "message"}}`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::complementary::{
    closure_generate_with, complement_mean, complement_solution, solve_completion, ClosureOptions, ComplementSpec,
};
use crate::domain::{Domain, SampleConfig};
use crate::error::{MeanError, Result};
use crate::expr::{IndexSet, MeanExpr, MeanVector};
use crate::funceq::{build_f, verify_solution, verify_solution_at, MultiFunction, ScalarFuncSpec, SolutionReport};
use crate::hfamily::{closure_enumerate_from, verify_denominators, verify_membership, ExponentVector};
use crate::invariance::{check_invariance, invariance_residual, iterate_mapping, IterationConfig};
use crate::rational::Rational;
use crate::spec_json::{parse_mapping, parse_mean};

/// Environment variable overriding the default tolerance.
pub const TOL_ENV: &str = "INVMEAN_TOL";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "invmean", version, about = "Invariant means, complementary averages and H-family closures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Numerical tolerance (default: $INVMEAN_TOL, else per command).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a mean, or every coordinate of a mapping, at a point.
    Eval {
        #[arg(long = "M")]
        m: String,
        #[arg(long)]
        x: String,
    },
    /// Iterate a mapping towards the diagonal.
    Iterate {
        #[arg(long = "M")]
        m: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Sampled check of K ∘ M = K, or the residual at one point.
    InvarianceCheck {
        #[arg(long = "K")]
        k: String,
        #[arg(long = "M")]
        m: String,
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// The K-complementary average of M over S.
    Complement {
        #[arg(long = "K")]
        k: String,
        #[arg(long = "M")]
        m: String,
        #[arg(long = "S")]
        s: String,
        #[arg(long)]
        x: Option<String>,
    },
    /// Solve for the value on S that completes a partial mapping at x.
    Complete {
        #[arg(long = "K")]
        k: String,
        /// Fixed coordinates: `1=subset(1,2);2=proj(2)` or a JSON object.
        #[arg(long)]
        fixed: String,
        /// Defaults to every coordinate not fixed.
        #[arg(long = "S")]
        s: Option<String>,
        #[arg(long)]
        x: String,
    },
    /// Closure of a mapping under complementary averaging.
    Closure {
        #[arg(long = "K")]
        k: String,
        #[arg(long = "M")]
        m: String,
        #[arg(long, default_value_t = crate::complementary::DEFAULT_MAX_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = crate::complementary::DEFAULT_BUDGET)]
        budget: usize,
        /// Disable exact exponent-vector deduplication.
        #[arg(long)]
        numeric: bool,
    },
    /// Exact closure of an H-family exponent vector under G.
    HfamClosure {
        #[arg(long)]
        p: Option<usize>,
        /// Root exponents, e.g. `1,-1/2,-1/2`. Defaults to (1, B_p, …, B_p).
        #[arg(long)]
        root: Option<String>,
        #[arg(long, default_value_t = crate::hfamily::DEFAULT_MAX_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = crate::hfamily::DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Check that F = φ ∘ K solves F ∘ M = F and F ∘ K_S(M) = F.
    #[command(name = "funceq-verify")]
    FuncEqVerify {
        /// Builds F = φ ∘ K.
        #[arg(long, required_unless_present = "f", conflicts_with = "f")]
        phi: Option<String>,
        /// A candidate F given directly as a mean.
        #[arg(long = "F")]
        f: Option<String>,
        /// A mean, or `iterated` for the limit of M's iterates.
        #[arg(long = "K", default_value = "iterated")]
        k: String,
        #[arg(long = "M")]
        m: String,
        /// Check at this point instead of at random samples.
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
}

/// What a run produced. `main` only prints and exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Domain(MeanError),
}

impl From<MeanError> for Failure {
    fn from(e: MeanError) -> Self {
        match e {
            MeanError::InvalidSpec(_)
            | MeanError::ArityMismatch { .. }
            | MeanError::InvalidIndex { .. }
            | MeanError::EmptySubset
            | MeanError::SIsFull => Failure::Usage(e.to_string()),
            other => Failure::Domain(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let env_tol = std::env::var(TOL_ENV).ok();
    match execute(&cli, env_tol.as_deref()) {
        Ok(text) => match &cli.common.out {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome { code: 0, stdout: String::new(), stderr: String::new() },
                Err(e) => Outcome { code: 1, stdout: String::new(), stderr: format!("{}: {e}\n", path.display()) },
            },
            None => Outcome { code: 0, stdout: text, stderr: String::new() },
        },
        Err(Failure::Usage(msg)) => Outcome { code: 1, stdout: String::new(), stderr: format!("error: {msg}\n") },
        Err(Failure::Domain(e)) => {
            let body = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            Outcome { code: 2, stdout: format!("{body}\n"), stderr: String::new() }
        }
    }
}

struct Settings {
    tol: Option<f64>,
    seed: u64,
    format: Format,
}

impl Settings {
    fn iteration(&self) -> IterationConfig {
        match self.tol {
            Some(t) => IterationConfig::default().with_tol(t),
            None => IterationConfig::default(),
        }
    }

    fn sampling(&self, count: usize) -> SampleConfig {
        let cfg = SampleConfig::new(count, self.seed, Domain::open(0.0, 10.0));
        match self.tol {
            Some(t) => cfg.with_tol(t),
            None => cfg,
        }
    }

    fn only(&self, allowed: &[Format]) -> CliResult<()> {
        if allowed.contains(&self.format) {
            Ok(())
        } else {
            usage(format!("--format {:?} is not available for this command", self.format).to_lowercase())
        }
    }
}

fn execute(cli: &Cli, env_tol: Option<&str>) -> CliResult<String> {
    let tol = match (cli.common.tol, env_tol) {
        (Some(t), _) => Some(t),
        (None, Some(s)) => match s.trim().parse::<f64>() {
            Ok(t) => Some(t),
            Err(_) => return usage(format!("{TOL_ENV}={s} is not a number")),
        },
        (None, None) => None,
    };
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return usage(format!("tolerance must be positive, got {t}"));
        }
    }
    let st = Settings { tol, seed: cli.common.seed, format: cli.common.format };

    match &cli.command {
        Command::Eval { m, x } => {
            st.only(&[Format::Json])?;
            let x = parse_point(x)?;
            if looks_like_mapping(m) {
                let mv = parse_mapping_arg(m)?;
                let values = mv.apply(&x)?;
                to_json(&json!({"mapping": mv, "x": x, "values": values}))
            } else {
                let e = parse_mean_arg(m)?;
                let value = e.eval(&x)?;
                to_json(&json!({"mean": e, "x": x, "value": value}))
            }
        }
        Command::Iterate { m, x, max_iter } => {
            st.only(&[Format::Json, Format::Csv])?;
            let mv = parse_mapping_arg(m)?;
            let x = parse_point(x)?;
            let mut cfg = st.iteration();
            if let Some(n) = max_iter {
                cfg = cfg.with_max_iter(*n);
            }
            if st.format == Format::Csv {
                cfg = cfg.with_trace();
            }
            let report = iterate_mapping(&mv, &x, &cfg)?;
            match st.format {
                Format::Csv => Ok(report.trace_csv()?),
                _ => to_json(&report),
            }
        }
        Command::InvarianceCheck { k, m, x, samples } => {
            st.only(&[Format::Json])?;
            let k = parse_mean_arg(k)?;
            let mv = parse_mapping_arg(m)?;
            match x {
                Some(x) => {
                    let x = parse_point(x)?;
                    let residual = invariance_residual(&k, &mv, &x)?;
                    to_json(&json!({"x": x, "residual": residual}))
                }
                None => {
                    let report = check_invariance(&k, &mv, &st.sampling(*samples))?;
                    let tol = st.tol.unwrap_or(crate::domain::REL_TOL);
                    to_json(&json!({
                        "invariant": report.max_residual <= tol,
                        "tol": tol,
                        "report": report,
                    }))
                }
            }
        }
        Command::Complement { k, m, s, x } => {
            st.only(&[Format::Json])?;
            let k = parse_mean_arg(k)?;
            let mv = parse_mapping_arg(m)?;
            let s = parse_subset(s, mv.arity())?;
            let spec = ComplementSpec::new(k, mv, s)?;
            let mean = complement_mean(&spec);
            match x {
                Some(x) => {
                    let x = parse_point(x)?;
                    let sol = complement_solution(&spec, &x, &st.iteration())?;
                    to_json(&json!({
                        "value": sol.value,
                        "x": x,
                        "target": sol.target,
                        "bracket": sol.bracket,
                        "residual": sol.residual,
                        "iterations": sol.iterations,
                        "mean": mean,
                    }))
                }
                None => to_json(&json!({"mean": mean})),
            }
        }
        Command::Complete { k, fixed, s, x } => {
            st.only(&[Format::Json])?;
            let k = parse_mean_arg(k)?;
            let x = parse_point(x)?;
            let fixed = parse_fixed(fixed)?;
            let s = match s {
                Some(s) => parse_subset(s, x.len())?,
                None => IndexSet::from_indices((0..x.len()).filter(|i| !fixed.contains_key(i)))?,
            };
            let value = solve_completion(&k, &fixed, s, &x, &st.iteration())?;
            to_json(&json!({"value": value, "x": x, "S": s}))
        }
        Command::Closure { k, m, depth, budget, numeric } => {
            st.only(&[Format::Json, Format::Dot])?;
            let k = parse_mean_arg(k)?;
            let mv = parse_mapping_arg(m)?;
            let opts = ClosureOptions {
                max_depth: *depth,
                budget: *budget,
                dedup: if *numeric {
                    crate::complementary::DedupMode::Numeric
                } else {
                    crate::complementary::DedupMode::Auto
                },
            };
            let tree = closure_generate_with(&k, &mv, &opts, &st.sampling(256))?;
            match st.format {
                Format::Dot => Ok(tree.to_dot()),
                _ => to_json(&tree),
            }
        }
        Command::HfamClosure { p, root, depth, budget } => {
            st.only(&[Format::Json, Format::Dot])?;
            let root = match (root, p) {
                (Some(r), _) => {
                    let v = ExponentVector::new(parse_rationals(r)?)?;
                    if p.is_some_and(|p| p != v.arity()) {
                        return usage(format!("--p {} disagrees with a root of length {}", p.unwrap(), v.arity()));
                    }
                    v
                }
                (None, Some(p)) if *p >= 2 && *p <= IndexSet::MAX_ARITY => ExponentVector::beta_root(*p),
                (None, Some(p)) => return usage(format!("--p must be between 2 and {}, got {p}", IndexSet::MAX_ARITY)),
                (None, None) => return usage("hfam-closure needs --p or --root"),
            };
            let closure = closure_enumerate_from(&root, *depth, *budget)?;
            match st.format {
                Format::Dot => Ok(closure.to_dot()),
                _ => {
                    let vectors: Vec<&ExponentVector> = closure.vectors().collect();
                    to_json(&json!({
                        "p": closure.p,
                        "depth": closure.max_depth,
                        "count": vectors.len(),
                        "vectors": vectors,
                        "denominators": verify_denominators(&closure),
                        "membership": verify_membership(&closure)?,
                        "nodes": closure.nodes,
                    }))
                }
            }
        }
        Command::FuncEqVerify { phi, f, k, m, x, samples } => {
            st.only(&[Format::Json, Format::Csv])?;
            let mv = parse_mapping_arg(m)?;
            let kernel = if k.trim() == "iterated" { MeanExpr::Invariant(mv.clone()) } else { parse_mean_arg(k)? };
            let report = match (phi, f) {
                (Some(phi), _) => {
                    let func = build_f(parse_phi(phi)?, kernel.clone());
                    verify(&func, &mv, &kernel, x.as_deref(), &st.sampling(*samples))?
                }
                (None, Some(f)) => verify(&parse_mean_arg(f)?, &mv, &kernel, x.as_deref(), &st.sampling(*samples))?,
                (None, None) => return usage("funceq-verify needs --phi or --F"),
            };
            match st.format {
                Format::Csv => Ok(report.to_csv()?),
                _ => {
                    let tol = st.tol.unwrap_or(1e-10);
                    let eq3: BTreeMap<String, f64> = report
                        .eq3_residuals
                        .iter()
                        .map(|(mask, r)| (IndexSet::from_mask(*mask).to_string(), *r))
                        .collect();
                    to_json(&json!({
                        "solution": report.is_solution(tol),
                        "tol": tol,
                        "eq2_residual": report.eq2_residual,
                        "eq2_witness": report.eq2_witness,
                        "eq3_residuals": eq3,
                        "representation_residual": report.representation_residual,
                        "homogeneous": report.homogeneous,
                        "samples": report.samples,
                    }))
                }
            }
        }
    }
}

fn verify(
    f: &dyn MultiFunction,
    m: &MeanVector,
    kernel: &MeanExpr,
    x: Option<&str>,
    cfg: &SampleConfig,
) -> CliResult<SolutionReport> {
    Ok(match x {
        Some(x) => verify_solution_at(f, m, kernel, &[parse_point(x)?])?,
        None => verify_solution(f, m, kernel, cfg)?,
    })
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn read_arg(arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).or_else(|e| usage(format!("{path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn looks_like_mapping(arg: &str) -> bool {
    arg.trim_start().starts_with('[')
        || arg.starts_with('@') && read_arg(arg).is_ok_and(|s| s.trim_start().starts_with('['))
}

/// Splits on commas outside parentheses and brackets.
fn split_top(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts
}

fn call(token: &str) -> (&str, Option<&str>) {
    match (token.find('('), token.strip_suffix(')')) {
        (Some(open), Some(body)) => (token[..open].trim(), Some(&body[open + 1..])),
        _ => (token, None),
    }
}

fn parse_f64(s: &str) -> CliResult<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => usage(format!("not a finite number: {s:?}")),
    }
}

fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

fn parse_rationals(s: &str) -> CliResult<Vec<Rational>> {
    s.split(',').map(|t| t.trim().parse::<Rational>().map_err(|e| Failure::Usage(format!("{t:?}: {e}")))).collect()
}

fn parse_indices(s: &str) -> CliResult<Vec<usize>> {
    s.split(',').map(|t| t.trim().parse::<usize>().or_else(|_| usage(format!("not an index: {t:?}")))).collect()
}

/// `2`, `1,3`, `[1,3]`, or a bitmask `0b101` / `0x5` (bit 0 is coordinate 1).
pub fn parse_subset_token(s: &str) -> Result<IndexSet> {
    let t = s.trim();
    let mask = if let Some(b) = t.strip_prefix("0b") {
        Some(u64::from_str_radix(b, 2))
    } else {
        t.strip_prefix("0x").map(|h| u64::from_str_radix(h, 16))
    };
    match mask {
        Some(Ok(m)) => Ok(IndexSet::from_mask(m)),
        Some(Err(_)) => Err(MeanError::InvalidSpec(format!("bad bitmask {t:?}"))),
        None => {
            let inner = t.trim_start_matches('[').trim_end_matches(']');
            let ix = inner
                .split(',')
                .map(|v| v.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| MeanError::InvalidSpec(format!("bad index set {t:?}")))?;
            IndexSet::one_based(&ix)
        }
    }
}

fn parse_subset(s: &str, p: usize) -> CliResult<IndexSet> {
    let set = parse_subset_token(s)?;
    if set.is_empty() {
        return Err(MeanError::EmptySubset.into());
    }
    set.check_within(p)?;
    Ok(set)
}

/// Parses a single mean in token or JSON form.
pub fn parse_mean_token(s: &str) -> Result<MeanExpr> {
    let t = s.trim();
    if t.starts_with('{') {
        return parse_mean(t);
    }
    let bad = || MeanError::InvalidSpec(format!("unknown mean {t:?}"));
    let (name, arg) = call(t);
    let num = |a: Option<&str>| -> Result<f64> {
        a.and_then(|a| a.trim().parse::<f64>().ok()).filter(|v| v.is_finite()).ok_or_else(bad)
    };
    let expr = match (name.to_ascii_lowercase().as_str(), arg) {
        ("a" | "arith" | "arithmetic", None) => MeanExpr::Arithmetic,
        ("g" | "geo" | "geometric", None) => MeanExpr::Geometric,
        ("h" | "harm" | "harmonic", None) => MeanExpr::Harmonic,
        ("min", None) => MeanExpr::Min,
        ("max", None) => MeanExpr::Max,
        ("b" | "beta", None) => MeanExpr::BetaType,
        ("f" | "gini" | "gini_f", None) => MeanExpr::GiniF,
        ("pow" | "power", a) => MeanExpr::Power(num(a)?),
        ("proj" | "projection", Some(a)) => match a.trim().parse::<usize>() {
            Ok(i) if i >= 1 => MeanExpr::Projection(i - 1),
            _ => return Err(bad()),
        },
        ("subset" | "subset_arithmetic", Some(a)) => {
            let set = parse_subset_token(a)?;
            if set.is_empty() {
                return Err(MeanError::EmptySubset);
            }
            MeanExpr::SubsetArithmetic(set)
        }
        ("hfam" | "hfamily", Some(a)) => MeanExpr::HFamily(a.trim().parse::<Rational>().map_err(|_| bad())?),
        _ => return Err(bad()),
    };
    Ok(expr)
}

/// Parses a mapping: a JSON array of mean-specs or `[tok, tok, …]`.
pub fn parse_mapping_token(s: &str) -> Result<MeanVector> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| MeanError::InvalidSpec(format!("a mapping is written [m1, m2, …], got {t:?}")))?;
    if inner.trim_start().starts_with('{') {
        return parse_mapping(t);
    }
    MeanVector::new(split_top(inner).into_iter().map(parse_mean_token).collect::<Result<Vec<_>>>()?)
}

fn parse_mean_arg(s: &str) -> CliResult<MeanExpr> {
    Ok(parse_mean_token(&read_arg(s)?)?)
}

fn parse_mapping_arg(s: &str) -> CliResult<MeanVector> {
    Ok(parse_mapping_token(&read_arg(s)?)?)
}

fn parse_fixed(s: &str) -> CliResult<BTreeMap<usize, MeanExpr>> {
    let text = read_arg(s)?;
    let t = text.trim();
    let mut out = BTreeMap::new();
    if t.starts_with('{') {
        let obj: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(t).map_err(|e| Failure::Usage(e.to_string()))?;
        for (key, v) in obj {
            let i = parse_indices(&key)?;
            let expr = parse_mean(&v.to_string())?;
            insert_fixed(&mut out, &i, expr)?;
        }
    } else {
        for part in t.split(';').filter(|p| !p.trim().is_empty()) {
            let Some((key, mean)) = part.split_once('=') else {
                return usage(format!("expected i=mean, got {part:?}"));
            };
            insert_fixed(&mut out, &parse_indices(key)?, parse_mean_token(mean)?)?;
        }
    }
    if out.is_empty() {
        return usage("--fixed names no coordinates");
    }
    Ok(out)
}

fn insert_fixed(out: &mut BTreeMap<usize, MeanExpr>, key: &[usize], expr: MeanExpr) -> CliResult<()> {
    match key {
        [i] if *i >= 1 => {
            if out.insert(i - 1, expr).is_some() {
                return usage(format!("coordinate {i} is fixed twice"));
            }
            Ok(())
        }
        _ => usage(format!("bad coordinate {key:?}")),
    }
}

/// `id`, `log`, `exp`, `power(r)`, `affine(a,b)`, or a JSON spec.
fn parse_phi(s: &str) -> CliResult<ScalarFuncSpec> {
    let text = read_arg(s)?;
    let t = text.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).or_else(|e| usage(e.to_string()));
    }
    let (name, arg) = call(t);
    Ok(match (name, arg) {
        ("id" | "identity", None) => ScalarFuncSpec::Identity,
        ("log" | "ln", None) => ScalarFuncSpec::Log,
        ("exp", None) => ScalarFuncSpec::Exp,
        ("pow" | "power", Some(a)) => ScalarFuncSpec::Power { r: parse_f64(a)? },
        ("affine", Some(a)) => match split_top(a).as_slice() {
            [a, b] => ScalarFuncSpec::Affine { a: parse_f64(a)?, b: parse_f64(b)? },
            _ => return usage(format!("affine takes two numbers, got {a:?}")),
        },
        _ => return usage(format!("unknown function {t:?}")),
    })
}
