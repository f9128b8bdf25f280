//! Command-line front end. Every command reads JSON and writes JSON; the
//! process exit code is 0 on success, 2 on parse errors, 3 when a cap is
//! exceeded, 4 on a numeric mode mismatch, 5 on a violated precondition
//! and 1 for any other failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::classify::{classify, family_verdict};
use crate::instance::{
    brute_force, eval_ve, holant_to_csp, BipartiteGrid, CspInstance, InstanceError, Stats, DEFAULT_BRUTE_CAP,
    DEFAULT_WIDTH_CAP,
};
use crate::io::json::{
    field_to_json, grid_to_json, instance_to_json, parse_bipartite, parse_family, parse_field, parse_graph,
    parse_instance, parse_signature, parse_signature_text, signature_to_json, IoError,
};
use crate::numeric::{ApproxComplex, ExactComplex, Field, Mode, NumericError, DEFAULT_TOLERANCE};
use crate::reduce::{
    eliminate_pins_blackbox, eliminate_pins_blockinterp, equality_tree_rewrite, holographic_transform,
    interpolate_block, interpolate_eq2_from_h, interpolate_vanilla, lemma41_chain, lemma43_gadgets,
    local_transform_m, reduce_arity_search, stretch, substitute_gadget_scaled, thicken, verify_pipeline,
    PipelineConfig, Property, ReduceError, ReductionTrace, TraceStep,
};
use crate::signature::{Gadget, Signature};
use crate::tracteval::{affine_witnesses, eval_affine, eval_auto, eval_product, product_witnesses, TractError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_MODE: i32 = 4;
pub const EXIT_PRECONDITION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "cspkit", version, about = "Boolean #CSP and Holant evaluation, classification and reductions")]
pub struct Cli {
    /// Arithmetic: exact cyclotomic or floating-point complex.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Comparison tolerance in approximate mode.
    #[arg(long, global = true, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Variable cap for exhaustive enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_BRUTE_CAP)]
    pub cap: usize,
    /// Candidate budget for gadget searches.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub budget: usize,
    /// Block size for block interpolation.
    #[arg(long = "block-size", global = true, default_value_t = 2)]
    pub block_size: usize,
    /// Seed for randomized choices.
    #[arg(long, global = true, env = "CSPKIT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Approx,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Approx => Mode::Approx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Auto,
    Brute,
    Affine,
    Product,
    Ve,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the partition function of an instance.
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Algorithm::Auto)]
        algorithm: Algorithm,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a signature or decide the tractability of a family.
    Classify {
        /// Signature name, JSON text, or a file containing either.
        #[arg(long, conflicts_with = "family", required_unless_present = "family")]
        sig: Option<String>,
        /// Family such as `{EQ2,NEQ2}`, JSON text, or a file.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        modulo_scalar: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply one reduction operation.
    Reduce {
        #[arg(long)]
        op: String,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long = "in", alias = "input")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Recover #VC(G) from an oracle for #CSP(F) through a verified chain.
    VerifyPipeline {
        #[arg(long)]
        family: String,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

fn numeric_code(e: &NumericError) -> i32 {
    match e {
        NumericError::ModeMismatch(..) => EXIT_MODE,
        _ => EXIT_FAILURE,
    }
}

fn instance_code(e: &InstanceError) -> i32 {
    match e {
        InstanceError::CapExceeded { .. } => EXIT_CAP,
        _ => EXIT_PARSE,
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let code = match &e {
            IoError::Numeric(n) => numeric_code(n),
            _ => EXIT_PARSE,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::new(instance_code(&e), e.to_string())
    }
}

impl From<TractError> for CliError {
    fn from(e: TractError) -> Self {
        let code = match &e {
            TractError::Instance(i) => instance_code(i),
            _ => EXIT_PRECONDITION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ReduceError> for CliError {
    fn from(e: ReduceError) -> Self {
        let code = match &e {
            ReduceError::Precondition(_) => EXIT_PRECONDITION,
            ReduceError::Instance(InstanceError::CapExceeded { .. }) => EXIT_CAP,
            ReduceError::Numeric(n) => numeric_code(n),
            _ => EXIT_FAILURE,
        };
        CliError::new(code, e.to_string())
    }
}

fn mode_error(what: &str) -> CliError {
    CliError::new(EXIT_MODE, format!("{what} requires exact mode"))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

/// Inline text, or the contents of the file it names.
fn text_or_file(s: &str) -> Result<String, CliError> {
    let p = Path::new(s);
    if p.is_file() {
        read(p)
    } else {
        Ok(s.to_string())
    }
}

/// Rejects documents that declare a different arithmetic mode.
fn check_mode(text: &str, mode: Mode) -> Result<(), CliError> {
    if let Ok(Value::Object(m)) = serde_json::from_str::<Value>(text) {
        if let Some(Value::String(declared)) = m.get("mode") {
            if declared != &mode.to_string() {
                return Err(CliError::new(
                    EXIT_MODE,
                    format!("input declares mode {declared}, run uses {mode}"),
                ));
            }
        }
    }
    Ok(())
}

fn stats_json(s: Stats) -> Value {
    json!({ "n": s.n, "m": s.m, "delta": s.delta })
}

/// Parses `args` and runs the command, writing the JSON result to `stdout`
/// and diagnostics to stderr. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("serializable");
            let _ = writeln!(stdout, "{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

/// Runs a parsed command and returns the JSON printed on success.
pub fn execute(cli: &Cli) -> Result<Value, CliError> {
    let mode = Mode::from(cli.mode);
    match &cli.command {
        Command::Eval { input, algorithm, out } => {
            let text = read(input)?;
            check_mode(&text, mode)?;
            let v = match mode {
                Mode::Exact => eval_exact(&text, *algorithm, cli.cap)?,
                Mode::Approx => eval_approx(&text, *algorithm, cli.cap)?,
            };
            if let Some(p) = out {
                write_json(p, &v)?;
            }
            Ok(v)
        }
        Command::Classify {
            sig,
            family,
            modulo_scalar,
            out,
        } => {
            if mode != Mode::Exact {
                return Err(mode_error("classification"));
            }
            let v = match (sig, family) {
                (Some(s), _) => {
                    let f = parse_signature_text::<ExactComplex>(&text_or_file(s)?)?;
                    serde_json::to_value(classify(&f, *modulo_scalar)).expect("serializable")
                }
                (None, Some(fam)) => {
                    let fam = parse_family::<ExactComplex>(&text_or_file(fam)?)?;
                    serde_json::to_value(family_verdict(&fam, *modulo_scalar)).expect("serializable")
                }
                (None, None) => return Err(CliError::new(EXIT_PARSE, "need --sig or --family")),
            };
            if let Some(p) = out {
                write_json(p, &v)?;
            }
            Ok(v)
        }
        Command::Reduce {
            op,
            params,
            input,
            out,
            trace,
        } => {
            let tr = ReductionTrace::new();
            let result = (|| {
                let params = match params {
                    Some(p) => serde_json::from_str(&read(p)?).map_err(|e| CliError::new(EXIT_PARSE, e.to_string()))?,
                    None => json!({}),
                };
                let input = match input {
                    Some(p) => {
                        let t = read(p)?;
                        check_mode(&t, mode)?;
                        Some(t)
                    }
                    None => None,
                };
                match mode {
                    Mode::Exact => reduce_op::<ExactComplex>(cli, op, &params, input.as_deref(), &tr),
                    Mode::Approx => reduce_op::<ApproxComplex>(cli, op, &params, input.as_deref(), &tr),
                }
            })();
            finish_traced(result, op, &tr, trace.as_deref(), out.as_deref())
        }
        Command::VerifyPipeline {
            family,
            graph,
            trace,
            out,
        } => {
            let tr = ReductionTrace::new();
            let result = (|| {
                if mode != Mode::Exact {
                    return Err(mode_error("verify-pipeline"));
                }
                let fam = parse_family::<ExactComplex>(&text_or_file(family)?)?;
                let g = parse_graph(&read(graph)?)?;
                let config = PipelineConfig {
                    block_size: cli.block_size,
                    budget: cli.budget,
                    modulo_scalar: false,
                    width_cap: DEFAULT_WIDTH_CAP,
                };
                let r = verify_pipeline(&fam, g.n, &g.edges, &config, &tr)?;
                let v = json!({
                    "success": r.matches(),
                    "recovered": field_to_json(&r.recovered),
                    "expected": field_to_json(&r.expected),
                    "oracle_calls": r.oracle_calls,
                    "stage_checks": r.stage_checks,
                    "plan": r.plan.to_json(),
                });
                if !r.matches() {
                    return Err(CliError::new(EXIT_FAILURE, format!("recovered value differs: {v}")));
                }
                Ok((v.clone(), v))
            })();
            finish_traced(result, "verify_pipeline", &tr, trace.as_deref(), out.as_deref())
        }
    }
}

/// Writes the trace (also on failure, with the failing step marked) and
/// the output file, then returns the summary.
fn finish_traced(
    result: Result<(Value, Value), CliError>,
    op: &str,
    tr: &ReductionTrace,
    trace: Option<&Path>,
    out: Option<&Path>,
) -> Result<Value, CliError> {
    if let Err(e) = &result {
        let already = tr.steps().iter().any(|s| s.status.as_deref() == Some("failed"));
        if !already {
            tr.record(
                TraceStep::new(op, Stats::default(), Stats::default(), 0, ExactComplex::one().to_scalar())
                    .failed(&e.message),
            );
        }
    }
    if let Some(p) = trace {
        write_json(p, &tr.to_json())?;
    }
    let (summary, output) = result?;
    match out {
        Some(p) => {
            write_json(p, &output)?;
            Ok(summary)
        }
        None if summary == output => Ok(summary),
        None => Ok(json!({ "summary": summary, "output": output })),
    }
}

fn eval_exact(text: &str, algorithm: Algorithm, cap: usize) -> Result<Value, CliError> {
    let inst = parse_instance::<ExactComplex>(text)?;
    let (z, route, warning) = match algorithm {
        Algorithm::Auto => {
            let r = eval_auto(&inst, cap)?;
            let route = serde_json::to_value(r.route).expect("serializable");
            (r.value, route, r.warning)
        }
        Algorithm::Brute => (brute_force(&inst, cap)?, json!("brute"), None),
        Algorithm::Ve => (eval_ve(&inst, DEFAULT_WIDTH_CAP)?, json!("ve"), None),
        Algorithm::Affine => (eval_affine(&inst, &affine_witnesses(&inst)?)?, json!("affine"), None),
        Algorithm::Product => (eval_product(&inst, &product_witnesses(&inst)?)?, json!("product"), None),
    };
    Ok(eval_output(&inst, field_to_json(&z), route, warning))
}

fn eval_approx(text: &str, algorithm: Algorithm, cap: usize) -> Result<Value, CliError> {
    let inst = parse_instance::<ApproxComplex>(text)?;
    let (z, route) = match algorithm {
        Algorithm::Auto | Algorithm::Brute => (brute_force(&inst, cap)?, "brute"),
        Algorithm::Ve => (eval_ve(&inst, DEFAULT_WIDTH_CAP)?, "ve"),
        Algorithm::Affine | Algorithm::Product => return Err(mode_error("the tractable-class evaluators")),
    };
    Ok(eval_output(&inst, field_to_json(&z), json!(route), None))
}

fn eval_output<S: Field>(inst: &CspInstance<S>, z: Value, route: Value, warning: Option<String>) -> Value {
    let s = inst.stats();
    let mut v = json!({ "Z": z, "route": route, "n": s.n, "m": s.m, "delta": s.delta });
    if let Some(w) = warning {
        v["warning"] = json!(w);
    }
    v
}

fn param<'a>(params: &'a Value, key: &str) -> Result<&'a Value, CliError> {
    params
        .get(key)
        .ok_or_else(|| CliError::new(EXIT_PARSE, format!("params need `{key}`")))
}

fn param_usize(params: &Value, key: &str) -> Result<usize, CliError> {
    param(params, key)?
        .as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| CliError::new(EXIT_PARSE, format!("`{key}` must be a non-negative integer")))
}

fn param_str<'a>(params: &'a Value, key: &str) -> Result<&'a str, CliError> {
    param(params, key)?
        .as_str()
        .ok_or_else(|| CliError::new(EXIT_PARSE, format!("`{key}` must be a string")))
}

fn param_usizes(params: &Value, key: &str) -> Result<Vec<usize>, CliError> {
    param(params, key)?
        .as_array()
        .and_then(|a| a.iter().map(|x| x.as_u64().map(|u| u as usize)).collect())
        .ok_or_else(|| CliError::new(EXIT_PARSE, format!("`{key}` must be a list of integers")))
}

fn need_input<'a>(input: Option<&'a str>, op: &str) -> Result<&'a str, CliError> {
    input.ok_or_else(|| CliError::new(EXIT_PARSE, format!("operation `{op}` needs --in")))
}

fn exact_only<S: Field>(op: &str) -> Result<(), CliError> {
    if S::MODE == Mode::Exact {
        Ok(())
    } else {
        Err(mode_error(op))
    }
}

fn csp_oracle<S: Field>(inst: &CspInstance<S>) -> Result<S, ReduceError> {
    Ok(eval_ve(inst, DEFAULT_WIDTH_CAP)?)
}

fn grid_oracle<S: Field>(grid: &BipartiteGrid<S>) -> Result<S, ReduceError> {
    Ok(eval_ve(&holant_to_csp(&grid.grid)?, DEFAULT_WIDTH_CAP)?)
}

fn grid_out<S: Field>(g: &BipartiteGrid<S>) -> Value {
    grid_to_json(&g.grid, Some(&g.sides))
}

/// Returns `(summary, output)` for one reduction operation.
fn reduce_op<S: Field>(
    cli: &Cli,
    op: &str,
    params: &Value,
    input: Option<&str>,
    tr: &ReductionTrace,
) -> Result<(Value, Value), CliError> {
    let summary = |stats_in: Stats, stats_out: Stats, extra: Value| {
        let mut v = json!({ "op": op, "before": stats_json(stats_in), "after": stats_json(stats_out) });
        if let Value::Object(m) = extra {
            for (k, x) in m {
                v[k] = x;
            }
        }
        v
    };
    match op {
        "equality-tree" | "holographic" | "local-transform-m" | "stretch" => {
            let grid = parse_bipartite::<S>(need_input(input, op)?)?;
            let before = grid.stats();
            let (out, extra) = match op {
                "equality-tree" => (equality_tree_rewrite(&grid, tr)?, json!({})),
                "holographic" => {
                    let t = param(params, "T")?
                        .as_array()
                        .filter(|rows| rows.len() == 2)
                        .ok_or_else(|| CliError::new(EXIT_PARSE, "`T` must be a 2×2 matrix"))?;
                    let row = |r: &Value| -> Result<[S; 2], CliError> {
                        let r = r
                            .as_array()
                            .filter(|x| x.len() == 2)
                            .ok_or_else(|| CliError::new(EXIT_PARSE, "`T` rows need two entries"))?;
                        Ok([parse_field(&r[0])?, parse_field(&r[1])?])
                    };
                    (holographic_transform(&grid, &[row(&t[0])?, row(&t[1])?], tr)?, json!({}))
                }
                "local-transform-m" => {
                    let (g, ledger) = local_transform_m(&grid, tr)?;
                    (g, json!({ "ledger": field_to_json(&ledger) }))
                }
                _ => {
                    let h = parse_signature::<S>(param(params, "h")?)?;
                    let r = param_usize(params, "r")?;
                    (stretch(&grid, &param_usizes(params, "vertices")?, &h, r, tr)?, json!({}))
                }
            };
            Ok((summary(before, out.stats(), extra), grid_out(&out)))
        }
        "interpolate-eq2" => {
            let grid = parse_bipartite::<S>(need_input(input, op)?)?;
            let h = parse_signature::<S>(param(params, "h")?)?;
            let d = params.get("d").and_then(Value::as_u64).map_or(cli.block_size, |u| u as usize);
            let z = interpolate_eq2_from_h(&grid, &param_usizes(params, "vertices")?, &h, d, &grid_oracle, tr)?;
            let v = json!({ "Z": field_to_json(&z) });
            Ok((summary(grid.stats(), grid.stats(), v.clone()), v))
        }
        "thicken" | "substitute-gadget" => {
            let inst = parse_instance::<S>(need_input(input, op)?)?;
            let func = param_str(params, "function")?;
            let (out, ledger) = if op == "thicken" {
                (thicken(&inst, func, param_usize(params, "r")?, tr)?, S::one())
            } else {
                let g_text = serde_json::to_string(param(params, "gadget")?).expect("serializable");
                let g = Gadget::new(parse_instance::<S>(&g_text)?, param_usizes(params, "dangling")?)
                    .map_err(|e| CliError::new(EXIT_PARSE, e.to_string()))?;
                substitute_gadget_scaled(&inst, func, &g, tr)?
            };
            let extra = json!({ "ledger": field_to_json(&ledger) });
            Ok((summary(inst.stats(), out.stats(), extra), instance_to_json(&out)))
        }
        "interpolate-block" | "interpolate-vanilla" => {
            let inst = parse_instance::<S>(need_input(input, op)?)?;
            let func = param_str(params, "function")?;
            let base = parse_signature::<S>(param(params, "base")?)?;
            let z = if op == "interpolate-block" {
                let d = params.get("d").and_then(Value::as_u64).map_or(cli.block_size, |u| u as usize);
                interpolate_block(&inst, func, &base, d, &csp_oracle, tr)?
            } else {
                interpolate_vanilla(&inst, func, &base, &csp_oracle, tr)?
            };
            let v = json!({ "Z": field_to_json(&z) });
            Ok((summary(inst.stats(), inst.stats(), v.clone()), v))
        }
        "eliminate-pins-blackbox" | "eliminate-pins-blockinterp" => {
            exact_only::<S>(op)?;
            let inst = parse_instance::<S>(need_input(input, op)?)?;
            let z = if op == "eliminate-pins-blackbox" {
                let fam: Vec<Signature<S>> = param(params, "family")?
                    .as_array()
                    .ok_or_else(|| CliError::new(EXIT_PARSE, "`family` must be a list"))?
                    .iter()
                    .map(parse_signature)
                    .collect::<Result<_, _>>()?;
                eliminate_pins_blackbox(&inst, &fam, cli.budget, &csp_oracle, tr)?
            } else {
                let f = parse_signature::<S>(param(params, "f")?)?;
                let d = params.get("d").and_then(Value::as_u64).map_or(cli.block_size, |u| u as usize);
                eliminate_pins_blockinterp(&inst, &f, d, &csp_oracle, tr)?
            };
            let v = json!({ "Z": field_to_json(&z) });
            Ok((summary(inst.stats(), inst.stats(), v.clone()), v))
        }
        "arity-search" | "lemma43" | "lemma41" => {
            exact_only::<S>(op)?;
            let key = if op == "arity-search" { "sig" } else { "h" };
            let sig = parse_signature::<ExactComplex>(param(params, key)?)?;
            let v = match op {
                "arity-search" => {
                    let prop = Property::parse(param_str(params, "property")?)
                        .ok_or_else(|| CliError::new(EXIT_PARSE, "unknown property"))?;
                    let modulo = params.get("modulo_scalar").and_then(Value::as_bool).unwrap_or(false);
                    let r = reduce_arity_search(&sig, prop, cli.budget, modulo)?;
                    json!({
                        "steps": r.steps,
                        "signature": signature_to_json(&r.signature),
                        "examined": r.examined,
                    })
                }
                "lemma43" => {
                    let l = lemma43_gadgets(&sig)?;
                    json!({
                        "branch": l.branch,
                        "signature": signature_to_json(&l.signature),
                        "gadget": instance_to_json(&l.gadget.instance),
                        "dangling": l.gadget.dangling,
                    })
                }
                _ => lemma41_chain(&sig)?.to_json(),
            };
            Ok((json!({ "op": op }), v))
        }
        _ => Err(CliError::new(EXIT_PARSE, format!("unknown operation `{op}`"))),
    }
}
