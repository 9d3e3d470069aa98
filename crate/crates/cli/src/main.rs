//! Command-line front end: `analyze`, `terms`, `fix`, `fit`.
//!
//! Exit codes: 0 success, 1 malformed input, 2 classification rejection,
//! 3 fit failure.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use trirec::binet::solve_coefficients;
use trirec::convergence::{converged_limit, u2_solutions};
use trirec::limits::{
    analytic_limits, empirical_gamma_squared, empirical_parity_limits, empirical_two_step_limit,
};
use trirec::numerics::{parse_scalar, Backend, Scalar, Tolerance};
use trirec::recurrence::{
    classify, fit_coefficients, iterate_terms, make_degenerate_spec, ClassTag, DegenerateRoots,
    RecurrenceError,
};

const EXIT_MALFORMED: u8 = 1;
const EXIT_CLASSIFICATION: u8 = 2;
const EXIT_FIT: u8 = 3;

#[derive(Parser)]
#[command(name = "trirec", version, about = "Analyze degenerated third-order linear recurrences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: classification, Binet coefficients, limits, convergence
    Analyze {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        initial: InitialArgs,
        #[command(flatten)]
        config: ConfigArgs,
        /// Include empirical ratio estimates even on the exact backend
        #[arg(long)]
        empirical: bool,
    },
    /// Generate terms U_0..U_n
    Terms {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        initial: InitialArgs,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Solve for the two u2 values that make the consecutive ratio converge
    Fix {
        /// Middle root lambda2
        #[arg(long, allow_hyphen_values = true)]
        lambda2: String,
        /// Dominant root lambda3 (> |lambda2|)
        #[arg(long, allow_hyphen_values = true)]
        lambda3: String,
        #[arg(long, allow_hyphen_values = true)]
        u0: String,
        #[arg(long, allow_hyphen_values = true)]
        u1: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Fit an order-3 recurrence to terms from a file or stdin, then analyze
    Fit {
        /// File with comma- or newline-separated terms (stdin when omitted)
        file: Option<String>,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
#[group(required = false, multiple = true)]
struct SpecArgs {
    /// Middle root lambda2 (with --lambda3)
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["a1", "a2", "a3"])]
    lambda2: Option<String>,
    /// Dominant root lambda3 (> |lambda2|)
    #[arg(long, allow_hyphen_values = true, requires = "lambda2")]
    lambda3: Option<String>,
    /// Recurrence coefficient a1 (with --a2, --a3; classified before use)
    #[arg(long, allow_hyphen_values = true, requires_all = ["a2", "a3"])]
    a1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a3: Option<String>,
}

#[derive(Args)]
struct InitialArgs {
    #[arg(long, allow_hyphen_values = true)]
    u0: String,
    #[arg(long, allow_hyphen_values = true)]
    u1: String,
    #[arg(long, allow_hyphen_values = true)]
    u2: String,
}

#[derive(Args)]
struct ConfigArgs {
    /// exact | float (default: exact when every input parses as a rational)
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Highest index to generate / estimation window
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Relative tolerance for float comparisons
    #[arg(long, default_value_t = 1e-9)]
    tol_rel: f64,
    /// Absolute tolerance for float comparisons
    #[arg(long, default_value_t = 1e-12)]
    tol_abs: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { spec, initial, config, empirical } => {
            cmd_analyze(&spec, &initial, &config, empirical)
        }
        Command::Terms { spec, initial, config } => cmd_terms(&spec, &initial, &config),
        Command::Fix { lambda2, lambda3, u0, u1, config } => {
            cmd_fix(&lambda2, &lambda3, &u0, &u1, &config)
        }
        Command::Fit { file, config } => cmd_fit(file.as_deref(), &config),
    }
}

/// Exact when every input parses as a rational, float otherwise.
fn pick_backend(config: &ConfigArgs, inputs: &[&str]) -> Backend {
    if let Some(b) = config.backend {
        return b;
    }
    if inputs.iter().all(|t| parse_scalar(t, Backend::Exact).is_ok()) {
        Backend::Exact
    } else {
        Backend::Float
    }
}

fn scalar(text: &str, backend: Backend) -> Result<Scalar, Failure> {
    parse_scalar(text, backend).map_err(|e| Failure::new(EXIT_MALFORMED, e.to_string()))
}

fn tolerance(config: &ConfigArgs) -> Tolerance {
    Tolerance::new(config.tol_rel, config.tol_abs)
}

/// Roots plus the classification record that produced them (when the spec
/// came in as a coefficient triple).
fn resolve_roots(
    spec: &SpecArgs,
    backend: Backend,
) -> Result<(DegenerateRoots, Value), Failure> {
    match (&spec.lambda2, &spec.lambda3, &spec.a1, &spec.a2, &spec.a3) {
        (Some(l2), Some(l3), None, None, None) => {
            let l2 = scalar(l2, backend)?;
            let l3 = scalar(l3, backend)?;
            let roots = DegenerateRoots::new(l2, l3)
                .map_err(|e| Failure::new(EXIT_CLASSIFICATION, e.to_string()))?;
            let spec = make_degenerate_spec(
                &roots,
                Scalar::zero(backend),
                Scalar::zero(backend),
                Scalar::zero(backend),
            );
            let class = classify(&spec.a1, &spec.a2, &spec.a3);
            Ok((roots, serde_json::to_value(&class).unwrap()))
        }
        (None, None, Some(a1), Some(a2), Some(a3)) => {
            let a1 = scalar(a1, backend)?;
            let a2 = scalar(a2, backend)?;
            let a3 = scalar(a3, backend)?;
            let class = classify(&a1, &a2, &a3);
            match (&class.tag, &class.roots) {
                (ClassTag::Degenerated | ClassTag::DegeneratedReducedOrder, Some(roots)) => {
                    let roots = roots.clone();
                    Ok((roots, serde_json::to_value(&class).unwrap()))
                }
                _ => Err(Failure::new(EXIT_CLASSIFICATION, class.reason)),
            }
        }
        _ => Err(Failure::new(
            EXIT_MALFORMED,
            "give either --lambda2/--lambda3 or --a1/--a2/--a3",
        )),
    }
}

fn spec_inputs<'a>(spec: &'a SpecArgs, initial: &'a InitialArgs) -> Vec<&'a str> {
    [&spec.lambda2, &spec.lambda3, &spec.a1, &spec.a2, &spec.a3]
        .into_iter()
        .flatten()
        .map(String::as_str)
        .chain([initial.u0.as_str(), initial.u1.as_str(), initial.u2.as_str()])
        .collect()
}

fn cmd_analyze(
    spec_args: &SpecArgs,
    initial: &InitialArgs,
    config: &ConfigArgs,
    empirical: bool,
) -> Result<(), Failure> {
    let backend = pick_backend(config, &spec_inputs(spec_args, initial));
    let (roots, classification) = resolve_roots(spec_args, backend)?;
    let u0 = scalar(&initial.u0, backend)?;
    let u1 = scalar(&initial.u1, backend)?;
    let u2 = scalar(&initial.u2, backend)?;

    let report = analyze_report(&roots, &u0, &u1, &u2, classification);
    let report = if empirical || backend == Backend::Float {
        with_empirical(report, &roots, &u0, &u1, &u2, config)?
    } else {
        report
    };
    emit(&report, config.format);
    Ok(())
}

fn analyze_report(
    roots: &DegenerateRoots,
    u0: &Scalar,
    u1: &Scalar,
    u2: &Scalar,
    classification: Value,
) -> Value {
    let spec = make_degenerate_spec(roots, u0.clone(), u1.clone(), u2.clone());
    let coeffs = solve_coefficients(roots, u0, u1, u2);
    let limits = analytic_limits(roots, u0, u1, u2);
    let solutions = u2_solutions(roots, u0, u1);
    json!({
        "classification": classification,
        "spec": spec,
        "binet_coefficients": coeffs,
        "limits": limits,
        "convergence": {
            "u2_first": solutions.u2_first,
            "u2_second": solutions.u2_second,
            "coincident": solutions.coincident,
            "limit_for_given_u2": converged_limit(roots, u0, u1, u2),
        },
    })
}

fn with_empirical(
    mut report: Value,
    roots: &DegenerateRoots,
    u0: &Scalar,
    u1: &Scalar,
    u2: &Scalar,
    config: &ConfigArgs,
) -> Result<Value, Failure> {
    if config.n < 8 {
        return Err(Failure::new(
            EXIT_MALFORMED,
            format!("--n {} is below the minimum of 8 for empirical estimation", config.n),
        ));
    }
    let float_roots = DegenerateRoots::new(
        Scalar::Float(roots.lambda2().to_f64()),
        Scalar::Float(roots.lambda3().to_f64()),
    )
    .expect("valid roots stay valid as floats");
    let spec = make_degenerate_spec(
        &float_roots,
        Scalar::Float(u0.to_f64()),
        Scalar::Float(u1.to_f64()),
        Scalar::Float(u2.to_f64()),
    );
    let tol = tolerance(config);
    let parity = empirical_parity_limits(&spec, config.n, tol);
    let two_step = empirical_two_step_limit(&spec, config.n, tol);
    let gamma_sq = empirical_gamma_squared(&spec, config.n, tol);

    let mut section = serde_json::Map::new();
    section.insert("n_max".into(), json!(config.n));
    match parity {
        Ok(p) => {
            section.insert("even".into(), json!(p.even));
            section.insert("odd".into(), json!(p.odd));
            section.insert("converged".into(), json!(p.converged));
            section.insert("skipped_indices".into(), json!(p.skipped));
        }
        Err(e) => {
            section.insert("parity_error".into(), json!(e.to_string()));
        }
    }
    match two_step {
        Ok(v) => {
            section.insert("two_step".into(), json!(v));
        }
        Err(e) => {
            section.insert("two_step_error".into(), json!(e.to_string()));
        }
    }
    match gamma_sq {
        Ok(v) => {
            section.insert("gamma_squared".into(), json!(v));
        }
        Err(e) => {
            section.insert("gamma_squared_error".into(), json!(e.to_string()));
        }
    }
    report
        .as_object_mut()
        .unwrap()
        .insert("empirical".into(), Value::Object(section));
    Ok(report)
}

fn cmd_terms(
    spec_args: &SpecArgs,
    initial: &InitialArgs,
    config: &ConfigArgs,
) -> Result<(), Failure> {
    let backend = pick_backend(config, &spec_inputs(spec_args, initial));
    let (roots, _) = resolve_roots(spec_args, backend)?;
    let u0 = scalar(&initial.u0, backend)?;
    let u1 = scalar(&initial.u1, backend)?;
    let u2 = scalar(&initial.u2, backend)?;
    let spec = make_degenerate_spec(&roots, u0, u1, u2);
    let terms = iterate_terms(&spec, config.n);
    emit_terms(&terms.values, terms.overflowed, config.format);
    Ok(())
}

fn emit_terms(values: &[Scalar], overflowed: bool, format: Format) {
    match format {
        Format::Json => {
            let doc = json!({
                "terms": values,
                "overflowed": overflowed,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        Format::Csv => {
            println!("n,value");
            for (n, v) in values.iter().enumerate() {
                println!("{n},{v}");
            }
        }
        Format::Table => {
            let width = values.iter().map(|v| v.render().len()).max().unwrap_or(1);
            for (n, v) in values.iter().enumerate() {
                println!("U_{n:<4} {:>width$}", v.render());
            }
        }
    }
}

fn cmd_fix(
    lambda2: &str,
    lambda3: &str,
    u0: &str,
    u1: &str,
    config: &ConfigArgs,
) -> Result<(), Failure> {
    let backend = pick_backend(config, &[lambda2, lambda3, u0, u1]);
    let l2 = scalar(lambda2, backend)?;
    let l3 = scalar(lambda3, backend)?;
    let roots = DegenerateRoots::new(l2, l3)
        .map_err(|e| Failure::new(EXIT_CLASSIFICATION, e.to_string()))?;
    let u0 = scalar(u0, backend)?;
    let u1 = scalar(u1, backend)?;

    let sols = u2_solutions(&roots, &u0, &u1);
    let limit_of = |u2: &Scalar| converged_limit(&roots, &u0, &u1, u2);
    let doc = json!({
        "u2_first": sols.u2_first,
        "first_limit": limit_of(&sols.u2_first),
        "u2_second": sols.u2_second,
        "second_limit": limit_of(&sols.u2_second),
        "coincident": sols.coincident,
        "limit_values": {
            "minus_lambda3": -roots.lambda3(),
            "plus_lambda3": roots.lambda3(),
            "lambda2": roots.lambda2(),
        },
    });
    emit(&doc, config.format);
    Ok(())
}

fn cmd_fit(file: Option<&str>, config: &ConfigArgs) -> Result<(), Failure> {
    let raw = match file {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_MALFORMED, format!("cannot read {path}: {e}")))?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Failure::new(EXIT_MALFORMED, e.to_string()))?;
            buf
        }
    };
    let tokens: Vec<&str> = raw
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.len() < 6 {
        return Err(Failure::new(
            EXIT_MALFORMED,
            format!("need at least 6 terms, got {}", tokens.len()),
        ));
    }
    let backend = pick_backend(config, &tokens);
    let terms: Vec<Scalar> = tokens
        .iter()
        .map(|t| scalar(t, backend))
        .collect::<Result<_, _>>()?;

    let (a1, a2, a3) = fit_coefficients(&terms).map_err(|e| match e {
        RecurrenceError::TooFewTerms(n) => {
            Failure::new(EXIT_MALFORMED, format!("need at least 6 terms, got {n}"))
        }
        other => Failure::new(EXIT_FIT, other.to_string()),
    })?;

    let class = classify(&a1, &a2, &a3);
    let fitted = json!({ "a1": a1, "a2": a2, "a3": a3 });
    let doc = match (&class.tag, &class.roots) {
        (ClassTag::Degenerated | ClassTag::DegeneratedReducedOrder, Some(roots)) => {
            let mut report = analyze_report(
                roots,
                &terms[0],
                &terms[1],
                &terms[2],
                serde_json::to_value(&class).unwrap(),
            );
            report
                .as_object_mut()
                .unwrap()
                .insert("fitted_coefficients".into(), fitted);
            report
        }
        _ => json!({
            "fitted_coefficients": fitted,
            "classification": serde_json::to_value(&class).unwrap(),
        }),
    };
    emit(&doc, config.format);
    Ok(())
}

fn emit(doc: &Value, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(doc).unwrap()),
        Format::Csv => {
            println!("key,value");
            for (k, v) in flatten(doc) {
                println!("{k},{v}");
            }
        }
        Format::Table => {
            let rows = flatten(doc);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(1);
            for (k, v) in rows {
                println!("{k:<width$}  {v}");
            }
        }
    }
}

fn flatten(doc: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            Value::Array(items) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), v, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", doc, &mut out);
    out
}
