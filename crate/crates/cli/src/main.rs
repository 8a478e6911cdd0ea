use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use orbifold_core::fock::{project_pm, theta};
use orbifold_core::linalg::{format_rational, parse_rational};
use orbifold_core::module::GradedModule;
use orbifold_core::modes::{apply_alpha, apply_mode, virasoro};
use orbifold_core::orbifold::{
    catalogue_module, composite_counterexample, decompose, default_stability_ops, is_prime,
    lemma4_check, table1, JordanInsertion,
};
use orbifold_core::suites::{character, run_suite, SuiteConfig};
use orbifold_core::{EngineError, LatticeParams, ModeIndex, Rational, Sector, Sign, State, VoaElement};

#[derive(Parser, Debug)]
#[command(name = "vlplus", version, about = "Exact computations in V_L and its orbifold V_L^+")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Half the squared norm of the lattice generator: <α, α> = 2k.
    #[arg(long, global = true, default_value_t = 3)]
    k: u32,
    /// Weight cap for sampling and truncations (a rational).
    #[arg(long, global = true, default_value = "6")]
    max_weight: String,
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest weights of the catalogue modules.
    Table1,
    /// Run a verification suite.
    Verify {
        #[arg(long)]
        suite: String,
    },
    /// Distinctness and integer-gap checks on the lowest weights.
    Weights,
    /// Generalized L(0) decomposition of a direct sum described in a JSON file.
    Decompose { file: PathBuf },
    /// Graded dimensions, counted directly and through the trace of theta.
    Character {
        #[arg(long, default_value = "untwisted:0")]
        sector: String,
        /// plus, minus or none
        #[arg(long, default_value = "plus")]
        sign: String,
    },
    /// Apply an operator such as L(-2), alpha(-1/2), E(0), e[1](-3), theta
    /// or project+ to a serialized state ("-" reads stdin).
    Mode {
        #[arg(long)]
        op: String,
        state: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Check(Output),
}

struct Output {
    text: String,
    json: Value,
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (out, code) = match run(&cli) {
        Ok(o) => (o, 0),
        Err(Failure::Check(o)) => (o, 1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let rendered = match cli.format {
        Format::Text => out.text,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).expect("json");
            s.push('\n');
            s
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, rendered),
        None => io::stdout().write_all(rendered.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let params = LatticeParams::new(cli.k)?;
    let max_weight = parse_rational(&cli.max_weight)?;
    if max_weight < Rational::from_integer(0.into()) {
        return Err(Failure::Usage("--max-weight must be non-negative".into()));
    }
    match &cli.command {
        Command::Table1 => cmd_table1(cli.k),
        Command::Verify { suite } => {
            let cfg = SuiteConfig {
                k: cli.k,
                max_weight: max_weight.floor().to_integer().try_into().unwrap_or(i64::MAX),
                samples: cli.samples,
                seed: cli.seed,
            };
            let report = run_suite(suite, &cfg)?;
            let out = Output {
                text: report.render_text(),
                json: report.to_json(),
            };
            if report.passed() {
                Ok(out)
            } else {
                Err(Failure::Check(out))
            }
        }
        Command::Weights => cmd_weights(cli.k),
        Command::Decompose { file } => cmd_decompose(params, &max_weight, file),
        Command::Character { sector, sign } => cmd_character(cli.k, sector, sign, &max_weight),
        Command::Mode { op, state } => cmd_mode(params, op, state),
    }
}

fn cmd_table1(k: u32) -> Result<Output, Failure> {
    let t = table1(k)?;
    Ok(Output {
        text: t.render_text(),
        json: t.to_json(),
    })
}

fn cmd_weights(k: u32) -> Result<Output, Failure> {
    let report = lemma4_check(k)?;
    let mut json = report.to_json();
    json["prime"] = json!(is_prime(k));
    let mut text = format!(
        "k = {k} ({})\ndistinct = {}\nall nonzero gaps = {}\n",
        if is_prime(k) { "prime" } else { "composite" },
        report.distinct,
        report.all_nonzero_gaps()
    );
    for (l, ok) in &report.gap_condition {
        text.push_str(&format!("  gap at {:>6}: {}\n", format_rational(l), if *ok { "holds" } else { "fails" }));
    }
    if !is_prime(k) {
        let (r, s, n) = composite_counterexample(k)?;
        json["counterexample"] = json!({"r": r, "s": s, "n": n});
        text.push_str(&format!("counterexample (r, s, n) = ({r}, {s}, {n})\n"));
    }
    Ok(Output { text, json })
}

fn parse_sum_spec(v: &Value) -> Result<(Vec<(String, usize)>, Option<JordanInsertion>), Failure> {
    let bad = |m: &str| Failure::Usage(format!("malformed module description: {m}"));
    let items = v.as_array().ok_or_else(|| bad("expected a JSON list"))?;
    let mut modules = Vec::new();
    let mut jordan = None;
    for item in items {
        if let Some(j) = item.get("jordan") {
            let degree = j.get("degree").and_then(Value::as_u64).ok_or_else(|| bad("jordan.degree"))?;
            let lambda = match j.get("lambda") {
                Some(Value::String(s)) => parse_rational(s)?,
                Some(Value::Number(n)) => parse_rational(&n.to_string())?,
                _ => return Err(bad("jordan.lambda")),
            };
            jordan = Some(JordanInsertion {
                degree: degree as u32,
                lambda,
            });
        } else {
            let name = item.get("module").and_then(Value::as_str).ok_or_else(|| bad("module"))?;
            let mult = match item.get("mult") {
                None => 1,
                Some(m) => m.as_u64().ok_or_else(|| bad("mult"))? as usize,
            };
            modules.push((name.to_string(), mult));
        }
    }
    if modules.iter().all(|(_, m)| *m == 0) {
        return Err(bad("no modules"));
    }
    Ok((modules, jordan))
}

fn cmd_decompose(p: LatticeParams, max_weight: &Rational, file: &PathBuf) -> Result<Output, Failure> {
    let raw = fs::read_to_string(file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    let spec: Value = serde_json::from_str(&raw).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    let (entries, jordan) = parse_sum_spec(&spec)?;
    let mut summands = Vec::new();
    for (name, mult) in &entries {
        for _ in 0..*mult {
            let probe = catalogue_module(p, name, 0)?;
            let degree = (max_weight * Rational::from_integer(probe.grading_denominator().into()))
                .floor()
                .to_integer();
            let degree: u32 = degree.try_into().map_err(|_| Failure::Usage("--max-weight too large".into()))?;
            summands.push(catalogue_module(p, name, degree)?);
        }
    }
    let m = GradedModule::new(summands)?;
    let candidates = table1(p.k())?.values();
    let d = decompose(&m, &candidates, jordan.as_ref(), &default_stability_ops(p)?)?;
    let mut json = d.to_json();
    json["summands"] = json!(entries.iter().map(|(n, m)| json!({"module": n, "mult": m})).collect::<Vec<_>>());
    json["k"] = json!(p.k());
    let mut text = format!("grading denominator T = {}\n", d.grading_denominator);
    for f in &d.families {
        text.push_str(&format!(
            "family λ = {:>6}: dims {:?}{}\n",
            format_rational(&f.lambda),
            f.dims(),
            if f.diagonalizable { "" } else { " (non-semisimple L(0))" }
        ));
    }
    text.push_str(&format!(
        "residual dim = {}\nmode-stability checks = {} (failures {}, twisted skips {}, overflow skips {})\n",
        d.residual_dim(),
        d.stability.checks,
        d.stability.failures.len(),
        d.stability.skipped_twisted,
        d.stability.skipped_overflow
    ));
    let out = Output { text, json };
    if d.passed() {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}

fn parse_sign(s: &str) -> Result<Option<Sign>, Failure> {
    match s {
        "plus" | "+" => Ok(Some(Sign::Plus)),
        "minus" | "-" => Ok(Some(Sign::Minus)),
        "none" => Ok(None),
        other => Err(Failure::Usage(format!("unknown sign {other:?}; use plus, minus or none"))),
    }
}

fn cmd_character(k: u32, sector: &str, sign: &str, max_weight: &Rational) -> Result<Output, Failure> {
    let sector = Sector::parse(sector)?;
    let sign = parse_sign(sign)?;
    let r = character(k, sector, sign, max_weight)?;
    let mut text = format!(
        "{} theta={}\n",
        sector,
        sign.map_or("none", Sign::symbol)
    );
    for (w, a, b) in &r.rows {
        text.push_str(&format!("{:>8}  {a}  {b}\n", format_rational(w)));
    }
    let out = Output { text, json: r.to_json() };
    if r.agrees() {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}

/// Splits `name(arg)` or `name[arg](arg)`.
fn parse_call(op: &str) -> Option<(&str, Option<&str>, &str)> {
    let op = op.trim();
    let open = op.rfind('(')?;
    let arg = op[open + 1..].strip_suffix(')')?;
    let head = &op[..open];
    match head.find('[') {
        Some(b) => Some((&head[..b], Some(head[b + 1..].strip_suffix(']')?), arg)),
        None => Some((head, None, arg)),
    }
}

fn apply_op(p: LatticeParams, op: &str, s: &State) -> Result<State, Failure> {
    match op.trim() {
        "theta" => return Ok(theta(s)),
        "project+" => return Ok(project_pm(s, Sign::Plus)?),
        "project-" => return Ok(project_pm(s, Sign::Minus)?),
        _ => {}
    }
    let bad = || Failure::Usage(format!("cannot parse operator {op:?}"));
    let (name, label, arg) = parse_call(op).ok_or_else(bad)?;
    if name == "alpha" {
        let idx = match arg.split_once('/') {
            Some((num, "2")) => ModeIndex::half(num.trim().parse().map_err(|_| bad())?)?,
            None => ModeIndex::Integer(arg.trim().parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        return Ok(apply_alpha(idx, s)?);
    }
    let n: i64 = arg.trim().parse().map_err(|_| bad())?;
    let a = match (name, label) {
        ("L", None) => return Ok(virasoro(n, s)?),
        ("E", None) => VoaElement::e_plus(p),
        ("F", None) => VoaElement::f_minus(p),
        ("omega", None) => VoaElement::omega(p),
        ("e", Some(m)) => VoaElement::lattice(p, m.trim().parse().map_err(|_| bad())?),
        _ => return Err(bad()),
    };
    Ok(apply_mode(&a, n, s)?)
}

fn cmd_mode(p: LatticeParams, op: &str, path: &PathBuf) -> Result<Output, Failure> {
    let mut raw = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut raw).map_err(|e| Failure::Usage(e.to_string()))?;
    } else {
        raw = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let v: Value = serde_json::from_str(&raw).map_err(|e| Failure::Usage(e.to_string()))?;
    let s = State::from_json(p, &v)?;
    let r = apply_op(p, op, &s)?;
    Ok(Output {
        text: format!("{r:?}\n"),
        json: r.to_json(),
    })
}
