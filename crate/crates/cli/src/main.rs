use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use armlin::bruno::BrunoDiagnostics;
use armlin::linearizer::majorant_constant;
use armlin::multi_index::parse_index_list;
use armlin::verify::{parse_checks, run_checks, CheckOutcome, SweepLimits};
use armlin::{
    enumerate_forests, linearize_recursive, linearize_tree, Error, ForestFilter, LoadedSpec,
    ProblemSpec, ProblemSpecFile, Scalar, SeriesTuple, VanishingOracle,
};

const EXIT_PARSE: u8 = 2;
const EXIT_RESONANCE: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

/// Agreement required between the two solvers in float mode.
const FLOAT_DISCREPANCY_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "armlin", version, about = "Tree-expansion linearization of analytic germs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tree,
    Recursive,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the linearizing map of a problem file.
    Linearize {
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "tree")]
        method: MethodArg,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Small-divisor diagnostics and the Bruno bound.
    Bruno {
        spec: PathBuf,
        #[arg(long, default_value_t = 20)]
        kmax: u32,
        /// Also write the per-k table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Polydisc radius on which `a` is bounded.
        #[arg(long)]
        b: Option<f64>,
        /// Bound for `a` on that polydisc; estimated from coefficients when omitted.
        #[arg(long = "M")]
        m: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run invariant suites and print a pass/fail table.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value = "all")]
        checks: String,
        /// Candidate `h` for the residual check (a linearize output or bare series tuple).
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long, default_value_t = SweepLimits::default().operator_weight)]
        operator_weight: u32,
        #[arg(long, default_value_t = SweepLimits::default().estimate_weight)]
        estimate_weight: u32,
        #[arg(long, default_value_t = SweepLimits::default().counting_kmax)]
        counting_kmax: u32,
    },
    /// Enumerate decorated forests up to a weight.
    Forests {
        #[arg(long)]
        dim: usize,
        /// Inline list such as "(1) (2,-1)" or a file containing one.
        #[arg(long)]
        decorations: String,
        #[arg(long)]
        weight: u32,
        #[arg(long, default_value = "all")]
        filter: String,
        #[arg(long)]
        count_only: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resonance { .. } => EXIT_RESONANCE,
            _ => EXIT_PARSE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let outcome = match cli.command {
        Command::Linearize { spec, method, out } => cmd_linearize(&spec, method, out.as_deref()),
        Command::Bruno {
            spec,
            kmax,
            csv,
            b,
            m,
            out,
        } => cmd_bruno(&spec, kmax, csv.as_deref(), b, m, out.as_deref()),
        Command::Verify {
            spec,
            checks,
            h,
            operator_weight,
            estimate_weight,
            counting_kmax,
        } => cmd_verify(
            &spec,
            &checks,
            h.as_deref(),
            SweepLimits {
                operator_weight,
                estimate_weight,
                counting_kmax,
            },
        ),
        Command::Forests {
            dim,
            decorations,
            weight,
            filter,
            count_only,
        } => cmd_forests(dim, &decorations, weight, &filter, count_only),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> CliResult {
    let Ok(raw) = std::env::var("ARMLIN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| fail(EXIT_PARSE, format!("ARMLIN_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| fail(EXIT_PARSE, e.to_string()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<LoadedSpec, Failure> {
    let text = read_text(path)?;
    let file = ProblemSpecFile::from_json_str(&text)
        .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    Ok(file.load()?)
}

fn emit(out: Option<&Path>, value: &Value) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| fail(EXIT_PARSE, e.to_string())),
    }
}

fn max_discrepancy<C: Scalar>(a: &SeriesTuple<C>, b: &SeriesTuple<C>) -> Result<f64, Failure> {
    Ok(a.sub(b)?.max_modulus())
}

/// The result JSON, plus a message when the two solvers disagree.
fn linearize_value<C: Scalar>(
    spec: &ProblemSpec<C>,
    method: MethodArg,
) -> Result<(Value, Option<String>), Failure> {
    match method {
        MethodArg::Tree => Ok((linearize_tree(spec)?.to_json(), None)),
        MethodArg::Recursive => Ok((linearize_recursive(spec)?.to_json(), None)),
        MethodArg::Both => {
            let tree = linearize_tree(spec)?;
            let rec = linearize_recursive(spec)?;
            let gap = max_discrepancy(&tree.h, &rec.h)?;
            let agree = if C::EXACT { gap == 0.0 } else { gap <= FLOAT_DISCREPANCY_TOL * (1.0 + tree.h.max_modulus()) };
            let mut v = tree.to_json();
            v["method"] = json!("both");
            v["max_discrepancy"] = json!(gap);
            v["recursive_diagnostics"] = rec.to_json()["diagnostics"].clone();
            let mismatch = (!agree).then(|| format!("tree and recursive solutions differ by {gap:e}"));
            Ok((v, mismatch))
        }
    }
}

fn cmd_linearize(path: &Path, method: MethodArg, out: Option<&Path>) -> CliResult {
    let spec = load_spec(path)?;
    let (mut v, mismatch) = match &spec {
        LoadedSpec::Rational(s) => linearize_value(s, method)?,
        LoadedSpec::Float(s) => linearize_value(s, method)?,
    };
    v["mode"] = json!(spec.mode());
    emit(out, &v)?;
    match mismatch {
        Some(msg) => Err(fail(EXIT_INVARIANT, msg)),
        None => Ok(()),
    }
}

fn cmd_bruno(
    path: &Path,
    kmax: u32,
    csv_path: Option<&Path>,
    b: Option<f64>,
    m: Option<f64>,
    out: Option<&Path>,
) -> CliResult {
    if kmax == 0 {
        return Err(fail(EXIT_PARSE, "--kmax must be ≥ 1"));
    }
    let spec = load_spec(path)?.to_float();
    let mut diag = BrunoDiagnostics::compute(spec.spectrum(), kmax)?;
    match (b, m) {
        (Some(b), Some(m)) => diag = diag.with_radius(b, m)?,
        (Some(b), None) => {
            let m = majorant_constant(spec.nonlinear(), b)?;
            diag = diag.with_radius(b, m)?;
        }
        (None, Some(_)) => return Err(fail(EXIT_PARSE, "--M requires --b")),
        (None, None) => {}
    }
    if let Some(p) = csv_path {
        write_csv(p, &diag).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", p.display())))?;
    }
    let v = serde_json::to_value(&diag).map_err(|e| fail(EXIT_PARSE, e.to_string()))?;
    emit(out, &v)
}

fn write_csv(path: &Path, diag: &BrunoDiagnostics) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "omega", "alpha", "epsilon", "partial_sum"])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for (k, omega, alpha, eps, partial) in diag.table() {
        w.write_record([
            k.to_string(),
            omega.to_string(),
            opt(alpha),
            opt(eps),
            partial.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn read_h<C: Scalar>(path: &Path) -> Result<SeriesTuple<C>, Failure> {
    let text = read_text(path)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let tuple = v.get("h").unwrap_or(&v);
    SeriesTuple::from_json(tuple).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn verify_with<C: Scalar>(
    spec: &ProblemSpec<C>,
    checks: &str,
    h_path: Option<&Path>,
    limits: SweepLimits,
) -> Result<Vec<CheckOutcome>, Failure> {
    let checks = parse_checks(checks)?;
    let h = h_path.map(read_h::<C>).transpose()?;
    if let Some(h) = &h {
        if h.dim() != spec.dim() || h.cap() != spec.cap() {
            return Err(fail(
                EXIT_PARSE,
                format!(
                    "h has dimension {} and cap {}, the problem has {} and {}",
                    h.dim(),
                    h.cap(),
                    spec.dim(),
                    spec.cap()
                ),
            ));
        }
    }
    Ok(run_checks(spec, &checks, h.as_ref(), limits)?)
}

fn cmd_verify(path: &Path, checks: &str, h: Option<&Path>, limits: SweepLimits) -> CliResult {
    let spec = load_spec(path)?;
    let outcomes = match &spec {
        LoadedSpec::Rational(s) => verify_with(s, checks, h, limits)?,
        LoadedSpec::Float(s) => verify_with(s, checks, h, limits)?,
    };
    let mut table = String::new();
    table.push_str(&format!("{:<20} {:>7} {:>10}  {:<6} {}\n", "check", "cases", "violations", "result", "detail"));
    for o in &outcomes {
        table.push_str(&format!(
            "{:<20} {:>7} {:>10}  {:<6} {}\n",
            o.check,
            o.cases,
            o.violations,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        ));
    }
    print!("{table}");
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.check.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(fail(EXIT_INVARIANT, format!("failed: {}", failed.join(", "))))
    }
}

fn cmd_forests(dim: usize, decorations: &str, weight: u32, filter: &str, count_only: bool) -> CliResult {
    let text = if Path::new(decorations).is_file() {
        read_text(Path::new(decorations))?
    } else {
        decorations.to_string()
    };
    let decos = parse_index_list(&text)?;
    if let Some(bad) = decos.iter().find(|n| n.dim() != dim) {
        return Err(fail(EXIT_PARSE, format!("decoration {bad} does not have dimension {dim}")));
    }
    let filter: ForestFilter = filter.parse()?;
    let forests = match filter {
        ForestFilter::NvCandidates => VanishingOracle::new(dim).enumerate(&decos, weight)?,
        other => enumerate_forests(&decos, weight, other)?,
    };
    let mut stdout = io::stdout().lock();
    let result = if count_only {
        writeln!(stdout, "{}", forests.len())
    } else {
        forests.iter().try_for_each(|f| writeln!(stdout, "{f}"))
    };
    result.map_err(|e| fail(EXIT_PARSE, e.to_string()))
}
