//! `ppclab`: generate sequences, measure pair correlations and gaps, evaluate
//! the moment oracles and run the acceptance suite.
//!
//! Exit status: 0 on success, 1 on a validation error, 2 on a usage error.

mod parse;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ppclab::construction::ConfigFile;
use ppclab::generators::{kronecker_fixed, GOLDEN_FRACTION};
use ppclab::io::{fmt_f64, read_sequence, write_sequence};
use ppclab::pair_correlation::write_curve_csv;
use ppclab::{
    acceptance, block_index, construct_sequence, derive_ab_with_blocks, equispaced, gap_profile,
    gap_series, iid_uniform, kronecker, mc_moments, pc_curve, validate_config, ConstructionConfig,
    MomentReport, Predicate, QSpec, ScalingKind, SequenceRecord,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] ppclab::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(ppclab::Error::Usage(_)) => 2,
            _ => 1,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "ppclab", version, about = "Poissonian pair correlation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a point sequence
    Generate(GenerateArgs),
    /// Pair-correlation statistic F_N(s) over an s grid
    Ppc(PpcArgs),
    /// Gap profiles at checkpoints
    Gaps(GapsArgs),
    /// Exact moments of F_N(s) for the random component of the construction
    Oracle(OracleArgs),
    /// Monte Carlo moments next to the exact ones
    Mc(McArgs),
    /// Run the acceptance suite
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Equispaced,
    Kronecker,
    Iid,
    Construction,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scaling {
    Identity,
    PlusSqrt,
    MinusSqrt,
}

impl Scaling {
    fn kind(self) -> ScalingKind {
        match self {
            Scaling::Identity => ScalingKind::Identity,
            Scaling::PlusSqrt => ScalingKind::PlusSqrt,
            Scaling::MinusSqrt => ScalingKind::MinusSqrt,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Scaling::Identity => "identity",
            Scaling::PlusSqrt => "plus-sqrt",
            Scaling::MinusSqrt => "minus-sqrt",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Pred {
    Strict,
    Nonstrict,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Schedule of the construction: a `q` spec or explicit `a`/`b` tables.
#[derive(Args)]
struct ScheduleArgs {
    /// `builtin:logn`, `builtin:linear`, `builtin:half` or a JSON config file
    #[arg(long, value_name = "SPEC", conflicts_with_all = ["a", "b"])]
    q_spec: Option<String>,
    /// File with the table a(1), a(2), ...
    #[arg(long, value_name = "FILE", requires = "b")]
    a: Option<PathBuf>,
    /// File with the table b(1), b(2), ...
    #[arg(long, value_name = "FILE", requires = "a")]
    b: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Rotation for kronecker: `golden` or a decimal
    #[arg(long, default_value = "golden")]
    alpha: String,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PpcArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Prefix length (the whole file if omitted)
    #[arg(long)]
    n: Option<usize>,
    /// start:stop:step
    #[arg(long, conflicts_with = "s")]
    s_grid: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, value_enum, default_value = "identity")]
    scaling: Scaling,
    /// Defaults to strict for identity scaling, non-strict otherwise
    #[arg(long, value_enum)]
    predicate: Option<Pred>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GapsArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Comma-separated prefix lengths (the whole file if omitted)
    #[arg(long)]
    checkpoints: Option<String>,
    /// Dedup tolerance for binary64 gaps (dyadic gaps are always exact)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n: u64,
    /// start:stop:step
    #[arg(long, conflicts_with = "s")]
    s_grid: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, value_enum, default_value = "identity")]
    scaling: Scaling,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    s: f64,
    #[arg(long, value_enum, default_value = "identity")]
    scaling: Scaling,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ppclab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Ppc(a) => ppc(a),
        Command::Gaps(a) => gaps(a),
        Command::Oracle(a) => oracle(a),
        Command::Mc(a) => mc(a),
        Command::Verify => verify(),
    }
}

fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> CliResult<SequenceRecord> {
    let f = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(read_sequence(BufReader::new(f))?)
}

fn require_seed(seed: Option<u64>, what: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Usage(format!("{what} is randomized and needs --seed")))
}

/// The effective configuration, printed to stderr so that stdout stays data.
fn effective(fields: &[(&str, String)]) {
    let line: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!("# effective-config {}", line.join(" "));
}

/// Resolves the schedule flags into a config covering `1..=n` with at least
/// `min_blocks` levels, together with a seed stored in a config file, if any.
fn schedule(
    args: &ScheduleArgs,
    n: u64,
    min_blocks: usize,
) -> CliResult<(ConstructionConfig, Option<u64>)> {
    let len = n.max(64) as usize;
    let derived = |q: QSpec| derive_ab_with_blocks(&q, n, min_blocks);
    let (config, file_seed) = match (&args.q_spec, &args.a, &args.b) {
        (_, Some(a), Some(b)) => (
            ConstructionConfig::explicit(parse::int_table(a)?, parse::int_table(b)?)?,
            None,
        ),
        (None, _, _) => (derived(QSpec::log(len))?, None),
        (Some(spec), _, _) => match spec.as_str() {
            "builtin:logn" => (derived(QSpec::log(len))?, None),
            "builtin:linear" => (derived(QSpec::linear(len))?, None),
            "builtin:half" => {
                let mut m = min_blocks.max(1);
                while ConstructionConfig::half(m).block_end(m)? < n {
                    m += 1;
                }
                (ConstructionConfig::half(m), None)
            }
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
                let file = ConfigFile::parse(&text)?;
                (file.schedule_with_blocks(n, min_blocks)?, file.seed)
            }
        },
    };
    let v = validate_config(&config);
    for w in &v.warnings {
        eprintln!("ppclab: warning: {w}");
    }
    if !v.is_constructible() {
        return Err(CliError::Validation(format!(
            "invalid schedule: {}",
            v.messages().join("; ")
        )));
    }
    for m in v.messages() {
        eprintln!("ppclab: warning: {m}");
    }
    Ok((config, file_seed))
}

fn generate(a: GenerateArgs) -> CliResult {
    let (rec, mut fields) = match a.kind {
        Kind::Equispaced => (equispaced(a.n), vec![("kind", "equispaced".to_string())]),
        Kind::Kronecker => {
            let rec = if a.alpha == "golden" {
                kronecker_fixed(GOLDEN_FRACTION, a.n)
            } else {
                let alpha: f64 = a
                    .alpha
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| {
                        CliError::Usage(format!(
                            "--alpha expects `golden` or a decimal, got {:?}",
                            a.alpha
                        ))
                    })?;
                kronecker(alpha, a.n)
            };
            (
                rec,
                vec![
                    ("kind", "kronecker".to_string()),
                    ("alpha", a.alpha.clone()),
                ],
            )
        }
        Kind::Iid => {
            let seed = require_seed(a.seed, "iid")?;
            (
                iid_uniform(a.n, seed),
                vec![("kind", "iid".to_string()), ("seed", seed.to_string())],
            )
        }
        Kind::Construction => {
            let (config, file_seed) = schedule(&a.schedule, a.n.max(1) as u64, 1)?;
            let seed = require_seed(a.seed.or(file_seed), "construction")?;
            let rec = construct_sequence(a.n, &config, seed)?;
            let fields = vec![
                ("kind", "construction".to_string()),
                ("seed", seed.to_string()),
                ("m_max", config.m_max().to_string()),
                ("digest", config.digest()),
            ];
            (rec, fields)
        }
    };
    fields.insert(1, ("n", a.n.to_string()));
    effective(&fields);
    write_sequence(sink(a.out.as_deref())?, &rec)?;
    Ok(())
}

fn s_values(grid: Option<&str>, s: Option<f64>) -> CliResult<Vec<f64>> {
    match (grid, s) {
        (Some(g), _) => parse::s_grid(g),
        (None, Some(s)) => Ok(vec![s]),
        (None, None) => Err(CliError::Usage("one of --s or --s-grid is required".into())),
    }
}

fn ppc(a: PpcArgs) -> CliResult {
    let rec = load(&a.input)?;
    let n = a.n.unwrap_or(rec.len());
    let grid = s_values(a.s_grid.as_deref(), a.s)?;
    let scaling = a.scaling.kind();
    let pred = match a.predicate {
        Some(Pred::Strict) => Predicate::Strict,
        Some(Pred::Nonstrict) => Predicate::NonStrict,
        None => scaling.default_predicate(),
    };
    effective(&[
        ("n", n.to_string()),
        ("scaling", a.scaling.label().into()),
        ("predicate", format!("{pred:?}").to_lowercase()),
        ("points", grid.len().to_string()),
    ]);
    let curve = pc_curve(&rec, n, &grid, &scaling, pred)?;
    let mut w = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => write_curve_csv(w, &curve)?,
        Format::Json => {
            let rows: Vec<Value> = curve
                .iter()
                .map(|&(s, f)| json!({ "s": s, "F": f }))
                .collect();
            let doc = json!({
                "N": n,
                "scaling": a.scaling.label(),
                "predicate": format!("{pred:?}").to_lowercase(),
                "curve": rows,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn gaps(a: GapsArgs) -> CliResult {
    let rec = load(&a.input)?;
    let checkpoints = match &a.checkpoints {
        Some(c) => parse::checkpoints(c)?,
        None => vec![rec.len()],
    };
    let tol = match (a.tol, rec.is_exact()) {
        (Some(t), _) => t,
        (None, true) => 0.0,
        (None, false) => ppclab::gaps::DEFAULT_TOL,
    };
    effective(&[
        ("kind", rec.meta().kind.clone()),
        ("checkpoints", checkpoints.len().to_string()),
        ("tol", tol.to_string()),
    ]);
    let mut w = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            writeln!(w, "N,g,max_multiplicity,max_ratio")?;
            for r in gap_series(&rec, &checkpoints, tol)? {
                writeln!(
                    w,
                    "{},{},{},{}",
                    r.n,
                    r.g,
                    r.max_multiplicity,
                    fmt_f64(r.max_ratio)
                )?;
            }
        }
        Format::Json => {
            let profiles: Vec<Value> = checkpoints
                .iter()
                .map(|&n| Ok(gap_profile(&rec, n, tol)?.to_json()))
                .collect::<CliResult<_>>()?;
            writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&Value::Array(profiles)).unwrap()
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn oracle(a: OracleArgs) -> CliResult {
    let grid = s_values(a.s_grid.as_deref(), a.s)?;
    let (config, _) = schedule(&a.schedule, a.n.max(1), block_index(a.n.max(1)))?;
    let scaling = a.scaling.kind();
    effective(&[
        ("n", a.n.to_string()),
        ("scaling", a.scaling.label().into()),
        ("m_max", config.m_max().to_string()),
        ("digest", config.digest()),
    ]);
    let reports: Vec<MomentReport> = grid
        .iter()
        .map(|&s| Ok(MomentReport::exact(a.n, s, &config, &scaling)?))
        .collect::<CliResult<_>>()?;
    let mut w = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => {
            writeln!(w, "s,expectation,variance")?;
            for r in &reports {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt_f64(r.s),
                    fmt_f64(r.expectation_f64()),
                    fmt_f64(r.variance_f64())
                )?;
            }
        }
        Format::Json => {
            let docs: Vec<Value> = reports.iter().map(MomentReport::to_json).collect();
            writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&Value::Array(docs)).unwrap()
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn mc(a: McArgs) -> CliResult {
    let (config, file_seed) = schedule(&a.schedule, a.n.max(1), block_index(a.n.max(1)))?;
    let seed = require_seed(a.seed.or(file_seed), "mc")?;
    effective(&[
        ("n", a.n.to_string()),
        ("s", a.s.to_string()),
        ("scaling", a.scaling.label().into()),
        ("samples", a.samples.to_string()),
        ("seed", seed.to_string()),
        ("digest", config.digest()),
    ]);
    let report = mc_moments(a.n, a.s, &config, &a.scaling.kind(), a.samples, seed)?;
    let mut w = sink(a.out.as_deref())?;
    writeln!(
        w,
        "{}",
        serde_json::to_string_pretty(&report.to_json()).unwrap()
    )?;
    w.flush()?;
    Ok(())
}

fn verify() -> CliResult {
    let outcomes = acceptance::run_all();
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::Validation(format!(
            "{failed} of {} criteria failed",
            outcomes.len()
        )));
    }
    Ok(())
}
