//! `standardness` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 reference check
//! failure.

// `!(x > 0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use standardness::experiments::{
    all_pass, compare_to_reference, run_experiment, sha256_hex, ExperimentReport, ExperimentSpec,
    Table, TOOL_VERSION,
};
use standardness::sampling::STREAM_SCHEME_VERSION;
use standardness::{
    analytic_upsilon, bias_corrected_estimate_with, default_radius, min_ball_fraction, omega_curve,
    Distribution64, EstimatorConfig, MinBallFraction, OracleConfig, SampleCloud64,
};

/// Seed used when `--seed` is not given.
const DEFAULT_SEED: u64 = 7;

#[derive(Parser, Debug)]
#[command(
    name = "standardness",
    version,
    about = "Estimate and study the standardness constant of a sampled law"
)]
struct Cli {
    /// Master seed [default: 7].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate Υ̂ and Υ̃ from a CSV point cloud (one point per row).
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment described by a spec JSON file.
    Simulate(SimulateArgs),
    /// Reproduce a built-in reference table.
    Tables(TablesArgs),
    /// Numeric minimum ball fraction and its gap Ω(r) to the true constant.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct EstimateArgs {
    points: PathBuf,
    /// Expected dimension; defaults to the number of columns.
    #[arg(long)]
    dim: Option<usize>,
    /// Ball radius; defaults to (ln n / n)^(1/(2d)).
    #[arg(long)]
    radius: Option<f64>,
    /// Use O(n²) pair counting instead of the grid.
    #[arg(long)]
    naive: bool,
    /// The first row is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    spec: PathBuf,
}

#[derive(Args, Debug)]
struct TablesArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    table: u8,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    /// Compare against the shipped reference values; exit 3 on disagreement.
    #[arg(long)]
    check: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Distribution as JSON, or `@path` to read it from a file.
    #[arg(long)]
    dist: String,
    #[arg(long, conflicts_with = "radii", required_unless_present = "radii")]
    r: Option<f64>,
    /// Comma-separated, strictly decreasing radii.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Oracle configuration JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// True constant for Ω(r); defaults to the closed form when one exists.
    #[arg(long)]
    upsilon: Option<f64>,
}

enum Failure {
    Runtime(String),
    CheckFailed,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::CheckFailed) => ExitCode::from(3),
    }
}

fn run(cli: &Cli) -> Outcome {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()?;
    match &cli.command {
        Command::Estimate(args) => estimate(cli, args),
        Command::Simulate(args) => simulate(cli, args),
        Command::Tables(args) => tables(cli, args),
        Command::Oracle(args) => oracle(cli, args),
    }
}

fn provenance(seed: u64, spec_hash: &str) {
    eprintln!("# seed: {seed}");
    eprintln!("# version: {TOOL_VERSION}");
    eprintln!("# spec_hash: {spec_hash}");
    eprintln!("# stream_scheme: {STREAM_SCHEME_VERSION}");
}

fn emit(cli: &Cli, text: &str) -> Outcome {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(cli: &Cli, value: &Value) -> Outcome {
    emit(cli, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn emit_report(cli: &Cli, report: &ExperimentReport) -> Outcome {
    match cli.format {
        Format::Json => emit_json(cli, &serde_json::to_value(report)?),
        Format::Csv => emit(cli, &report.to_csv()?),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn read_cloud(bytes: &[u8], header: bool, dim: Option<usize>) -> Result<SampleCloud64, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let point = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| format!("row {}: `{f}`: {e}", row + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(d) = dim {
            if point.len() != d {
                return Err(Failure::Runtime(format!(
                    "row {}: expected {d} columns, got {}",
                    row + 1,
                    point.len()
                )));
            }
        }
        points.push(point);
    }
    Ok(SampleCloud64::new(points)?)
}

fn estimate(cli: &Cli, args: &EstimateArgs) -> Outcome {
    let bytes = read(&args.points)?;
    provenance(cli.seed.unwrap_or(DEFAULT_SEED), &sha256_hex(&bytes));
    let cloud = read_cloud(&bytes, args.header, args.dim)?;
    let r = match args.radius {
        Some(r) => r,
        None if cloud.len() < 2 => {
            return Err(Failure::Runtime(
                "fewer than two points: pass --radius".into(),
            ))
        }
        None => default_radius(cloud.len(), cloud.dim())?,
    };
    let config = EstimatorConfig {
        naive: args.naive,
        ..Default::default()
    };
    let est = bias_corrected_estimate_with(&cloud, r, &config)?;
    match cli.format {
        Format::Json => emit_json(
            cli,
            &json!({
                "n": est.n,
                "d": est.d,
                "r": est.r,
                "upsilon_hat": est.upsilon_hat,
                "upsilon_tilde": est.upsilon_tilde,
                "a_count": est.a_count,
            }),
        ),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "d", "r", "upsilon_hat", "upsilon_tilde", "a_count"])?;
            w.serialize((
                est.n,
                est.d,
                est.r,
                est.upsilon_hat,
                est.upsilon_tilde,
                est.a_count,
            ))?;
            emit(
                cli,
                &String::from_utf8(w.into_inner().map_err(|e| e.to_string())?)?,
            )
        }
    }
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Outcome {
    let mut spec: ExperimentSpec = serde_json::from_slice(&read(&args.spec)?)?;
    if let Some(seed) = cli.seed {
        spec.master_seed = seed;
    }
    spec.parallelism = cli.threads;
    provenance(spec.master_seed, &spec.hash());
    let report = run_experiment(&spec)?;
    emit_report(cli, &report)
}

fn tables(cli: &Cli, args: &TablesArgs) -> Outcome {
    let table = Table::from_number(args.table)?;
    let spec = table.spec(args.reps, cli.seed.unwrap_or(DEFAULT_SEED), cli.threads);
    provenance(spec.master_seed, &spec.hash());
    let report = run_experiment(&spec)?;
    emit_report(cli, &report)?;
    if !args.check {
        return Ok(());
    }
    let tolerance = table.tolerance(args.reps);
    let verdicts = compare_to_reference(&report, &table.reference(), tolerance)?;
    for v in &verdicts {
        eprintln!(
            "{} {} n={} {:?}: observed {:.4} reference {:.4} |Δ| {:.4} (tol {})",
            if v.pass { "PASS" } else { "FAIL" },
            v.dist_id,
            v.n,
            v.estimator,
            v.observed_mean,
            v.reference_mean,
            v.deviation(),
            v.tolerance
        );
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    eprintln!(
        "{passed}/{} reference entries within tolerance",
        verdicts.len()
    );
    if all_pass(&verdicts) {
        Ok(())
    } else {
        Err(Failure::CheckFailed)
    }
}

fn oracle(cli: &Cli, args: &OracleArgs) -> Outcome {
    let dist_text = match args.dist.strip_prefix('@') {
        Some(path) => String::from_utf8(read(Path::new(path))?)?,
        None => args.dist.clone(),
    };
    let dist: Distribution64 = serde_json::from_str(&dist_text)?;
    let mut config: OracleConfig = match &args.config {
        Some(path) => serde_json::from_slice(&read(path)?)?,
        None => OracleConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    let radii = match (&args.radii, args.r) {
        (Some(radii), _) => radii.clone(),
        (None, Some(r)) => vec![r],
        (None, None) => unreachable!("clap requires --r or --radii"),
    };
    let canonical = json!({ "dist": dist, "radii": radii, "config": config });
    provenance(config.seed, &sha256_hex(canonical.to_string().as_bytes()));

    let truth = args.upsilon.or_else(|| analytic_upsilon(&dist));
    let (points, slope): (Vec<Value>, Option<f64>) = match truth {
        Some(u) => {
            let curve = omega_curve(&dist, &radii, u, &config)?;
            let points = curve.fractions.iter().zip(&radii).zip(&curve.omega_values);
            (
                points
                    .map(|((m, &r), &o)| point_json(r, m, Some(o)))
                    .collect(),
                curve.slope,
            )
        }
        None => {
            if radii.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Failure::Runtime("radii must be strictly decreasing".into()));
            }
            let mut points = Vec::with_capacity(radii.len());
            for &r in &radii {
                points.push(point_json(r, &min_ball_fraction(&dist, r, &config)?, None));
            }
            (points, None)
        }
    };
    let last = points.last().cloned().unwrap_or(Value::Null);
    let out = json!({
        "value": last["value"],
        "argmin": last["argmin"],
        "omega": last["omega"],
        "slope": slope,
        "upsilon_true": truth,
        "points": points,
        "argmin_local_minimum_hypothesis": "unverified",
    });
    match cli.format {
        Format::Json => emit_json(cli, &out),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["r", "value", "std_error", "omega", "probes"])?;
            for p in &points {
                w.serialize((
                    &p["r"].as_f64(),
                    p["value"].as_f64(),
                    p["std_error"].as_f64(),
                    p["omega"].as_f64(),
                    p["probes"].as_u64(),
                ))?;
            }
            emit(
                cli,
                &String::from_utf8(w.into_inner().map_err(|e| e.to_string())?)?,
            )
        }
    }
}

fn point_json(r: f64, m: &MinBallFraction<f64>, omega: Option<f64>) -> Value {
    json!({
        "r": r,
        "value": m.value,
        "argmin": m.argmin,
        "std_error": m.std_error,
        "probes": m.probes,
        "omega": omega,
    })
}
