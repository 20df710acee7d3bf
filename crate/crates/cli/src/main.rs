//! `sphq`: exact quantizers and mean-square geodesic errors for uniform
//! point sets on circles of the unit sphere.
//!
//! One document per invocation goes to standard output; diagnostics go to
//! standard error. Exit codes: 0 on success, 1 for verification failures,
//! 2 for unusable arguments.

use clap::{Args, Parser, Subcommand, ValueEnum};
use sphq_core::geometry::Latitude;
use sphq_core::models::{
    latitude_table, quantize_equator, quantize_one_circle, quantize_two_circles,
};
use sphq_core::oracle::{dp_optimal, exhaustive_optimal, lloyd_multistart};
use sphq_core::report::{emit_curve, write_csv, write_json, OutputDocument};
use sphq_core::verify::{run_suite, Budget};
use sphq_core::{Error, GridSpec};
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sphq",
    version,
    about = "Optimal discrete quantizers on great and small circles of the unit sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact mean-square quantization error of a model instance.
    Error(ModelArgs),
    /// Like `error`, with the codebook and block layout in the output.
    Quantize(ModelArgs),
    /// Brute-force verifiers on one circle: dp, exhaustive, or lloyd.
    Oracle(OracleArgs),
    /// Offset-distance curve samples for a list of latitudes.
    Curve(CurveArgs),
    /// Exact and asymptotic errors across latitudes, with reductions.
    Table(TableArgs),
    /// Run the invariant suite and report pass/fail.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelName {
    Equator,
    OneCircle,
    TwoCircles,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ModelArgs {
    /// Support configuration.
    #[arg(long, value_enum)]
    model: ModelName,
    /// Total number of support points (2M for two-circles).
    #[arg(long)]
    points: usize,
    /// Codebook size.
    #[arg(long)]
    codes: usize,
    /// Latitude in radians; required for the circle models.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Dp,
    Exhaustive,
    Lloyd,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Number of equally spaced points on the circle.
    #[arg(long)]
    points: usize,
    /// Codebook size.
    #[arg(long)]
    codes: usize,
    /// Latitude in radians (default 0, the equator).
    #[arg(long)]
    phi: Option<f64>,
    /// Random seed for lloyd initializations.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of lloyd restarts.
    #[arg(long)]
    restarts: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct CurveArgs {
    /// Comma-separated latitudes in radians, e.g. 0,0.5,1.0.
    #[arg(long)]
    phis: String,
    /// Samples per latitude over [0, pi], endpoints included.
    #[arg(long, default_value_t = 240)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    points: usize,
    #[arg(long)]
    codes: usize,
    /// Comma-separated latitudes in radians.
    #[arg(long)]
    phis: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// small finishes in seconds; full runs the complete sweeps.
    #[arg(long, default_value = "small")]
    budget: String,
}

/// Parses a comma-separated latitude list, reporting the offending token and
/// its 1-based position on failure.
fn parse_phi_list(text: &str) -> Result<Vec<Latitude>, Error> {
    if text.trim().is_empty() {
        return Err(Error::InvalidArgument("empty latitude list".into()));
    }
    text.split(',')
        .enumerate()
        .map(|(i, tok)| {
            let raw: f64 = tok.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "latitude '{}' at position {} is not a number",
                    tok.trim(),
                    i + 1
                ))
            })?;
            Latitude::new(raw).map_err(|_| {
                Error::InvalidArgument(format!(
                    "latitude '{}' at position {} out of range: need 0 <= phi < pi/2",
                    tok.trim(),
                    i + 1
                ))
            })
        })
        .collect()
}

fn parse_phi(phi: Option<f64>, required_for: &str) -> Result<Latitude, Error> {
    let raw = phi.ok_or_else(|| {
        Error::InvalidArgument(format!("--phi is required for the {required_for} model"))
    })?;
    Latitude::new(raw)
}

fn distortion_document(kind: &str, args: &ModelArgs) -> Result<OutputDocument, Error> {
    let report = match args.model {
        ModelName::Equator => {
            if let Some(phi) = args.phi {
                if phi != 0.0 {
                    return Err(Error::InvalidArgument(
                        "the equator model has no latitude; omit --phi or pass 0".into(),
                    ));
                }
            }
            quantize_equator(args.points, args.codes)?
        }
        ModelName::OneCircle => {
            quantize_one_circle(args.points, args.codes, parse_phi(args.phi, "one-circle")?)?
        }
        ModelName::TwoCircles => {
            if args.points % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "--points for two-circles is the total 2M and must be even, got {}",
                    args.points
                )));
            }
            quantize_two_circles(
                args.points / 2,
                args.codes,
                parse_phi(args.phi, "two-circles")?,
            )?
        }
    };
    Ok(OutputDocument::for_distortion(kind, report))
}

fn emit(doc: &OutputDocument, format: Format) -> Result<(), Error> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match format {
        Format::Json => write_json(doc, &mut lock)?,
        Format::Csv => write_csv(doc, &mut lock)?,
    }
    lock.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Error(args) => {
            let doc = distortion_document("error", &args)?;
            emit(&doc, args.format)?;
        }
        Command::Quantize(args) => {
            let doc = distortion_document("quantize", &args)?;
            emit(&doc, args.format)?;
        }
        Command::Oracle(args) => {
            let phi0 = match args.phi {
                Some(raw) => Latitude::new(raw)?,
                None => Latitude::EQUATOR,
            };
            let points = GridSpec::new(args.points)?.longitudes();
            let (result, seed, restarts) = match args.method {
                Method::Dp => (dp_optimal(&points, phi0, args.codes)?, None, None),
                Method::Exhaustive => {
                    (exhaustive_optimal(&points, phi0, args.codes)?, None, None)
                }
                Method::Lloyd => {
                    let seed = args.seed.unwrap_or(0);
                    let restarts = args.restarts.unwrap_or(1);
                    (
                        lloyd_multistart(&points, phi0, args.codes, restarts, seed, 1000, 1e-13)?,
                        Some(seed),
                        Some(restarts),
                    )
                }
            };
            let doc = OutputDocument::for_oracle(
                args.points as u64,
                phi0.value(),
                seed,
                restarts,
                result,
            );
            emit(&doc, args.format)?;
        }
        Command::Curve(args) => {
            let phis = parse_phi_list(&args.phis)?;
            let samples = emit_curve(&phis, args.samples)?;
            emit(&OutputDocument::for_curve(samples), args.format)?;
        }
        Command::Table(args) => {
            let phis = parse_phi_list(&args.phis)?;
            let rows = latitude_table(args.points, args.codes, &phis)?;
            emit(
                &OutputDocument::for_table(args.points as u64, args.codes as u64, rows),
                args.format,
            )?;
        }
        Command::Verify(args) => {
            let budget: Budget = args.budget.parse()?;
            let summary = run_suite(budget);
            for check in &summary.checks {
                eprintln!(
                    "{} {} - {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            eprintln!("{} passed, {} failed", summary.passed, summary.failed);
            let failed = summary.failed > 0;
            emit(&OutputDocument::for_verify(summary), Format::Json)?;
            if failed {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::InvalidArgument(_) | Error::BudgetExceeded(_) => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
