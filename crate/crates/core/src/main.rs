//! Batch experiment runner: cross listings, error sweeps, rate fits, and
//! verification suites with machine-readable output.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error. Every command's
//! output depends only on its flags and seed; reruns are byte-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hypercross::analysis::{rate_fit, rate_fit_skip_transient, theory_rate, RateCase, TheoremId};
use hypercross::approx::{error_sweep, read_csv, write_csv, ErrorReport, SweepConfig};
use hypercross::checks::{all_suites, run_suite, CheckRecord, SUITE_NAMES};
use hypercross::index::{cross_blocks, cross_cardinality};
use hypercross::kernels::Generator;
use hypercross::norms::NormSpec;
use hypercross::quad::DEFAULT_RHO_OS;
use hypercross::{CrossSpec, CrossVariant, Error, SmoothnessProfile};

#[derive(Parser)]
#[command(
    name = "hypercross",
    version,
    about = "Step-hyperbolic cross approximation experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the dyadic blocks of a step-hyperbolic cross.
    Cross {
        /// Dimension.
        #[arg(long)]
        d: usize,
        /// Cross level.
        #[arg(long)]
        n: u32,
        /// Comma-separated weight vector, e.g. `1,1.5`.
        #[arg(long)]
        weights: String,
    },
    /// Sweep cross levels, writing one error report per level as CSV.
    Sweep {
        /// Generator expression, e.g. `g1(d=2,p=2,r1=1)` or `rand(seed=1,d=2)`.
        #[arg(long)]
        generator: String,
        /// Level range `lo..hi` (inclusive) or a single level.
        #[arg(long)]
        n: String,
        /// Cross variant: gamma, gamma_prime, or ones (default: by generator).
        #[arg(long)]
        variant: Option<String>,
        /// Error norm, e.g. `lq:2`, `bq1:4`, `bq1a:1`.
        #[arg(long, default_value = "lq:2")]
        space: String,
        /// Seed recorded in every row (and feeding seeded generators).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Oversampling factor for quadrature-based norms.
        #[arg(long, default_value_t = DEFAULT_RHO_OS)]
        rho_os: usize,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<String>,
    },
    /// Fit the model `value = C * 2^(-a n) * n^b` to a sweep CSV column.
    Fit {
        /// Sweep CSV path.
        #[arg(long)]
        csv: String,
        /// Column to fit.
        #[arg(long, default_value = "value_EE",
              value_parser = ["value_EE", "value_E_upper", "value_E_lower"])]
        column: String,
        /// Compare against a predicted rate (T1, T1d1, T2, T3, T4, Remark1,
        /// Remark2, G, D, E1dim); needs --p, --q, and --r.
        #[arg(long)]
        theorem: Option<String>,
        /// Source exponent for the prediction.
        #[arg(long)]
        p: Option<f64>,
        /// Target exponent for the prediction.
        #[arg(long)]
        q: Option<f64>,
        /// Comma-separated smoothness vector for the prediction.
        #[arg(long)]
        r: Option<String>,
    },
    /// Run a verification suite (or `all`) and print its JSON report.
    Check {
        /// Suite name: parseval, partition, nikolskii, bernstein, lemma_a,
        /// lemma_b, dirichlet, nearbest, or all.
        suite: String,
        /// Corpus seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::Cross { d, n, weights } => cmd_cross(d, n, &weights),
        Cmd::Sweep { generator, n, variant, space, seed, rho_os, out } => {
            cmd_sweep(&generator, &n, variant.as_deref(), &space, seed, rho_os, out.as_deref())
        }
        Cmd::Fit { csv, column, theorem, p, q, r } => {
            cmd_fit(&csv, &column, theorem.as_deref(), p, q, r.as_deref())
        }
        Cmd::Check { suite, seed } => cmd_check(&suite, seed),
    }
}

fn parse_weights(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("--weights: `{w}` is not a number")))
        })
        .collect()
}

fn cmd_cross(d: usize, n: u32, weights: &str) -> Result<ExitCode, Error> {
    let weights = parse_weights(weights)?;
    if weights.len() != d {
        return Err(Error::Parse(format!(
            "--weights: expected {d} entries, got {}",
            weights.len()
        )));
    }
    let cross = CrossSpec::new(n, weights)?;
    let blocks = cross_blocks(&cross);
    let mut stdout = std::io::stdout().lock();
    for b in &blocks {
        let comps: Vec<String> = b.components().iter().map(|s| s.to_string()).collect();
        writeln!(stdout, "block {} size {}", comps.join(","), b.cardinality())?;
    }
    writeln!(stdout, "blocks {}", blocks.len())?;
    writeln!(stdout, "frequencies {}", cross_cardinality(&cross))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_level_range(text: &str) -> Result<(u32, u32), Error> {
    let bad = || Error::Parse(format!("--n: `{text}` is not a level or `lo..hi` range"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(Error::Parse(format!("--n: empty range `{text}`")));
        }
        Ok((lo, hi))
    } else {
        let n: u32 = text.trim().parse().map_err(|_| bad())?;
        Ok((n, n))
    }
}

fn cmd_sweep(
    generator: &str,
    n: &str,
    variant: Option<&str>,
    space: &str,
    seed: u64,
    rho_os: usize,
    out: Option<&str>,
) -> Result<ExitCode, Error> {
    let generator = Generator::parse(generator)?;
    let (n_start, n_end) = parse_level_range(n)?;
    let variant = match variant {
        Some(v) => CrossVariant::parse(v)?,
        None => generator.default_variant(),
    };
    let space = NormSpec::parse(space)?;
    space.validate()?;
    let config = SweepConfig { generator, n_start, n_end, variant, space, seed, rho_os };
    let reports = error_sweep(&config)?;
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_csv(&reports, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            write_csv(&reports, &mut stdout)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn column_of(report: &ErrorReport, column: &str) -> f64 {
    match column {
        "value_E_upper" => report.value_e_upper,
        "value_E_lower" => report.value_e_lower,
        _ => report.value_ee,
    }
}

fn cmd_fit(
    csv: &str,
    column: &str,
    theorem: Option<&str>,
    p: Option<f64>,
    q: Option<f64>,
    r: Option<&str>,
) -> Result<ExitCode, Error> {
    let reports = read_csv(BufReader::new(File::open(csv)?))?;
    let mut points: Vec<(u32, f64)> =
        reports.iter().map(|rep| (rep.n, column_of(rep, column))).collect();
    points.sort_by_key(|&(n, _)| n);
    // drop the preasymptotic transient when enough levels remain
    let (fit, skipped) = if points.len() >= 6 {
        (rate_fit_skip_transient(&points)?, true)
    } else {
        (rate_fit(&points)?, false)
    };
    let window = if skipped { &points[2..] } else { &points[..] };
    let mut report = serde_json::json!({
        "column": column,
        "a": fit.a,
        "b": fit.b,
        "log2_c": fit.log2_c,
        "residual": fit.residual,
        "n_used": fit.n_used,
        "n_window": [window.first().unwrap().0, window.last().unwrap().0],
        "skipped_transient": skipped,
    });
    if let Some(id) = theorem {
        let id = TheoremId::parse(id)?;
        let (p, q, r) = match (p, q, r) {
            (Some(p), Some(q), Some(r)) => (p, q, r),
            _ => {
                return Err(Error::Parse(
                    "--theorem needs --p, --q, and --r to evaluate the prediction".into(),
                ))
            }
        };
        let profile = SmoothnessProfile::new(&parse_weights(r)?)?;
        let (pa, pb) = theory_rate(&RateCase { id, p, q, profile })?;
        report["predicted"] = serde_json::json!({"a": pa, "b": pb});
        report["deviation"] = serde_json::json!({"a": fit.a - pa, "b": fit.b - pb});
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(suite: &str, seed: u64) -> Result<ExitCode, Error> {
    if suite != "all" && !SUITE_NAMES.contains(&suite) {
        eprintln!(
            "error: unknown suite `{suite}`; known suites: all, {}",
            SUITE_NAMES.join(", ")
        );
        return Ok(ExitCode::from(2));
    }
    let records: Vec<CheckRecord> =
        if suite == "all" { all_suites(seed)? } else { run_suite(suite, seed)? };
    println!("{}", serde_json::to_string_pretty(&records).expect("serializable records"));
    let failed = records.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        eprintln!("{failed} of {} checks failed", records.len());
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
