//! `qrisk`: command-line runner for the random-injection and
//! conditional-payoff experiments. Every subcommand emits a deterministic
//! JSON or CSV artifact; identical configuration (including the seed)
//! produces byte-identical output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qrisk_core::{
    build_random_injection, build_thread_function, build_thread_superposition,
    convergence_experiment, payoff_report, shift_distribution, BooleanThreadFunction,
    CalibrationMode, ConvergenceResult, EstimateReport, EstimationMethod, PayoffParams,
    PriceDistribution, RegisterLayout, StateVector,
};

const DEFAULT_GRID: &str = "32,64,128,256,512,1024,2048,4096";

#[derive(Parser)]
#[command(name = "qrisk", version, about = "Quantum risk-circuit experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a thread-superposition circuit with random injection and
    /// report the per-thread flip statistic.
    RandomInjection(RandomInjectionArgs),
    /// Evaluate the conditional-payoff circuit for one calibration mode.
    Payoff(PayoffArgs),
    /// Compare all four calibration modes on the same distribution.
    CalibrateCompare(CalibrateCompareArgs),
    /// Benchmark classical sampling against MLAE over an oracle-cost grid.
    QaeConvergence(QaeConvergenceArgs),
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct RandomInjectionArgs {
    /// Number of thread bits (1..=6).
    #[arg(long, default_value_t = 3)]
    threads: usize,
    /// Boolean thread function as a truth-table bitmask (bit i = f(thread i)).
    #[arg(long, default_value_t = 0)]
    function: u64,
    /// Measurement shots.
    #[arg(long, default_value_t = 1600)]
    shots: u64,
    /// Sampling seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct PayoffArgs {
    /// Price distribution: uniform32, even16, point:<v>, range:<lo>-<hi>,
    /// or 32 comma-separated probabilities.
    #[arg(long, default_value = "even16")]
    dist: String,
    /// Strike price (24..=31); the distribution is pre-shifted accordingly.
    #[arg(long, default_value_t = 24)]
    strike: u32,
    /// Payoff rotation step.
    #[arg(long, default_value_t = 0.01)]
    theta: f64,
    /// Calibration mode: baseline, uncalibrated, analog-calibrated, taylor-frame.
    #[arg(long, default_value = "analog-calibrated")]
    mode: String,
    /// Estimation method: exact, shots (1600), qae.
    #[arg(long, default_value = "exact")]
    method: String,
    /// Sampling seed (shots and qae methods).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct CalibrateCompareArgs {
    /// Price distribution (same specs as `payoff --dist`).
    #[arg(long, default_value = "even16")]
    dist: String,
    /// Payoff rotation step.
    #[arg(long, default_value_t = 0.01)]
    theta: f64,
    /// Estimation method: exact, shots (1600), qae.
    #[arg(long, default_value = "exact")]
    method: String,
    /// Sampling seed (shots and qae methods).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(clap::Args)]
struct QaeConvergenceArgs {
    /// Price distribution (same specs as `payoff --dist`).
    #[arg(long, default_value = "even16")]
    dist: String,
    /// Payoff rotation step.
    #[arg(long, default_value_t = 0.01)]
    theta: f64,
    /// Comma-separated oracle-cost grid.
    #[arg(long, default_value = DEFAULT_GRID)]
    grid: String,
    /// Trials per cost point (>= 10).
    #[arg(long, default_value_t = 50)]
    trials: u64,
    /// Master seed for the trial streams.
    #[arg(long, default_value_t = 10)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Usage errors exit with 2, runtime (I/O) errors with 1; clap's own parse
/// errors also exit with 2.
enum AppError {
    Usage(String),
    Runtime(String),
}

impl From<qrisk_core::Error> for AppError {
    fn from(e: qrisk_core::Error) -> Self {
        AppError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::RandomInjection(args) => cmd_random_injection(args),
        Command::Payoff(args) => cmd_payoff(args),
        Command::CalibrateCompare(args) => cmd_calibrate_compare(args),
        Command::QaeConvergence(args) => cmd_qae_convergence(args),
    }
}

#[derive(Serialize)]
struct Metadata {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: serde_json::Value,
}

impl Metadata {
    fn new(command: &'static str, seed: u64, config: serde_json::Value) -> Self {
        Metadata {
            tool: "qrisk",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
        }
    }

    fn csv_comments(&self) -> String {
        format!(
            "# tool={} {}\n# command={}\n# seed={}\n# config={}\n",
            self.tool, self.version, self.command, self.seed, self.config
        )
    }
}

fn parse_dist(spec: &str) -> Result<PriceDistribution, AppError> {
    let usage = |msg: String| AppError::Usage(msg);
    match spec {
        "uniform32" => return Ok(PriceDistribution::uniform()),
        "even16" => return Ok(PriceDistribution::even16()),
        _ => {}
    }
    if let Some(v) = spec.strip_prefix("point:") {
        let v: usize = v
            .parse()
            .map_err(|_| usage(format!("bad point distribution '{spec}'")))?;
        return Ok(PriceDistribution::point(v)?);
    }
    if let Some(body) = spec.strip_prefix("range:") {
        let (lo, hi) = body
            .split_once('-')
            .ok_or_else(|| usage(format!("bad range distribution '{spec}'")))?;
        let lo: usize = lo
            .parse()
            .map_err(|_| usage(format!("bad range bound in '{spec}'")))?;
        let hi: usize = hi
            .parse()
            .map_err(|_| usage(format!("bad range bound in '{spec}'")))?;
        return Ok(PriceDistribution::range(lo, hi)?);
    }
    let values: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("distribution spec '{spec}' is not a preset or a probability list")))?;
    if values.len() != 32 {
        return Err(usage(format!(
            "inline distribution needs 32 probabilities, got {}",
            values.len()
        )));
    }
    let mut probs = [0.0f64; 32];
    probs.copy_from_slice(&values);
    Ok(PriceDistribution::new(probs)?)
}

fn write_artifact(output: &OutputArgs, content: &str) -> Result<(), AppError> {
    match &output.out {
        Some(path) => std::fs::write(path, content)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn json_artifact<T: Serialize>(artifact: &T) -> Result<String, AppError> {
    let mut s = serde_json::to_string_pretty(artifact)
        .map_err(|e| AppError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct Bucket {
    thread: u32,
    output: u8,
    count: u64,
}

#[derive(Serialize)]
struct InjectionArtifact {
    metadata: Metadata,
    buckets: Vec<Bucket>,
    flip_error_statistic_pct: f64,
}

fn cmd_random_injection(args: RandomInjectionArgs) -> Result<(), AppError> {
    let t = args.threads;
    if !(1..=6).contains(&t) {
        return Err(AppError::Usage(format!("threads must be in 1..=6, got {t}")));
    }
    if args.shots == 0 {
        return Err(AppError::Usage("shots must be >= 1".into()));
    }
    let table_bits = 1u32 << t;
    if table_bits < 64 && args.function >> table_bits != 0 {
        return Err(AppError::Usage(format!(
            "function mask {} does not fit a {t}-bit thread function",
            args.function
        )));
    }

    let layout = RegisterLayout::injection(t);
    let out = layout.out_qubit.unwrap();
    let f = BooleanThreadFunction::from_mask(t, args.function);
    let mut circuit = build_thread_superposition(&layout, t)?;
    circuit.extend(&build_thread_function(&layout, &f, out)?);
    circuit.extend(&build_random_injection(&layout, out)?);

    let mut state = StateVector::new(layout.n_qubits)?;
    state.apply_circuit(&circuit)?;
    let hist = state.sample_shots(args.shots, args.seed)?;

    let threads = 1usize << t;
    let mut counts = vec![[0u64; 2]; threads];
    for (i, &c) in hist.counts.iter().enumerate() {
        let thread = layout.thread_of_index(i) as usize;
        let bit = (i >> out) & 1;
        counts[thread][bit] += c;
    }
    // flip frequency relative to f on each thread branch, averaged as a
    // percent deviation from the exact 1/4
    let mut stat = 0.0;
    let mut populated = 0usize;
    for (thread, c) in counts.iter().enumerate() {
        let total = c[0] + c[1];
        if total == 0 {
            continue;
        }
        let flips = c[usize::from(!f.eval(thread))];
        let p_hat = flips as f64 / total as f64;
        stat += 100.0 * (p_hat - 0.25).abs() / 0.25;
        populated += 1;
    }
    if populated == 0 {
        return Err(AppError::Usage("no shots landed; cannot form statistic".into()));
    }
    let stat = stat / populated as f64;

    let buckets: Vec<Bucket> = (0..threads)
        .flat_map(|thread| {
            (0..2u8).map(move |output| (thread, output))
        })
        .map(|(thread, output)| Bucket {
            thread: thread as u32,
            output,
            count: counts[thread][output as usize],
        })
        .collect();

    let metadata = Metadata::new(
        "random-injection",
        args.seed,
        json!({
            "threads": t,
            "function": args.function,
            "shots": args.shots,
            "seed": args.seed,
        }),
    );

    let content = match args.output.format {
        Format::Json => json_artifact(&InjectionArtifact {
            metadata,
            buckets,
            flip_error_statistic_pct: stat,
        })?,
        Format::Csv => {
            let mut s = metadata.csv_comments();
            s.push_str(&format!("# flip_error_statistic_pct={stat}\n"));
            s.push_str("thread,output,count\n");
            for b in &buckets {
                s.push_str(&format!("{},{},{}\n", b.thread, b.output, b.count));
            }
            s
        }
    };
    write_artifact(&args.output, &content)
}

#[derive(Serialize)]
struct PayoffArtifact {
    metadata: Metadata,
    /// The distribution actually loaded (input pre-shifted for the strike).
    price_distribution: Vec<f64>,
    report: EstimateReport,
}

fn cmd_payoff(args: PayoffArgs) -> Result<(), AppError> {
    let dist = parse_dist(&args.dist)?;
    if !(24..=31).contains(&args.strike) {
        return Err(AppError::Usage(format!("strike {} outside 24..=31", args.strike)));
    }
    let mode = CalibrationMode::parse(&args.mode)?;
    let method = EstimationMethod::parse(&args.method)?;
    let params = PayoffParams::with_theta(args.theta);

    let shifted = shift_distribution(&dist, args.strike as i32 - 24)?;
    let report = payoff_report(&shifted, &params, mode, method, args.seed)?;

    let metadata = Metadata::new(
        "payoff",
        args.seed,
        json!({
            "dist": args.dist,
            "strike": args.strike,
            "theta": args.theta,
            "mode": mode.name(),
            "method": method.name(),
            "seed": args.seed,
        }),
    );

    let content = match args.output.format {
        Format::Json => json_artifact(&PayoffArtifact {
            metadata,
            price_distribution: shifted.probs().to_vec(),
            report,
        })?,
        Format::Csv => {
            let mut s = metadata.csv_comments();
            s.push_str(&format!("# {}\n", EstimateReport::CSV_HEADER));
            s.push_str(&format!("# {}\n", report.csv_row()));
            s.push_str("price,probability\n");
            for (price, p) in shifted.probs().iter().enumerate() {
                s.push_str(&format!("{price},{p}\n"));
            }
            s
        }
    };
    write_artifact(&args.output, &content)
}

#[derive(Serialize)]
struct CompareArtifact {
    metadata: Metadata,
    reports: Vec<EstimateReport>,
}

fn cmd_calibrate_compare(args: CalibrateCompareArgs) -> Result<(), AppError> {
    let dist = parse_dist(&args.dist)?;
    let method = EstimationMethod::parse(&args.method)?;
    let params = PayoffParams::with_theta(args.theta);

    let reports: Vec<EstimateReport> = CalibrationMode::ALL
        .iter()
        .enumerate()
        .map(|(i, &mode)| payoff_report(&dist, &params, mode, method, args.seed.wrapping_add(i as u64 * 2)))
        .collect::<Result<_, _>>()?;

    let metadata = Metadata::new(
        "calibrate-compare",
        args.seed,
        json!({
            "dist": args.dist,
            "theta": args.theta,
            "method": method.name(),
            "seed": args.seed,
        }),
    );

    let content = match args.output.format {
        Format::Json => json_artifact(&CompareArtifact { metadata, reports })?,
        Format::Csv => {
            let mut s = metadata.csv_comments();
            s.push_str(EstimateReport::CSV_HEADER);
            s.push('\n');
            for r in &reports {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
    };
    write_artifact(&args.output, &content)
}

#[derive(Serialize)]
struct ConvergenceArtifact {
    metadata: Metadata,
    #[serde(flatten)]
    result: ConvergenceResult,
}

fn cmd_qae_convergence(args: QaeConvergenceArgs) -> Result<(), AppError> {
    let dist = parse_dist(&args.dist)?;
    let grid: Vec<u64> = args
        .grid
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| AppError::Usage(format!("bad cost grid '{}'", args.grid)))?;
    if grid.iter().any(|&m| m == 0) {
        return Err(AppError::Usage("cost grid entries must be >= 1".into()));
    }
    let params = PayoffParams::with_theta(args.theta);
    let (step, offset) = params.ladder(CalibrationMode::AnalogCalibrated);

    let layout = RegisterLayout::payoff();
    let prep = qrisk_core::build_payoff_circuit(&layout, &dist, step, offset)?;
    let pf = layout.pf_qubit.unwrap();
    let result = convergence_experiment(&prep, pf, &grid, args.trials, args.seed)?;

    let metadata = Metadata::new(
        "qae-convergence",
        args.seed,
        json!({
            "dist": args.dist,
            "theta": args.theta,
            "grid": grid,
            "trials": args.trials,
            "seed": args.seed,
        }),
    );

    let content = match args.output.format {
        Format::Json => json_artifact(&ConvergenceArtifact { metadata, result })?,
        Format::Csv => {
            let mut s = metadata.csv_comments();
            s.push_str(&format!("# classical_slope={}\n", result.classical_slope));
            s.push_str(&format!("# mlae_slope={}\n", result.mlae_slope));
            s.push_str("method,cost,rmse,stderr\n");
            for p in &result.classical {
                s.push_str(&format!("classical,{},{},{}\n", p.cost, p.rmse, p.stderr));
            }
            for p in &result.mlae {
                s.push_str(&format!("mlae,{},{},{}\n", p.cost, p.rmse, p.stderr));
            }
            s
        }
    };
    write_artifact(&args.output, &content)
}
