use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use stationarity::engine::{run_test, TestConfig, DEFAULT_INTERVALS, DEFAULT_REPLICATES};
use stationarity::experiment::{
    run_experiment, write_report, ExperimentPlan, Suite, TestSettings, WORKERS_ENV,
};
use stationarity::io::{read_series, write_series};
use stationarity::report::TestReport;
use stationarity::simgen::{gen_model, InnovationDist, ModelSpec, ModelTag};
use stationarity::{Error, Stream};

/// Shortest series accepted by `test`.
const MIN_SERIES_LEN: usize = 64;

#[derive(Parser)]
#[command(
    name = "stationarity",
    version,
    about = "Random-interval wavelet test of second-order stationarity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a one-column CSV series. Exit code 0 = accept, 1 = reject, 2 = error.
    Test(TestArgs),
    /// Simulate a benchmark model and write it as a one-column CSV.
    Simulate(SimulateArgs),
    /// Run a size or power experiment and write tables, profiles and a summary.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct TestArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Number of random intervals.
    #[arg(long = "M", default_value_t = DEFAULT_INTERVALS)]
    intervals: usize,
    /// Minimum interval length; defaults to ceil(T^(2/3)).
    #[arg(long = "m-T")]
    min_len: Option<usize>,
    /// Number of scales; defaults to clamp(floor(log2 T) - 3, 1, 4).
    #[arg(long = "J-star")]
    j_star: Option<usize>,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    model: String,
    #[arg(long = "T")]
    len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "normal")]
    innovation: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    suite: String,
    /// Comma-separated model tags; defaults to every model of the suite.
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "normal")]
    innovations: Vec<String>,
    #[arg(long = "T", value_delimiter = ',', default_value = "512")]
    lengths: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05")]
    alphas: Vec<f64>,
    #[arg(long = "R", default_value_t = 100)]
    replications: usize,
    #[arg(long = "B", default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long = "M", default_value_t = DEFAULT_INTERVALS)]
    intervals: usize,
    #[arg(long = "m-T")]
    min_len: Option<usize>,
    #[arg(long = "J-star")]
    j_star: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args).map(|()| ExitCode::SUCCESS),
        Command::Experiment(args) => cmd_experiment(args).map(|()| ExitCode::SUCCESS),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}

fn cmd_test(args: TestArgs) -> Result<ExitCode> {
    let x =
        read_series(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    if x.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: x.len(),
            required: MIN_SERIES_LEN,
        }
        .into());
    }
    let cfg = TestConfig {
        alpha: args.alpha,
        intervals: args.intervals,
        min_len: args.min_len,
        j_star: args.j_star,
        replicates: args.replicates,
        seed: args.seed,
        ..TestConfig::default()
    };
    let started = Instant::now();
    let result = run_test(&x, &cfg)?;
    let report = TestReport::new(&result, started.elapsed().as_secs_f64() * 1e3);
    let json = report.to_json();
    if let Some(path) = &args.report {
        write_text(path, &json)?;
    }
    println!("{json}");
    Ok(if result.reject {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let model: ModelTag = args.model.parse()?;
    let innovation: InnovationDist = args.innovation.parse()?;
    let spec = ModelSpec::new(model, args.len).with_innovation(innovation);
    let x = gen_model(&spec, &Stream::root(args.seed))?;
    write_series(&args.out, &x)?;
    info!(
        "wrote {} values of {model} to {}",
        x.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<()> {
    let suite: Suite = args.suite.parse()?;
    let models = if args.models.is_empty() {
        suite.default_models()
    } else {
        args.models
            .iter()
            .map(|m| m.parse())
            .collect::<Result<Vec<ModelTag>, _>>()?
    };
    let innovations = args
        .innovations
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<InnovationDist>, _>>()?;
    if args.workers == Some(0) {
        bail!("--workers must be positive");
    }
    let plan = ExperimentPlan {
        suite,
        models,
        innovations,
        lengths: args.lengths,
        alphas: args.alphas,
        replications: args.replications,
        master_seed: args.seed,
        test: TestSettings {
            intervals: args.intervals,
            min_len: args.min_len,
            j_star: args.j_star,
            replicates: args.replicates,
            max_ar_order: None,
        },
        workers: args.workers,
        output_dir: args.out.clone(),
    };
    let started = Instant::now();
    let report = run_experiment(&plan)?;
    info!(
        "experiment finished in {:.1}s",
        started.elapsed().as_secs_f64()
    );
    for cell in report.cells() {
        println!(
            "{} {} T={} alpha={} fraction={} ({} errors)",
            cell.model, cell.innovation, cell.len, cell.alpha, cell.fraction, cell.errors
        );
    }
    for path in write_report(&report, &args.out)? {
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))
}
