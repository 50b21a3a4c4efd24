//! `flmtest`: hypothesis tests for functional linear models.
//!
//! Subcommands: `test` runs the bootstrap max-statistic test on data files,
//! `simulate` runs a Monte Carlo size/power study, `profile` converts
//! wearable activity trajectories into activity-profile curves.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use flmtest_core::{
    activity_profile, profiles_to_sample, read_functional_csv, read_ragged_csv, read_sample_json,
    read_scalar_csv, run_study, run_test, threshold_grid, write_functional_csv, write_results,
    ActivityTrajectory, BasisChoice, Family, HilbertPoint, Sample, SlopeVariant, StudyConfig,
    TauPolicy, TestConfig,
};

/// Environment variable fixing the worker-thread count.
const WORKERS_ENV: &str = "FLMTEST_WORKERS";

#[derive(Parser)]
#[command(name = "flmtest", version, about = "Bootstrap max-statistic tests for functional linear models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test H0: the slope operator is null, from data files.
    Test(TestArgs),
    /// Run a Monte Carlo size/power study and write a results CSV.
    Simulate(SimulateArgs),
    /// Convert per-minute activity trajectories into activity profiles.
    Profile(ProfileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Empirical,
    Fourier,
}

// value names match the config-file spelling
#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "scalar_on_function")]
    ScalarOnFunction,
    #[value(name = "function_on_function")]
    FunctionOnFunction,
    #[value(name = "function_on_vector")]
    FunctionOnVector,
}

impl From<FamilyArg> for Family {
    fn from(v: FamilyArg) -> Self {
        match v {
            FamilyArg::ScalarOnFunction => Family::ScalarOnFunction,
            FamilyArg::FunctionOnFunction => Family::FunctionOnFunction,
            FamilyArg::FunctionOnVector => Family::FunctionOnVector,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Sparsest,
    Sparse,
    Dense,
    Densest,
}

impl From<VariantArg> for SlopeVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Sparsest => SlopeVariant::Sparsest,
            VariantArg::Sparse => SlopeVariant::Sparse,
            VariantArg::Dense => SlopeVariant::Dense,
            VariantArg::Densest => SlopeVariant::Densest,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    /// Functional predictor data: CSV (first row = grid) or JSON document.
    #[arg(long)]
    x: Option<String>,
    /// Scalar predictor data: CSV with one row per observation.
    #[arg(long)]
    x_scalars: Option<String>,
    /// Functional response data: CSV (first row = grid) or JSON document.
    #[arg(long)]
    y: Option<String>,
    /// Scalar response data: CSV with one row per observation.
    #[arg(long)]
    y_scalars: Option<String>,
    /// Predictor-side component count (default: sample size / vector dim).
    #[arg(long)]
    p1: Option<usize>,
    /// Response-side component count.
    #[arg(long)]
    p2: Option<usize>,
    /// Fixed partial-standardization exponent in [0, 1).
    #[arg(long, conflicts_with = "tau_grid")]
    tau: Option<f64>,
    /// Comma-separated τ grid for data-driven selection.
    #[arg(long)]
    tau_grid: Option<String>,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 1000)]
    b: usize,
    /// Significance level in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BasisArg::Empirical)]
    basis: BasisArg,
}

#[derive(Args)]
struct SimulateArgs {
    /// Study configuration JSON (mirrors the config fields exactly).
    #[arg(long, conflicts_with_all = ["family", "variant", "n"])]
    config: Option<String>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    n: Option<usize>,
    /// Vector-predictor dimension (function-on-vector only).
    #[arg(long, default_value_t = 5)]
    q: usize,
    /// Comma-separated signal strengths.
    #[arg(long)]
    r_grid: Option<String>,
    #[arg(long, default_value_t = 1000)]
    replications: usize,
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, conflicts_with = "tau_grid")]
    tau: Option<f64>,
    #[arg(long)]
    tau_grid: Option<String>,
    #[arg(long)]
    p1: Option<usize>,
    #[arg(long)]
    p2: Option<usize>,
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock seconds per row (makes outputs non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Output CSV path.
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct ProfileArgs {
    /// Trajectory CSV: one row of per-minute readings per subject.
    #[arg(long)]
    input: String,
    /// Output CSV in the functional sample layout (grid = thresholds).
    #[arg(long)]
    output: String,
    /// Smallest intensity threshold (≥ 1).
    #[arg(long, default_value_t = 1)]
    min: u32,
    /// Largest intensity threshold.
    #[arg(long, default_value_t = 1000)]
    max: u32,
    /// Threshold subsampling step.
    #[arg(long, default_value_t = 10)]
    step: u32,
}

fn parse_grid_list(text: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid {what} entry `{}`", s.trim()))
        })
        .collect()
}

fn tau_policy(tau: Option<f64>, tau_grid: Option<&str>) -> anyhow::Result<TauPolicy> {
    let policy = match (tau, tau_grid) {
        (Some(v), None) => TauPolicy::fixed(v),
        (None, Some(list)) => TauPolicy::grid(parse_grid_list(list, "tau grid")?),
        (None, None) => TauPolicy::default(),
        (Some(_), Some(_)) => bail!("--tau and --tau-grid are mutually exclusive"),
    };
    policy.validate()?;
    Ok(policy)
}

fn check_alpha(alpha: f64) -> anyhow::Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("--alpha must lie strictly between 0 and 1, got {alpha}");
    }
    Ok(())
}

/// Load one side (predictor or response) from its file flags.
fn load_side(
    functional: Option<&str>,
    scalars: Option<&str>,
    side: &str,
) -> anyhow::Result<Sample> {
    match (functional, scalars) {
        (None, None) => bail!("no data given for {side}: pass --{side} and/or --{side}-scalars"),
        (Some(path), None) if path.ends_with(".json") => Ok(read_sample_json(path)?),
        (Some(path), None) => Ok(read_functional_csv(path)?),
        (None, Some(path)) => {
            let rows = read_scalar_csv(path)?;
            let elements = rows
                .into_iter()
                .map(HilbertPoint::scalar)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Sample::new(elements)?)
        }
        (Some(func_path), Some(scalar_path)) => {
            if func_path.ends_with(".json") {
                bail!("JSON documents already carry scalars; drop --{side}-scalars");
            }
            let functional = read_functional_csv(func_path)?;
            let scalars = read_scalar_csv(scalar_path)?;
            if functional.len() != scalars.len() {
                bail!(
                    "row counts differ for {side}: {} functional rows in {func_path} vs {} scalar rows in {scalar_path}",
                    functional.len(),
                    scalars.len()
                );
            }
            let elements = functional
                .elements()
                .iter()
                .zip(scalars)
                .map(|(e, s)| {
                    let part = &e.functional_parts()[0];
                    HilbertPoint::direct_sum(vec![(part.grid().clone(), part.values().to_vec())], s)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Sample::new(elements)?)
        }
    }
}

fn cmd_test(args: TestArgs) -> anyhow::Result<()> {
    check_alpha(args.alpha)?;
    let x = load_side(args.x.as_deref(), args.x_scalars.as_deref(), "x")?;
    let y = load_side(args.y.as_deref(), args.y_scalars.as_deref(), "y")?;
    if x.len() != y.len() {
        bail!(
            "row counts differ: predictor files hold {} observations, response files hold {}",
            x.len(),
            y.len()
        );
    }
    let config = TestConfig {
        p1: args.p1,
        p2: args.p2,
        tau: tau_policy(args.tau, args.tau_grid.as_deref())?,
        bootstrap: args.b,
        significance: args.alpha,
        seed: args.seed,
        basis: match args.basis {
            BasisArg::Empirical => BasisChoice::Empirical,
            BasisArg::Fourier => BasisChoice::Fourier,
        },
    };
    let result = run_test(&x, &y, &config)?;
    println!("{}", result.to_json());
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let config = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| path.clone())?;
        serde_json::from_str::<StudyConfig>(&text)
            .with_context(|| format!("{path}: invalid study configuration"))?
    } else {
        let (Some(family), Some(variant), Some(n)) = (args.family, args.variant, args.n) else {
            bail!("pass --config, or all of --family, --variant and --n");
        };
        check_alpha(args.alpha)?;
        let mut config = StudyConfig::new(family.into(), variant.into(), n);
        config.q = args.q;
        if let Some(list) = &args.r_grid {
            config.r_grid = parse_grid_list(list, "r grid")?;
        }
        config.replications = args.replications;
        config.bootstrap = args.bootstrap;
        config.significance = args.alpha;
        config.tau = tau_policy(args.tau, args.tau_grid.as_deref())?;
        config.p1 = args.p1;
        config.p2 = args.p2;
        config.grid_points = args.grid_points;
        config.master_seed = args.seed;
        config.record_timing = args.timing;
        config
    };

    let violations = config.violations();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("config error: {v}");
        }
        bail!("{} configuration error(s)", violations.len());
    }

    let table = run_study(&config)?;
    write_results(&table, &args.out)?;
    for row in &table.rows {
        println!(
            "r={} rate={} ({}/{}) mean_tau={}",
            row.r, row.rate, row.rejections, row.replications, row.mean_tau
        );
    }
    Ok(())
}

fn cmd_profile(args: ProfileArgs) -> anyhow::Result<()> {
    let thresholds = threshold_grid(args.min, args.max, args.step)?;
    let rows = read_ragged_csv(&args.input)?;
    if rows.is_empty() {
        bail!("{}: no trajectories found", args.input);
    }
    let profiles = rows
        .into_iter()
        .enumerate()
        .map(|(i, readings)| {
            let traj = ActivityTrajectory::new(readings)
                .with_context(|| format!("{}: subject row {}", args.input, i + 1))?;
            Ok(activity_profile(&traj, &thresholds)?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let sample = profiles_to_sample(&profiles)?;
    write_functional_csv(&sample, &args.output)?;
    println!(
        "wrote {} profiles on {} thresholds to {}",
        sample.len(),
        thresholds.len(),
        args.output
    );
    Ok(())
}

fn configure_workers() -> anyhow::Result<()> {
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        let workers: usize = value
            .parse()
            .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got `{value}`"))?;
        if workers == 0 {
            bail!("{WORKERS_ENV} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("worker pool already initialized")?;
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = configure_workers().and_then(|()| match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Profile(args) => cmd_profile(args),
    });
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
