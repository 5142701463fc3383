//! Command-line driver: fit datasets, print asymptotic reports, simulate
//! the non-smooth limit law, run Monte Carlo scenarios, and reproduce the
//! numerical-study tables.
//!
//! Exit codes: 0 success, 1 usage error, 2 computational error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tmatch_core::datagen::Dataset;
use tmatch_core::distributions::{DesignMode, DesignModel, NoiseModel};
use tmatch_core::error::Error as CoreError;
use tmatch_core::experiments::{
    attach_normal_ks, attach_poisson_ks, run_location_scale, run_monte_carlo, run_tables,
    ExperimentConfig, ModelTruth, Scaling, TablesConfig,
};
use tmatch_core::limitlaw::{midpoint_sample, MarkedProcessSpec};
use tmatch_core::losses::Loss;
use tmatch_core::rng::derive_rng;
use tmatch_core::templates::Template;
use tmatch_core::theory::asymptotic_variance_shift;
use tmatch_core::{fit_location_scale, fit_periodic_correlation, fit_shift};
use tmatch_core::{LsSearchConfig, SearchConfig};

#[derive(Parser)]
#[command(
    name = "tmatch",
    about = "Robust template matching and change-point localization by M-estimation",
    version
)]
struct Cli {
    /// Worker threads for Monte Carlo repeats (default: all cores).
    /// Results are independent of this value.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the shift (or location-scale, or periodic) model to a dataset CSV.
    Fit(FitArgs),
    /// Print the asymptotic report (tau^2 and companions) as JSON.
    Theory(TheoryArgs),
    /// Simulate minimizer-interval midpoints of the marked Poisson limit.
    Limitlaw(LimitlawArgs),
    /// Run one Monte Carlo scenario and write its report.
    Experiment(Box<ExperimentArgs>),
    /// Run the full numerical-study suite (tables 1-4) and write CSVs.
    Tables(TablesArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV with header x,y.
    #[arg(long)]
    data: PathBuf,
    /// Built-in template name (A..E, stump:<a>) or a path to a template JSON.
    #[arg(long)]
    template: String,
    /// Loss: squared | absolute | huber[:<c>] | tukey[:<c>].
    #[arg(long, default_value = "squared")]
    loss: String,
    /// Fit the amplitude-location-scale model instead of the pure shift.
    #[arg(long, default_value_t = false)]
    location_scale: bool,
    /// Design mode the data came from; `periodic` switches to the grid
    /// correlation estimator.
    #[arg(long, value_enum, default_value_t = ModeArg::Random)]
    mode: ModeArg,
    /// Search bounds lo,hi for theta (defaults to [-2A, 2A]).
    #[arg(long)]
    bounds: Option<String>,
    /// Coarse grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Refinement tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory for result JSON (also printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long)]
    template: String,
    #[arg(long, default_value = "squared")]
    loss: String,
    #[arg(long, default_value = "gaussian:1")]
    noise: String,
    #[arg(long, default_value = "uniform:0,1")]
    design: String,
    #[arg(long, default_value_t = 0.0)]
    theta_star: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LimitlawArgs {
    #[arg(long)]
    template: String,
    #[arg(long, default_value = "squared")]
    loss: String,
    #[arg(long, default_value = "gaussian:1")]
    noise: String,
    #[arg(long, default_value = "uniform:0,1")]
    design: String,
    #[arg(long, default_value_t = 0.0)]
    theta_star: f64,
    #[arg(long, default_value_t = 100_000)]
    repeats: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory for midpoints.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Random,
    Fixed,
    Periodic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalingArg {
    SqrtN,
    N,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON file holding a full experiment config; inline flags override
    /// its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    template: Option<String>,
    #[arg(long)]
    theta_star: Option<f64>,
    /// Amplitude-location-scale truth (switches to the 3-parameter fit).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    design: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Sample size; repeat for a sweep (--n 100 --n 1000 ...).
    #[arg(long = "n")]
    ns: Vec<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    scaling: Option<ScalingArg>,
    /// Search bounds lo,hi.
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Simulate this many limit midpoints and attach the two-sample KS
    /// statistic (discontinuous templates only).
    #[arg(long)]
    limit_repeats: Option<usize>,
    /// Print the resolved config JSON and exit without running.
    #[arg(long, default_value_t = false)]
    print_config: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    /// Override the per-table repeat counts (full study: 200 and 1000).
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through the error path with success
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Some(w) = cli.workers {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .is_err()
        {
            eprintln!("warning: global thread pool already initialized");
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_class(&e))
        }
    }
}

/// 1 for usage-level problems, 2 for computational failures.
fn exit_class(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<CoreError>() {
        Some(
            CoreError::BadConfig(_)
            | CoreError::UnknownTemplate(_)
            | CoreError::InvalidThreshold(_)
            | CoreError::DegenerateBounds(_, _)
            | CoreError::InvalidBounds(_),
        ) => 1,
        Some(_) => 2,
        None => {
            if e.downcast_ref::<std::io::Error>().is_some()
                || e.downcast_ref::<serde_json::Error>().is_some()
            {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Fit(args) => cmd_fit(args),
        Command::Theory(args) => cmd_theory(args),
        Command::Limitlaw(args) => cmd_limitlaw(args),
        Command::Experiment(args) => cmd_experiment(*args),
        Command::Tables(args) => cmd_tables(args),
    }
}

/// Resolve a template by built-in name, falling back to a JSON file path.
fn resolve_template(spec: &str) -> anyhow::Result<Template> {
    match Template::builtin(spec) {
        Ok(t) => Ok(t),
        Err(e) => {
            if Path::new(spec).exists() {
                let text = std::fs::read_to_string(spec)?;
                Ok(Template::from_json(&text)?)
            } else {
                Err(e.into())
            }
        }
    }
}

fn parse_bounds(s: &str) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| CoreError::BadConfig(format!("bounds must be lo,hi: {s}")))?;
    Ok((
        lo.trim().parse().map_err(|_| CoreError::BadConfig(format!("bad bounds: {s}")))?,
        hi.trim().parse().map_err(|_| CoreError::BadConfig(format!("bad bounds: {s}")))?,
    ))
}

fn write_out(dir: &Option<PathBuf>, name: &str, content: &str) -> anyhow::Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), content)?;
    }
    Ok(())
}

fn cmd_fit(args: FitArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.data)?;
    let dataset = Dataset::from_csv(&text)?;
    let template = resolve_template(&args.template)?;
    let loss = Loss::parse(&args.loss)?;

    if args.mode == ModeArg::Periodic {
        let template = if template.is_periodic() { template } else { template.into_periodic()? };
        let fit = fit_periodic_correlation(&dataset, &template)?;
        let json = serde_json::to_string_pretty(&fit)?;
        println!("{json}");
        write_out(&args.out, "fit.json", &json)?;
        return Ok(());
    }

    if args.location_scale {
        let mut cfg = LsSearchConfig::default();
        if let Some(b) = &args.bounds {
            cfg.xi_bounds = parse_bounds(b)?;
        }
        if let Some(t) = args.tol {
            cfg.refine_tol = t;
        }
        let fit = fit_location_scale(&dataset, &template, &loss, &cfg)?;
        let json = serde_json::to_string_pretty(&fit)?;
        println!("{json}");
        write_out(&args.out, "fit.json", &json)?;
        return Ok(());
    }

    let mut cfg = SearchConfig::default_for(&template, &DesignModel::unit());
    if let Some(b) = &args.bounds {
        cfg.bounds = parse_bounds(b)?;
    }
    if let Some(g) = args.grid {
        cfg.coarse_grid = g;
    }
    if let Some(t) = args.tol {
        cfg.refine_tol = t;
    }
    let fit = fit_shift(&dataset, &template, &loss, &cfg)?;
    let json = serde_json::to_string_pretty(&fit)?;
    println!("{json}");
    write_out(&args.out, "fit.json", &json)?;
    Ok(())
}

fn cmd_theory(args: TheoryArgs) -> anyhow::Result<()> {
    let template = resolve_template(&args.template)?;
    let loss = Loss::parse(&args.loss)?;
    let noise = NoiseModel::parse(&args.noise)?;
    let design = DesignModel::parse(&args.design)?;
    let report = asymptotic_variance_shift(&template, &design, &loss, &noise, args.theta_star)?;
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    write_out(&args.out, "theory.json", &json)?;
    Ok(())
}

fn cmd_limitlaw(args: LimitlawArgs) -> anyhow::Result<()> {
    let template = resolve_template(&args.template)?;
    let loss = Loss::parse(&args.loss)?;
    let noise = NoiseModel::parse(&args.noise)?;
    let design = DesignModel::parse(&args.design)?;
    let spec = MarkedProcessSpec::from_template(&template, &design, args.theta_star, noise, loss)?;
    let mids = midpoint_sample(&spec, args.repeats, &mut derive_rng(args.seed, 0))?;
    let mut csv = String::with_capacity(mids.len() * 24 + 9);
    csv.push_str("midpoint\n");
    for m in &mids {
        csv.push_str(&format!("{m:.16e}\n"));
    }
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("midpoints.csv"), csv)?;
    println!("wrote {} midpoints to {}", mids.len(), args.out.join("midpoints.csv").display());
    Ok(())
}

fn resolve_experiment_config(args: &ExperimentArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::shift_scenario(
            "A",
            Loss::SquaredError,
            NoiseModel::Gaussian { sigma: 1.0 },
            Scaling::SqrtN,
        ),
    };
    if let Some(t) = &args.template {
        cfg.template = t.clone();
    }
    let ls_truth = args.beta.is_some() || args.xi.is_some() || args.nu.is_some();
    if ls_truth {
        let current = match cfg.truth {
            ModelTruth::LocationScale { beta, xi, nu } => (beta, xi, nu),
            _ => (1.0, 0.0, 1.0),
        };
        cfg.truth = ModelTruth::LocationScale {
            beta: args.beta.unwrap_or(current.0),
            xi: args.xi.unwrap_or(current.1),
            nu: args.nu.unwrap_or(current.2),
        };
    } else if let Some(t) = args.theta_star {
        cfg.truth = ModelTruth::Shift { theta_star: t };
    }
    if let Some(l) = &args.loss {
        cfg.loss = Loss::parse(l)?;
    }
    if let Some(n) = &args.noise {
        cfg.noise = NoiseModel::parse(n)?;
    }
    if let Some(d) = &args.design {
        cfg.design = DesignModel::parse(d)?;
    }
    if let Some(m) = args.mode {
        cfg.mode = match m {
            ModeArg::Random => DesignMode::Random,
            ModeArg::Fixed => DesignMode::Fixed,
            ModeArg::Periodic => {
                return Err(CoreError::BadConfig(
                    "periodic mode is for `fit`; experiments use random|fixed".into(),
                )
                .into())
            }
        };
    }
    if !args.ns.is_empty() {
        cfg.ns = args.ns.clone();
    }
    if let Some(r) = args.repeats {
        cfg.repeats = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.scaling {
        cfg.scaling = match s {
            ScalingArg::SqrtN => Scaling::SqrtN,
            ScalingArg::N => Scaling::N,
        };
    }
    if let Some(b) = &args.bounds {
        let bounds = parse_bounds(b)?;
        cfg.search.bounds = bounds;
        cfg.ls_search.xi_bounds = bounds;
    }
    if let Some(g) = args.grid {
        cfg.search.coarse_grid = g;
    }
    if let Some(t) = args.tol {
        cfg.search.refine_tol = t;
        cfg.ls_search.refine_tol = t;
    }
    Ok(cfg)
}

fn cmd_experiment(args: ExperimentArgs) -> anyhow::Result<()> {
    let cfg = resolve_experiment_config(&args)?;
    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg)?);
        return Ok(());
    }
    match cfg.truth {
        ModelTruth::Shift { theta_star } => {
            let mut report = run_monte_carlo(&cfg)?;
            let template = Template::builtin(&cfg.template)?;
            if !report.theory_silent {
                if let Ok(theory) = asymptotic_variance_shift(
                    &template, &cfg.design, &cfg.loss, &cfg.noise, theta_star,
                ) {
                    attach_normal_ks(&mut report, theory.tau2)?;
                }
            }
            if let Some(reps) = args.limit_repeats {
                let spec = MarkedProcessSpec::from_template(
                    &template, &cfg.design, theta_star, cfg.noise, cfg.loss,
                )?;
                let mids = midpoint_sample(&spec, reps, &mut derive_rng(cfg.seed, u64::MAX))?;
                attach_poisson_ks(&mut report, &mids)?;
            }
            let json = serde_json::to_string_pretty(&report)?;
            println!("{json}");
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("report.json"), &json)?;
                for block in &report.per_n {
                    let mut csv = String::from("scaled_error\n");
                    for e in &block.raw_scaled_errors {
                        csv.push_str(&format!("{e:.16e}\n"));
                    }
                    std::fs::write(dir.join(format!("errors_n{}.csv", block.n)), csv)?;
                }
            }
        }
        ModelTruth::LocationScale { .. } => {
            let report = run_location_scale(&cfg)?;
            let json = serde_json::to_string_pretty(&report)?;
            println!("{json}");
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("report.json"), &json)?;
            }
        }
    }
    Ok(())
}

fn cmd_tables(args: TablesArgs) -> anyhow::Result<()> {
    let cfg = TablesConfig {
        seed: args.seed,
        override_repeats: args.repeats,
        n: args.n,
    };
    let set = run_tables(&cfg)?;
    set.write_to(&args.out)?;
    println!("wrote table1.csv .. table4.csv to {}", args.out.display());
    Ok(())
}
