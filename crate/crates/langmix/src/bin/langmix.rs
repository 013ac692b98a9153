//! Command-line front end. All numerical work lives in the library;
//! this binary only parses flags, wires configs into the command
//! implementations, and maps errors onto exit codes:
//! 0 success, 2 configuration error, 3 step-size hypothesis violation,
//! 4 verification or executed-plan failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use langmix::error::Error;
use langmix::harness::checks::Level;
use langmix::harness::commands::{
    cmd_constants, cmd_couple, cmd_mixing, cmd_moments, cmd_plan, cmd_rate_sweep, cmd_sample,
    cmd_ula_bias, cmd_verify, cmd_w2, ConstantsArgs, PlanArgs,
};
use langmix::harness::config::Overrides;

#[derive(Parser)]
#[command(
    name = "langmix",
    version,
    about = "Langevin samplers with dependent data streams: runs, bounds, planners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-chain moment trajectory to CSV.
    Sample(RunFlags),
    /// Shared-noise pair (data-driven vs exact-drift chain) to CSV.
    Couple(RunFlags),
    /// Stationary coupled distance over a step-size grid with a fitted
    /// log-log slope.
    RateSweep(SweepFlags),
    /// Empirical drift-inequality suite on the configured system.
    Moments(RunFlags),
    /// Stationary bias of the exact-drift chain: closed form and a
    /// long-run empirical audit.
    UlaBias(BiasFlags),
    /// Mixing coefficients of the configured stream with a certified
    /// tail remainder.
    Mixing(MixingFlags),
    /// Every named constant of the bound chain and both planners.
    Constants(ConstantsFlags),
    /// Wasserstein-2 distance between two CSV sample files.
    W2(W2Flags),
    /// Step size and horizon for an accuracy target, optionally
    /// executed end to end.
    Plan(PlanFlags),
    /// The numbered verification suite; writes a deterministic verdict.
    Verify(VerifyFlags),
}

#[derive(Args)]
struct OverrideFlags {
    /// Step size; overrides the config value.
    #[arg(long)]
    lambda: Option<f64>,
    /// Horizon in steps; overrides the config value.
    #[arg(long)]
    steps: Option<u64>,
    /// Monte Carlo replicas; overrides the config value.
    #[arg(long)]
    replicas: Option<usize>,
    /// Recording stride; overrides the config value.
    #[arg(long)]
    record_every: Option<u64>,
    /// Master seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
}

impl OverrideFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            lambda: self.lambda,
            steps: self.steps,
            replicas: self.replicas,
            record_every: self.record_every,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct RunFlags {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: OverrideFlags,
}

#[derive(Args)]
struct SweepFlags {
    #[arg(long)]
    config: PathBuf,
    /// JSON report path; a plot-ready CSV is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated step sizes; default 2^-4..2^-9.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[command(flatten)]
    overrides: OverrideFlags,
}

#[derive(Args)]
struct BiasFlags {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated step sizes; default 0.01,0.1,0.3.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Steps for the empirical audit at the first step size.
    #[arg(long, default_value_t = 1_000_000)]
    empirical_steps: u64,
    /// Skip the empirical audit; report closed forms only.
    #[arg(long)]
    closed_only: bool,
    #[command(flatten)]
    overrides: OverrideFlags,
}

#[derive(Args)]
struct MixingFlags {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Largest gap tabulated explicitly.
    #[arg(long, default_value_t = 16)]
    tau_max: usize,
    /// Moment order of the mixing coefficients.
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    /// Power applied to the mixing sum in the dependence constant.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
}

#[derive(Args)]
struct SystemFlags {
    /// Strong-convexity constant.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Lipschitz constant in the parameter.
    #[arg(long, default_value_t = 1.0)]
    l1: f64,
    /// Lipschitz constant in the data.
    #[arg(long, default_value_t = 1.0)]
    l2: f64,
    /// Parameter dimension.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Gradient magnitude at the minimizer with zero data.
    #[arg(long, default_value_t = 0.0)]
    h_star: f64,
    /// Norm of the minimizer.
    #[arg(long, default_value_t = 0.0)]
    theta_star_norm: f64,
    /// Deterministic initial distance to the minimizer.
    #[arg(long, default_value_t = 0.0)]
    init_dist: f64,
    /// Data-growth exponent of the independent-data model.
    #[arg(long, default_value_t = 0)]
    rho: u32,
    /// Independent scalar stream copies per data vector.
    #[arg(long, default_value_t = 1)]
    data_dim: usize,
    /// Scale of the data stream.
    #[arg(long, default_value_t = 1.0)]
    data_sd: f64,
    /// Saved `mixing` report; replaces the default independent stream
    /// in the chain's data moments.
    #[arg(long)]
    mixing: Option<PathBuf>,
}

impl SystemFlags {
    fn constants_args(&self, p: u32, kappa: f64, epsilon: f64) -> ConstantsArgs {
        ConstantsArgs {
            a: self.a,
            l1: self.l1,
            l2: self.l2,
            d: self.d,
            p,
            h_star: self.h_star,
            theta_star_norm: self.theta_star_norm,
            init_dist: self.init_dist,
            kappa,
            epsilon,
            rho: self.rho,
            data_dim: self.data_dim,
            data_sd: self.data_sd,
            mixing: self.mixing.clone(),
        }
    }
}

#[derive(Args)]
struct ConstantsFlags {
    #[command(flatten)]
    system: SystemFlags,
    /// Even moment order of the bound chain (at least 4).
    #[arg(long, default_value_t = 4)]
    p: u32,
    /// Rate exponent of the dependent-data planner.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Accuracy target fed to both planners.
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct W2Flags {
    /// First sample file (CSV, one point per row).
    #[arg(long)]
    a: PathBuf,
    /// Second sample file.
    #[arg(long)]
    b: PathBuf,
    /// 1d (exact quantile form) or assign (assignment solver);
    /// default picks by dimension.
    #[arg(long)]
    method: Option<String>,
    /// Optional JSON report path; the distance always prints to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanFlags {
    /// Accuracy target.
    #[arg(long)]
    epsilon: f64,
    /// Dependent-data planner with this rate exponent.
    #[arg(long)]
    kappa: Option<f64>,
    /// Independent-data planner.
    #[arg(long)]
    iid: bool,
    /// Run the planned (step size, horizon) pair and compare the
    /// empirical distance against the target.
    #[arg(long)]
    execute: bool,
    /// Replicas for the executed plan.
    #[arg(long, default_value_t = 2000)]
    replicas: usize,
    /// System to execute on (quadratic d=1 plus stream); default is the
    /// scalar unit model with independent standard-normal data.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "plan.json")]
    out: PathBuf,
    #[command(flatten)]
    system: SystemFlags,
}

#[derive(Args)]
struct VerifyFlags {
    /// quick or full.
    #[arg(long, default_value = "quick")]
    level: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "verdict.json")]
    out: PathBuf,
}

fn init_threads() {
    if let Ok(raw) = std::env::var("LANGMIX_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: LANGMIX_THREADS={raw} is not a positive integer; ignored"),
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Sample(f) => {
            cmd_sample(&f.config, &f.out, &f.overrides.overrides())?;
            Ok(0)
        }
        Command::Couple(f) => {
            cmd_couple(&f.config, &f.out, &f.overrides.overrides())?;
            Ok(0)
        }
        Command::RateSweep(f) => {
            cmd_rate_sweep(&f.config, &f.out, f.lambdas, &f.overrides.overrides())?;
            Ok(0)
        }
        Command::Moments(f) => {
            cmd_moments(&f.config, &f.out, &f.overrides.overrides())?;
            Ok(0)
        }
        Command::UlaBias(f) => {
            let empirical = if f.closed_only { None } else { Some(f.empirical_steps) };
            cmd_ula_bias(&f.config, &f.out, f.lambdas, empirical, &f.overrides.overrides())?;
            Ok(0)
        }
        Command::Mixing(f) => {
            cmd_mixing(&f.config, &f.out, f.tau_max, f.r, f.s)?;
            Ok(0)
        }
        Command::Constants(f) => {
            let args = f.system.constants_args(f.p, f.kappa, f.epsilon);
            cmd_constants(&args, &f.out)?;
            Ok(0)
        }
        Command::W2(f) => {
            cmd_w2(&f.a, &f.b, f.method.as_deref(), f.out.as_deref())?;
            Ok(0)
        }
        Command::Plan(f) => {
            let args = PlanArgs {
                epsilon: f.epsilon,
                kappa: f.kappa,
                iid: f.iid,
                constants: f.system.constants_args(4, f.kappa.unwrap_or(1.0), f.epsilon),
                execute: f.execute,
                replicas: f.replicas,
                config: f.config,
            };
            let ok = cmd_plan(&args, &f.out)?;
            Ok(if ok { 0 } else { 4 })
        }
        Command::Verify(f) => {
            let level = Level::parse(&f.level)?;
            let all_pass = cmd_verify(level, f.seed, &f.out)?;
            Ok(if all_pass { 0 } else { 4 })
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
