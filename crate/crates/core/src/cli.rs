//! Command-line front end over the harness.
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 1 for
//! failures while running.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bandit::{gamma_theoretical, Algorithm};
use crate::error::Error;
use crate::harness::{
    eigencheck, run_experiment, t0_theoretical, write_eigen_report, write_results,
    EigencheckConfig, ExperimentConfig, OutputFormat,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sigbandit",
    version,
    about = "Signature-feature contextual bandit benchmarks"
)]
pub struct Cli {
    /// Print per-policy summaries.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run policies on a synthetic SDE environment.
    Simulate(RunArgs),
    /// Minimum-eigenvalue check of pruned signature Gram matrices.
    Eigencheck(EigenArgs),
    /// Run policies against recorded CSV windows and rewards.
    Replay(RunArgs),
    /// Evaluate the theoretical exploration coefficient and burn-in length.
    Diag(DiagArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (TOML, or JSON with a .json extension).
    #[arg(long)]
    pub config: PathBuf,
    /// Base seed; trial i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output directory (overrides the config's `output`).
    #[arg(long, env = "SIGBANDIT_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Only run the named policies (repeatable).
    #[arg(long = "policy")]
    pub policies: Vec<String>,
    /// Signature depth for every signature policy.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Exploration coefficient for every policy.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Observation noise standard deviation.
    #[arg(long = "noise-std")]
    pub noise_std: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub common: Common,
    /// Signature depths to check (repeatable; replaces the config list).
    #[arg(long = "depth")]
    pub depths: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Feature dimension d + m.
    #[arg(long)]
    pub dim: usize,
    /// Number of arms.
    #[arg(long = "K")]
    pub arms: usize,
    /// Horizon.
    #[arg(long = "T")]
    pub horizon: usize,
    /// Feature norm bound.
    #[arg(long = "B")]
    pub b: f64,
    #[arg(long)]
    pub delta: f64,
    /// Bound on the true parameter norm.
    #[arg(long = "S", default_value_t = 0.0)]
    pub s: f64,
    /// Gram eigenvalue lower bound; when given, the burn-in T0 is printed too.
    #[arg(long)]
    pub rho: Option<f64>,
}

/// Errors are split into configuration problems (exit 2) and run failures
/// (exit 1).
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BadConfig(_) | Error::Parse { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn load_experiment(args: &RunArgs) -> Result<ExperimentConfig, (i32, String)> {
    let c = &args.common;
    let mut cfg = ExperimentConfig::load(&c.config).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    if let Some(seed) = c.seed {
        cfg.base_seed = seed;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(n) = args.noise_std {
        cfg.env.noise_std = n;
    }
    if !args.policies.is_empty() {
        if let Some(missing) = args
            .policies
            .iter()
            .find(|n| !cfg.policies.iter().any(|p| &p.name == *n))
        {
            return Err((EXIT_CONFIG, format!("unknown policy {missing:?}")));
        }
        cfg.policies.retain(|p| args.policies.contains(&p.name));
    }
    for p in &mut cfg.policies {
        if let Some(g) = args.gamma {
            p.gamma = g;
        }
        if let (Some(n), Algorithm::DisSigUcb { depth }) = (args.depth, &mut p.algorithm) {
            *depth = n;
        }
    }
    cfg.validate().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    Ok(cfg)
}

fn output_dir(flag: &Option<PathBuf>, config: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| config.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(args: &RunArgs, replay: bool, verbose: bool) -> Result<(), (i32, String)> {
    let cfg = load_experiment(args)?;
    if cfg.env.is_replay() != replay {
        let msg = if replay {
            "`replay` needs an env.process of kind \"replay\""
        } else {
            "`simulate` needs a synthetic env.process; use `replay` for CSV data"
        };
        return Err((
            EXIT_CONFIG,
            format!("{}: {msg}", args.common.config.display()),
        ));
    }
    let out = run_experiment(&cfg, args.common.jobs).map_err(|e| (exit_code(&e), e.to_string()))?;
    println!(
        "{} trials completed, {} failed",
        out.trials.len(),
        out.failed.len()
    );
    for f in &out.failed {
        println!("  trial {} failed: {}", f.trial, f.error);
    }
    if verbose {
        for name in &out.policies {
            if let Some(row) = out.aggregate.rows.iter().rev().find(|r| &r.policy == name) {
                println!(
                    "  {name}: round {} cumulative regret median {:.4} [{:.4}, {:.4}]",
                    row.round, row.median, row.q25, row.q75
                );
            }
        }
    }
    let dir = output_dir(&args.common.out, &cfg.output);
    let paths =
        write_results(&out, args.common.format, &dir).map_err(|e| (EXIT_RUNTIME, e.to_string()))?;
    print_paths(&paths);
    if out.trials.is_empty() {
        return Err((EXIT_RUNTIME, "every trial failed".into()));
    }
    Ok(())
}

fn run_eigencheck(args: &EigenArgs, verbose: bool) -> Result<(), (i32, String)> {
    let c = &args.common;
    let mut cfg = EigencheckConfig::load(&c.config).map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    if let Some(seed) = c.seed {
        cfg.base_seed = seed;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if !args.depths.is_empty() {
        cfg.depths = args.depths.clone();
    }
    let report = eigencheck(&cfg.env, &cfg.depths, cfg.trials, cfg.base_seed, c.jobs)
        .map_err(|e| (exit_code(&e), e.to_string()))?;
    for &depth in &cfg.depths {
        let group: Vec<_> = report.stats.iter().filter(|s| s.depth == depth).collect();
        let positive = group.iter().filter(|s| s.rho_hat > 0.0).count();
        let b_hat = group.iter().map(|s| s.b_hat).fold(0.0, f64::max);
        println!(
            "depth {depth}: rho_hat > 0 in {positive}/{} trials, max B_hat {b_hat:.4}",
            group.len()
        );
        if verbose {
            if let Some(last) = report.aggregate.iter().rev().find(|r| r.depth == depth) {
                println!(
                    "  lambda_min at round {}: median {:.6e} [{:.6e}, {:.6e}]",
                    last.round, last.median, last.q25, last.q75
                );
            }
        }
    }
    let dir = output_dir(&c.out, &cfg.output);
    let paths =
        write_eigen_report(&report, c.format, &dir).map_err(|e| (EXIT_RUNTIME, e.to_string()))?;
    print_paths(&paths);
    Ok(())
}

fn run_diag(args: &DiagArgs) -> Result<(), (i32, String)> {
    let gamma = gamma_theoretical(
        args.dim,
        args.arms,
        args.horizon,
        args.b,
        args.delta,
        args.s,
    )
    .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    println!("gamma = {gamma:.6}");
    if let Some(rho) = args.rho {
        let t0 = t0_theoretical(args.b, rho, args.dim, args.horizon, args.delta)
            .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
        println!("T0 = {t0}");
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Simulate(a) => run(a, false, cli.verbose),
        Command::Replay(a) => run(a, true, cli.verbose),
        Command::Eigencheck(a) => run_eigencheck(a, cli.verbose),
        Command::Diag(a) => run_diag(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
