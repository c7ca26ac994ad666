use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slicer_cli::config_file::read_config;
use slicer_cli::recipes::{recipe, RECIPES};
use slicer_cli::{
    apply_overrides, run_experiments, sweep, verify_lemma1, verify_theorem1, CliError,
    ExperimentSpec, VerifyOutcome, EXIT_USAGE, EXIT_VERIFY_FAIL,
};
use slicer_core::SimulationConfig;

const SEED_ENV: &str = "SLICER_SEED";

#[derive(Parser)]
#[command(
    name = "slicer",
    version,
    about = "Gossip-based distributed slicing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration or a named recipe over one or more seeds.
    Run {
        #[command(flatten)]
        common: Common,
        /// Built-in experiment set.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(RECIPES))]
        recipe: Option<String>,
    },
    /// Run one configuration for every value of a single config key.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Config key to vary.
        #[arg(long)]
        axis: String,
        /// Comma-separated values for the axis.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
    /// Monte-Carlo checks of the analytical bounds.
    Verify {
        #[command(subcommand)]
        which: Verify,
    },
}

#[derive(Args)]
struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed to run; repeat for several. Falls back to the config file, then SLICER_SEED.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Extra key=value override applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output file stem for a single-config run.
    #[arg(long, default_value = "run")]
    name: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Verify {
    /// Slice-size concentration bound.
    Lemma1 {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, env = SEED_ENV, default_value_t = 1)]
        seed: u64,
    },
    /// Messages needed to place a rank in the right slice with confidence 1 - alpha.
    Theorem1 {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        slices: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, env = SEED_ENV, default_value_t = 1)]
        seed: u64,
    },
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not a seed"))),
        Err(_) => Ok(None),
    }
}

fn parse_sets(sets: &[String]) -> Result<Vec<(String, String)>, CliError> {
    sets.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {s:?}")))
        })
        .collect()
}

/// Applies file values then `--set` pairs to `base` and resolves the seed list.
fn configure(
    common: &Common,
    base: SimulationConfig,
) -> Result<(SimulationConfig, Vec<u64>), CliError> {
    let mut cfg = base;
    let mut file_has_seed = false;
    if let Some(path) = &common.config {
        let pairs = read_config(path)?;
        file_has_seed = pairs.iter().any(|(k, _)| k == "seed");
        apply_overrides(&mut cfg, &pairs)?;
    }
    let sets = parse_sets(&common.sets)?;
    file_has_seed |= sets.iter().any(|(k, _)| k == "seed");
    apply_overrides(&mut cfg, &sets)?;
    let seeds = if !common.seeds.is_empty() {
        common.seeds.clone()
    } else if file_has_seed {
        vec![cfg.seed]
    } else if let Some(s) = env_seed()? {
        vec![s]
    } else {
        vec![cfg.seed]
    };
    Ok((cfg, seeds))
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run_command(common: &Common, recipe_name: Option<&str>) -> Result<(), CliError> {
    let bases = match recipe_name {
        Some(r) => recipe(r).ok_or_else(|| CliError::Usage(format!("unknown recipe {r:?}")))?,
        None => vec![(common.name.clone(), SimulationConfig::default())],
    };
    let specs = bases
        .into_iter()
        .map(|(name, base)| {
            let (config, seeds) = configure(common, base)?;
            Ok(ExperimentSpec {
                name,
                config,
                seeds,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    print_paths(&run_experiments(&specs, &common.out)?);
    Ok(())
}

fn sweep_command(common: &Common, axis: &str, values: &[String]) -> Result<(), CliError> {
    let values: Vec<String> = values
        .iter()
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    let (config, seeds) = configure(common, SimulationConfig::default())?;
    let spec = ExperimentSpec {
        name: common.name.clone(),
        config,
        seeds,
    };
    let path = sweep(&spec, axis, &values, &common.out)?;
    print_paths(&[path]);
    Ok(())
}

fn report(outcome: VerifyOutcome) -> ExitCode {
    print!("{}", outcome.report);
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAIL)
    }
}

fn fail(err: CliError) -> ExitCode {
    eprintln!("slicer: {err}");
    ExitCode::from(EXIT_USAGE)
}

fn finish(result: Result<(), CliError>) -> ExitCode {
    result.map_or_else(fail, |()| ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { common, recipe } => finish(run_command(&common, recipe.as_deref())),
        Command::Sweep {
            common,
            axis,
            values,
        } => finish(sweep_command(&common, &axis, &values)),
        Command::Verify { which } => {
            let outcome = match which {
                Verify::Lemma1 {
                    beta,
                    eps,
                    n,
                    p,
                    trials,
                    seed,
                } => verify_lemma1(beta, eps, n, p, trials, seed),
                Verify::Theorem1 {
                    p,
                    slices,
                    alpha,
                    trials,
                    seed,
                } => verify_theorem1(p, slices, alpha, trials, seed),
            };
            outcome.map_or_else(fail, report)
        }
    }
}
