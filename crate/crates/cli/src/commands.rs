use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use slicer_core::analysis::{
    lemma1_contract, lemma1_min_slice_length, verify_lemma1_monte_carlo,
    verify_theorem1_monte_carlo, SliceSizeQuery, THEOREM1_SLACK,
};
use slicer_core::engine::CONFIG_KEYS;
use slicer_core::trial::{median_series, run_seeds};
use slicer_core::{run, Error, SimulationConfig, SliceSpec};

use crate::config_file::ExperimentSpec;
use crate::csv;
use crate::CliError;

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn seed_list(seeds: &[u64]) -> String {
    seeds
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Runs every spec over its seeds and writes one CSV per seed plus a
/// per-cycle median CSV. Returns the written paths.
pub fn run_experiments(specs: &[ExperimentSpec], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    for spec in specs {
        spec.validate()?;
    }
    ensure_dir(out)?;
    let mut written = Vec::new();
    for spec in specs {
        let runs = run_seeds(&spec.config, &spec.seeds)?;
        for (seed, records) in spec.seeds.iter().zip(&runs) {
            let head = csv::header(
                &format!("slicer run {}", spec.name),
                &spec.config,
                &[format!("seed={seed}")],
            );
            let path = out.join(format!("{}-seed{seed}.csv", spec.name));
            written.push(write(path, &csv::table(&head, records))?);
        }
        let head = csv::header(
            &format!("slicer run {} (per-cycle median over seeds)", spec.name),
            &spec.config,
            &[format!("seeds={}", seed_list(&spec.seeds))],
        );
        let path = out.join(format!("{}-median.csv", spec.name));
        written.push(write(path, &csv::table(&head, &median_series(&runs)))?);
    }
    Ok(written)
}

/// Runs `spec` once per `(value, seed)` with `axis` set to each value and
/// writes a long-format CSV with the axis value as its first column.
pub fn sweep(
    spec: &ExperimentSpec,
    axis: &str,
    values: &[String],
    out: &Path,
) -> Result<PathBuf, CliError> {
    if axis == "seed" || !CONFIG_KEYS.contains(&axis) {
        return Err(CliError::Usage(format!(
            "unknown sweep axis {axis:?}; expected one of: {}",
            CONFIG_KEYS
                .iter()
                .filter(|k| **k != "seed")
                .copied()
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    spec.validate()?;
    let configs = values
        .iter()
        .map(|v| {
            let mut cfg = spec.config.clone();
            cfg.set(axis, v)?;
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<Vec<SimulationConfig>, Error>>()?;

    let jobs: Vec<(usize, u64)> = (0..values.len())
        .flat_map(|i| spec.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, seed)| {
            run(&SimulationConfig {
                seed,
                ..configs[i].clone()
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    ensure_dir(out)?;
    let mut text = csv::header(
        &format!("slicer sweep {} over {axis}", spec.name),
        &spec.config,
        &[
            format!("axis={axis}"),
            format!("values={}", values.join(",")),
            format!("seeds={}", seed_list(&spec.seeds)),
        ],
    );
    let _ = writeln!(text, "{axis},seed,{}", csv::COLUMNS);
    for (&(i, seed), records) in jobs.iter().zip(&results) {
        for r in records {
            let _ = writeln!(text, "{},{seed},{}", values[i], csv::row(r));
        }
    }
    write(out.join(format!("{}-sweep-{axis}.csv", spec.name)), &text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub report: String,
    pub pass: bool,
}

fn refuse(err: Error) -> CliError {
    match err {
        Error::Precondition(msg) => {
            CliError::Usage(format!("refused: {msg}; the bound makes no claim there"))
        }
        Error::OnBoundary => CliError::Usage(
            "refused: the rank lies exactly on a slice boundary, where no finite message count suffices".into(),
        ),
        other => CliError::Config(other),
    }
}

pub fn verify_lemma1(
    beta: f64,
    epsilon: f64,
    n: u64,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<VerifyOutcome, CliError> {
    let threshold = lemma1_min_slice_length(beta, epsilon, n)?;
    let query = SliceSizeQuery {
        beta,
        epsilon,
        n,
        p,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frac = verify_lemma1_monte_carlo(&query, trials, &mut rng).map_err(refuse)?;
    let required = lemma1_contract(epsilon, trials);
    let pass = frac >= required;
    let mut report = String::new();
    let _ = writeln!(report, "minimum slice length: {threshold:.9}");
    let _ = writeln!(report, "slice length p: {p}");
    let _ = writeln!(
        report,
        "in-bounds fraction: {frac:.6} over {trials} trials (seed {seed})"
    );
    let _ = writeln!(report, "required: >= {required:.6}");
    let _ = writeln!(report, "{}", if pass { "PASS" } else { "FAIL" });
    Ok(VerifyOutcome { report, pass })
}

pub fn verify_theorem1(
    p: f64,
    slices: usize,
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<VerifyOutcome, CliError> {
    let spec = SliceSpec::equal_width(slices)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = verify_theorem1_monte_carlo(p, &spec, alpha, trials, &mut rng).map_err(refuse)?;
    let required = 1.0 - alpha - THEOREM1_SLACK;
    let pass = out.correct_fraction >= required;
    let mut report = String::new();
    let _ = writeln!(report, "distance to nearest boundary: {}", out.distance);
    let _ = writeln!(report, "required messages: {}", out.messages);
    let _ = writeln!(
        report,
        "correct-slice fraction: {:.6} over {trials} trials (seed {seed})",
        out.correct_fraction
    );
    let _ = writeln!(report, "required: >= {required:.6}");
    let _ = writeln!(report, "{}", if pass { "PASS" } else { "FAIL" });
    Ok(VerifyOutcome { report, pass })
}
