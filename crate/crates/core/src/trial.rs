//! Multi-seed runs and per-cycle median aggregation.

use rayon::prelude::*;

use crate::engine::{run, SimulationConfig};
use crate::error::Result;
use crate::metrics::MetricsRecord;

/// Runs `config` once per seed in parallel. Results keep the seed order.
pub fn run_seeds(config: &SimulationConfig, seeds: &[u64]) -> Result<Vec<Vec<MetricsRecord>>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = config.clone();
            cfg.seed = seed;
            run(&cfg)
        })
        .collect()
}

/// Median of a non-empty slice; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

fn median_u64(values: impl Iterator<Item = u64>) -> u64 {
    let v: Vec<f64> = values.map(|x| x as f64).collect();
    median(&v).round() as u64
}

/// Cycle-by-cycle median across runs, truncated to the shortest run.
pub fn median_series(runs: &[Vec<MetricsRecord>]) -> Vec<MetricsRecord> {
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let at: Vec<&MetricsRecord> = runs.iter().map(|r| &r[i]).collect();
            let gdm: Option<Vec<f64>> = at.iter().map(|r| r.gdm).collect();
            let sdm: Vec<f64> = at.iter().map(|r| r.sdm).collect();
            MetricsRecord {
                cycle: at[0].cycle,
                gdm: gdm.map(|g| median(&g)),
                sdm: median(&sdm),
                messages_sent: median_u64(at.iter().map(|r| r.messages_sent)),
                useless_messages: median_u64(at.iter().map(|r| r.useless_messages)),
                unsuccessful_swaps: median_u64(at.iter().map(|r| r.unsuccessful_swaps)),
                lost_messages: median_u64(at.iter().map(|r| r.lost_messages)),
                deferred_messages: median_u64(at.iter().map(|r| r.deferred_messages)),
                live_nodes: median_u64(at.iter().map(|r| r.live_nodes as u64)) as usize,
            }
        })
        .collect()
}
