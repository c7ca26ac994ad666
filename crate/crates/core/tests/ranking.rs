use slicer_core::engine::{Protocol, Sampler, Simulation, SimulationConfig};
use slicer_core::trial::{median, run_seeds};
use slicer_core::{attribute_ranks, SliceSpec};

fn uniform_ranking(n: usize, c: usize, k: usize, cycles: u64) -> SimulationConfig {
    SimulationConfig {
        n,
        view_size: c,
        protocol: Protocol::Ranking,
        sampler: Sampler::Uniform,
        slices: SliceSpec::equal_width(k).unwrap(),
        cycles,
        ..Default::default()
    }
}

#[test]
fn rank_estimate_is_unbiased() {
    // The node never samples itself, so its estimate targets (rank - 1) / (n - 1).
    let (n, runs) = (50usize, 1000u64);
    let target_rank = 20usize;
    let mut estimates = Vec::with_capacity(runs as usize);
    for seed in 0..runs {
        let cfg = SimulationConfig {
            seed,
            ..uniform_ranking(n, 5, 10, 20)
        };
        let mut sim = Simulation::new(cfg).unwrap();
        for _ in 0..20 {
            sim.step();
        }
        let pop = sim.ranking_population().unwrap();
        let pairs: Vec<_> = pop.iter().map(|n| (n.id, n.attribute)).collect();
        let ranks = attribute_ranks(&pairs).unwrap();
        let node = pop
            .iter()
            .find(|node| ranks[&node.id] == target_rank)
            .unwrap();
        estimates.push(node.rank_estimate());
    }
    let mean = estimates.iter().sum::<f64>() / runs as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    let se = (var / runs as f64).sqrt();
    let expected = (target_rank - 1) as f64 / (n - 1) as f64;
    assert!(
        (mean - expected).abs() < 3.0 * se,
        "mean {mean} vs {expected} (se {se})"
    );
}

#[test]
fn nodes_near_a_boundary_receive_more_updates() {
    let (n, c, cycles) = (1000usize, 10usize, 100u64);
    let mut sim = Simulation::new(uniform_ranking(n, c, 2, cycles)).unwrap();
    for _ in 0..cycles {
        sim.step();
    }
    let pop = sim.ranking_population().unwrap();
    let pairs: Vec<_> = pop.iter().map(|n| (n.id, n.attribute)).collect();
    let ranks = attribute_ranks(&pairs).unwrap();
    let (mut near, mut far) = (Vec::new(), Vec::new());
    for node in pop.iter() {
        let updates = (node.seen() - c as u64 * cycles) as f64 / cycles as f64;
        let rank = ranks[&node.id] as f64 / n as f64;
        if (rank - 0.5).abs() < 0.25 {
            near.push(updates);
        } else {
            far.push(updates);
        }
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(
        avg(&near) > avg(&far),
        "near {} far {}",
        avg(&near),
        avg(&far)
    );
}

#[test]
fn ranking_keeps_improving() {
    let seeds: Vec<u64> = (1..=10).collect();
    let runs = run_seeds(&uniform_ranking(1000, 10, 100, 500), &seeds).unwrap();
    let at = |cycle: usize| median(&runs.iter().map(|r| r[cycle].sdm).collect::<Vec<_>>());
    let (s100, s250, s500) = (at(100), at(250), at(500));
    assert!(s500 < s250 && s250 < s100, "{s100} {s250} {s500}");
}
