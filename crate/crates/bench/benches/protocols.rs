use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slicer_core::analysis::{verify_theorem1_monte_carlo, z_quantile};
use slicer_core::engine::{Concurrency, Protocol, Sampler};
use slicer_core::{Simulation, SimulationConfig, SliceSpec};

fn config(protocol: Protocol, sampler: Sampler, k: usize, c: usize) -> SimulationConfig {
    SimulationConfig {
        n: 1000,
        view_size: c,
        slices: SliceSpec::equal_width(k).unwrap(),
        protocol,
        sampler,
        cycles: u64::MAX,
        ..Default::default()
    }
}

/// Times one cycle starting from a simulation already warmed up for `warm` cycles.
fn bench_cycle(c: &mut Criterion, name: &str, cfg: SimulationConfig, warm: usize) {
    let mut sim = Simulation::new(cfg).unwrap();
    for _ in 0..warm {
        sim.step();
    }
    c.bench_function(name, |b| {
        b.iter_batched_ref(
            || sim.clone(),
            |s| black_box(s.step()),
            BatchSize::LargeInput,
        )
    });
}

fn cycles(c: &mut Criterion) {
    bench_cycle(
        c,
        "jk cycle n=1000 c=20",
        config(Protocol::Jk, Sampler::CyclonVariant, 10, 20),
        5,
    );
    bench_cycle(
        c,
        "modjk cycle n=1000 c=20",
        config(Protocol::ModJk, Sampler::CyclonVariant, 10, 20),
        5,
    );
    let full = SimulationConfig {
        concurrency: Concurrency::Full,
        ..config(Protocol::ModJk, Sampler::CyclonVariant, 10, 20)
    };
    bench_cycle(c, "modjk cycle full concurrency", full, 5);
    bench_cycle(
        c,
        "ranking cycle uniform c=10",
        config(Protocol::Ranking, Sampler::Uniform, 100, 10),
        5,
    );
    bench_cycle(
        c,
        "ranking cycle cyclon c=10",
        config(Protocol::Ranking, Sampler::CyclonVariant, 100, 10),
        5,
    );
    bench_cycle(
        c,
        "windowed ranking cycle",
        config(Protocol::RankingWindowed, Sampler::Uniform, 100, 10),
        5,
    );
}

fn analysis(c: &mut Criterion) {
    c.bench_function("z_quantile", |b| {
        b.iter(|| z_quantile(black_box(0.05)).unwrap())
    });
    let spec = SliceSpec::equal_width(2).unwrap();
    c.bench_function("theorem check 100 trials", |b| {
        b.iter_batched(
            || ChaCha8Rng::seed_from_u64(9),
            |mut rng| verify_theorem1_monte_carlo(0.52, &spec, 0.05, 100, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, cycles, analysis);
criterion_main!(benches);
