//! Built-in desk-scale experiment sets, one per figure recipe name.

use slicer_core::engine::{ChurnSchedule, Concurrency, Protocol, Sampler};
use slicer_core::{SimulationConfig, SliceSpec};

pub const RECIPES: &[&str] = &["fig3", "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig5d"];

fn ordering(protocol: Protocol, cycles: u64) -> SimulationConfig {
    SimulationConfig {
        n: 1000,
        view_size: 20,
        slices: SliceSpec::equal_width(10).expect("10 slices"),
        protocol,
        cycles,
        ..Default::default()
    }
}

fn hundred_slices(protocol: Protocol, cycles: u64) -> SimulationConfig {
    SimulationConfig {
        n: 1000,
        view_size: 10,
        slices: SliceSpec::equal_width(100).expect("100 slices"),
        protocol,
        sampler: Sampler::Uniform,
        cycles,
        ..Default::default()
    }
}

/// `(experiment name, config)` pairs for `name`, or `None` if unknown.
pub fn recipe(name: &str) -> Option<Vec<(String, SimulationConfig)>> {
    let named = |suffix: &str, cfg: SimulationConfig| (format!("{name}-{suffix}"), cfg);
    let list = match name {
        "fig3" => vec![
            named("jk", ordering(Protocol::Jk, 500)),
            named("modjk", ordering(Protocol::ModJk, 500)),
        ],
        "fig4a" => {
            let mut v = Vec::new();
            for (p, pn) in [(Protocol::Jk, "jk"), (Protocol::ModJk, "modjk")] {
                for (c, cn) in [(Concurrency::Half, "half"), (Concurrency::Full, "full")] {
                    v.push(named(
                        &format!("{pn}-{cn}"),
                        SimulationConfig {
                            concurrency: c,
                            ..ordering(p, 200)
                        },
                    ));
                }
            }
            v
        }
        "fig4b" => vec![
            named("none", ordering(Protocol::ModJk, 200)),
            named(
                "full",
                SimulationConfig {
                    concurrency: Concurrency::Full,
                    ..ordering(Protocol::ModJk, 200)
                },
            ),
        ],
        "fig5a" => vec![
            named("ordering", hundred_slices(Protocol::ModJk, 500)),
            named("ranking", hundred_slices(Protocol::Ranking, 500)),
        ],
        "fig5b" => vec![
            named("uniform", hundred_slices(Protocol::Ranking, 500)),
            named(
                "views",
                SimulationConfig {
                    sampler: Sampler::CyclonVariant,
                    ..hundred_slices(Protocol::Ranking, 500)
                },
            ),
        ],
        "fig5c" => {
            let burst = |p| SimulationConfig {
                churn: ChurnSchedule::burst(),
                ..hundred_slices(p, 400)
            };
            vec![
                named("ordering", burst(Protocol::ModJk)),
                named("ranking", burst(Protocol::Ranking)),
            ]
        }
        "fig5d" => {
            let regular = |p| SimulationConfig {
                churn: ChurnSchedule::regular(),
                ..hundred_slices(p, 2000)
            };
            vec![
                named("ordering", regular(Protocol::ModJk)),
                named("ranking", regular(Protocol::Ranking)),
                named("window", regular(Protocol::RankingWindowed)),
            ]
        }
        _ => return None,
    };
    Some(list)
}
