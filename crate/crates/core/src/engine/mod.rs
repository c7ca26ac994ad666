//! Cycle-driven simulation kernel.
//!
//! Every cycle applies churn, then lets each live node run its active step
//! in a fresh seeded permutation, then delivers the messages that were held
//! back as overlapping, and finally snapshots the disorder metrics.
//! Non-overlapping messages take effect immediately at their sender's
//! position in the permutation; overlapping ones were built from the
//! sender's state at send time but are evaluated against the receiver's
//! state once every node has acted.

mod churn;
mod config;

pub use churn::{apply_churn, ChurnEvent, JOIN_ATTRIBUTE_STEP};
pub use config::{
    AttributeDistribution, ChurnMode, ChurnSchedule, Concurrency, Protocol, Sampler,
    SimulationConfig, ViewFreshness, CONFIG_KEYS,
};

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Attribute, NodeId, RankPoint};
use crate::error::{Error, Result};
use crate::metrics::{
    self, DisorderTracker, MessageCounters, MetricsRecord, SliceSample, TrackedNode, ValueSample,
};
use crate::ordering::{self, OrderingNode, SwapRequest};
use crate::population::Population;
use crate::ranking::{RankingNode, UpdMessage};
use crate::sampling::{cyclon_shuffle_step, sync_payloads, uniform_resample, Peer};

/// Independent generator streams derived from the run seed, so that e.g.
/// JK and mod-JK runs with one seed share attributes, values and bootstrap
/// views.
#[derive(Debug, Clone)]
struct Streams {
    setup: ChaCha8Rng,
    views: ChaCha8Rng,
    order: ChaCha8Rng,
    protocol: ChaCha8Rng,
    churn: ChaCha8Rng,
    delivery: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        Self {
            setup: stream(1),
            views: stream(2),
            order: stream(3),
            protocol: stream(4),
            churn: stream(5),
            delivery: stream(6),
        }
    }
}

#[derive(Debug, Clone)]
enum World {
    Ordering(Population<OrderingNode>),
    Ranking(Population<RankingNode>),
}

/// One simulation run, advanced a cycle at a time.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimulationConfig,
    world: World,
    tracker: DisorderTracker,
    streams: Streams,
    cycle: u64,
    last_counters: MessageCounters,
}

fn draw_attributes<R: Rng + ?Sized>(
    dist: AttributeDistribution,
    n: usize,
    rng: &mut R,
) -> Vec<Attribute> {
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let a = match dist {
            AttributeDistribution::Uniform { low, high } => rng.gen_range(low..high),
            AttributeDistribution::Exponential { mean } => {
                let u: f64 = 1.0 - rng.gen::<f64>();
                (-mean * u.ln()).floor() as u64
            }
        };
        if seen.insert(a) {
            out.push(Attribute(a));
        }
    }
    out
}

/// Uniform in `(0, 1]`, avoiding values in `taken`.
fn fresh_value<R: Rng + ?Sized>(taken: &mut HashSet<u64>, rng: &mut R) -> RankPoint {
    loop {
        let v = 1.0 - rng.gen::<f64>();
        if taken.insert(v.to_bits()) {
            return RankPoint::new(v).expect("1 - [0, 1) lies in (0, 1]");
        }
    }
}

fn refresh_view<P: Peer>(
    pop: &mut Population<P>,
    id: NodeId,
    cfg: &SimulationConfig,
    rng: &mut ChaCha8Rng,
) {
    match cfg.sampler {
        Sampler::CyclonVariant => {
            cyclon_shuffle_step(pop, id);
        }
        Sampler::Uniform => {
            let view = uniform_resample(pop, id, cfg.view_size, rng);
            if let Some(node) = pop.get_mut(id) {
                *node.view_mut() = view;
            }
        }
    }
    if cfg.view_freshness.refresh(cfg.concurrency) {
        sync_payloads(pop, id);
    }
}

fn overlapping(mode: Concurrency, rng: &mut ChaCha8Rng) -> bool {
    match mode {
        Concurrency::None => false,
        Concurrency::Half => rng.gen_bool(0.5),
        Concurrency::Full => true,
    }
}

fn ordering_nodes(pop: &Population<OrderingNode>, cfg: &SimulationConfig) -> Vec<TrackedNode> {
    pop.iter()
        .map(|n| TrackedNode {
            id: n.id,
            attribute: n.attribute,
            value: Some(n.random_value().get()),
            estimated_slice: n.effective_slice(&cfg.slices),
        })
        .collect()
}

fn ranking_nodes(pop: &Population<RankingNode>, cfg: &SimulationConfig) -> Vec<TrackedNode> {
    pop.iter()
        .map(|n| TrackedNode {
            id: n.id,
            attribute: n.attribute,
            value: None,
            estimated_slice: n.effective_slice(&cfg.slices),
        })
        .collect()
}

fn deliver_swap(
    pop: &mut Population<OrderingNode>,
    req: &SwapRequest,
    cfg: &SimulationConfig,
    tracker: &mut DisorderTracker,
    counters: &mut MessageCounters,
) {
    let Some((initiator, target)) = pop.pair_mut(req.from, req.to) else {
        counters.lost += 1;
        return;
    };
    let outcome = ordering::exchange(initiator, target, req, &cfg.slices);
    counters.sent += 1;
    counters.count_useless(&outcome);
    if outcome.swapped {
        tracker.on_swap(
            initiator.id,
            target.id,
            initiator.effective_slice(&cfg.slices),
            target.effective_slice(&cfg.slices),
        );
    }
}

fn deliver_upd(
    pop: &mut Population<RankingNode>,
    msg: &UpdMessage,
    cfg: &SimulationConfig,
    tracker: &mut DisorderTracker,
    counters: &mut MessageCounters,
) {
    let Some(node) = pop.get_mut(msg.to) else {
        counters.lost += 1;
        return;
    };
    node.process_upd(msg, &cfg.slices);
    tracker.on_estimate(node.id, node.effective_slice(&cfg.slices));
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let mut streams = Streams::new(config.seed);
        let attributes = draw_attributes(config.attributes, config.n, &mut streams.setup);
        let c = config.view_size;
        let mut tracker = DisorderTracker::new(&config.slices);

        let world = if config.protocol.is_ordering() {
            let mut taken = HashSet::with_capacity(config.n);
            let mut pop = Population::new();
            for &a in &attributes {
                let value = fresh_value(&mut taken, &mut streams.setup);
                pop.insert_with(|id| OrderingNode::new(id, a, value, c));
            }
            bootstrap(&mut pop, c, &mut streams.views);
            tracker.rebuild(&ordering_nodes(&pop, &config));
            World::Ordering(pop)
        } else {
            let mut pop = Population::new();
            for &a in &attributes {
                pop.insert_with(|id| new_ranking_node(&config, id, a));
            }
            bootstrap(&mut pop, c, &mut streams.views);
            tracker.rebuild(&ranking_nodes(&pop, &config));
            World::Ranking(pop)
        };

        Ok(Self {
            config,
            world,
            tracker,
            streams,
            cycle: 0,
            last_counters: MessageCounters::default(),
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    /// Number of completed cycles.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn ordering_population(&self) -> Option<&Population<OrderingNode>> {
        match &self.world {
            World::Ordering(pop) => Some(pop),
            World::Ranking(_) => None,
        }
    }

    pub fn ranking_population(&self) -> Option<&Population<RankingNode>> {
        match &self.world {
            World::Ranking(pop) => Some(pop),
            World::Ordering(_) => None,
        }
    }

    pub fn live_nodes(&self) -> usize {
        match &self.world {
            World::Ordering(pop) => pop.len(),
            World::Ranking(pop) => pop.len(),
        }
    }

    pub fn tracker(&self) -> &DisorderTracker {
        &self.tracker
    }

    /// Tracker rebuilt from the current state, for comparison with the
    /// incrementally maintained one.
    pub fn rebuilt_tracker(&self) -> DisorderTracker {
        let mut fresh = DisorderTracker::new(&self.config.slices);
        let nodes = match &self.world {
            World::Ordering(pop) => ordering_nodes(pop, &self.config),
            World::Ranking(pop) => ranking_nodes(pop, &self.config),
        };
        fresh.rebuild(&nodes);
        fresh
    }

    /// GDM recomputed from scratch.
    pub fn full_gdm(&self) -> Result<f64> {
        match &self.world {
            World::Ordering(pop) => {
                let samples: Vec<ValueSample> = pop
                    .iter()
                    .map(|n| ValueSample {
                        id: n.id,
                        attribute: n.attribute,
                        value: n.random_value().get(),
                    })
                    .collect();
                Ok(metrics::gdm(&samples))
            }
            World::Ranking(_) => Err(Error::NotApplicable("GDM")),
        }
    }

    /// SDM recomputed from scratch.
    pub fn full_sdm(&self) -> f64 {
        let samples: Vec<SliceSample> = match &self.world {
            World::Ordering(pop) => pop
                .iter()
                .map(|n| SliceSample {
                    id: n.id,
                    attribute: n.attribute,
                    estimated_slice: n.effective_slice(&self.config.slices),
                })
                .collect(),
            World::Ranking(pop) => pop
                .iter()
                .map(|n| SliceSample {
                    id: n.id,
                    attribute: n.attribute,
                    estimated_slice: n.effective_slice(&self.config.slices),
                })
                .collect(),
        };
        metrics::sdm(&samples, &self.config.slices)
    }

    pub fn record(&self) -> MetricsRecord {
        let c = self.last_counters;
        MetricsRecord {
            cycle: self.cycle,
            gdm: self.tracker.gdm(),
            sdm: self.tracker.sdm(),
            messages_sent: c.sent,
            useless_messages: c.useless,
            unsuccessful_swaps: c.unsuccessful_swaps,
            lost_messages: c.lost,
            deferred_messages: c.deferred,
            live_nodes: self.live_nodes(),
        }
    }

    /// Runs one cycle and returns its metrics.
    pub fn step(&mut self) -> MetricsRecord {
        self.cycle += 1;
        let cycle = self.cycle;
        let Self {
            config: cfg,
            world,
            tracker,
            streams,
            ..
        } = self;
        let mut counters = MessageCounters::default();

        match world {
            World::Ordering(pop) => {
                let mut taken: HashSet<u64> = if cfg.churn.is_event(cycle) {
                    pop.iter()
                        .map(|n| n.random_value().get().to_bits())
                        .collect()
                } else {
                    HashSet::new()
                };
                let event = apply_churn(
                    pop,
                    &cfg.churn,
                    cycle,
                    cfg.view_size,
                    &mut streams.churn,
                    |id, a, rng| {
                        OrderingNode::new(id, a, fresh_value(&mut taken, rng), cfg.view_size)
                    },
                );
                if !event.is_empty() {
                    tracker.rebuild(&ordering_nodes(pop, cfg));
                }
                ordering_cycle(pop, cfg, streams, tracker, &mut counters);
            }
            World::Ranking(pop) => {
                let event = apply_churn(
                    pop,
                    &cfg.churn,
                    cycle,
                    cfg.view_size,
                    &mut streams.churn,
                    |id, a, _| new_ranking_node(cfg, id, a),
                );
                if !event.is_empty() {
                    tracker.rebuild(&ranking_nodes(pop, cfg));
                }
                ranking_cycle(pop, cfg, streams, tracker, &mut counters);
            }
        }
        self.last_counters = counters;
        self.record()
    }

    /// Record for the initial state followed by one per cycle.
    pub fn run_to_end(&mut self) -> Vec<MetricsRecord> {
        let mut records = Vec::with_capacity(self.config.cycles as usize + 1);
        records.push(self.record());
        while self.cycle < self.config.cycles {
            records.push(self.step());
        }
        records
    }
}

fn new_ranking_node(cfg: &SimulationConfig, id: NodeId, a: Attribute) -> RankingNode {
    match cfg.protocol {
        Protocol::RankingWindowed => {
            RankingNode::windowed(id, a, cfg.view_size, cfg.window_capacity())
        }
        _ => RankingNode::new(id, a, cfg.view_size),
    }
}

fn bootstrap<P: Peer>(pop: &mut Population<P>, c: usize, rng: &mut ChaCha8Rng) {
    let ids = pop.live_ids().to_vec();
    for id in ids {
        let view = uniform_resample(pop, id, c, rng);
        if let Some(node) = pop.get_mut(id) {
            *node.view_mut() = view;
        }
    }
}

fn ordering_cycle(
    pop: &mut Population<OrderingNode>,
    cfg: &SimulationConfig,
    streams: &mut Streams,
    tracker: &mut DisorderTracker,
    counters: &mut MessageCounters,
) {
    let mut order = pop.live_ids().to_vec();
    order.shuffle(&mut streams.order);
    let mut held = Vec::new();
    for id in order {
        refresh_view(pop, id, cfg, &mut streams.views);
        let Some(node) = pop.get(id) else { continue };
        let target = match cfg.protocol {
            Protocol::Jk => ordering::select_target_jk(node, cfg.jk_target, &mut streams.protocol),
            _ => ordering::select_target_modjk(node),
        };
        let target = target.or_else(|| {
            cfg.idle_send
                .then(|| {
                    node.view
                        .entries()
                        .choose(&mut streams.protocol)
                        .map(|e| e.id)
                })
                .flatten()
        });
        let Some(target) = target else { continue };
        let req = ordering::send_swap_request(node, target);
        counters.sent += 1;
        if overlapping(cfg.concurrency, &mut streams.delivery) {
            counters.deferred += 1;
            held.push(req);
        } else {
            deliver_swap(pop, &req, cfg, tracker, counters);
        }
    }
    held.shuffle(&mut streams.delivery);
    for req in &held {
        deliver_swap(pop, req, cfg, tracker, counters);
    }
}

fn ranking_cycle(
    pop: &mut Population<RankingNode>,
    cfg: &SimulationConfig,
    streams: &mut Streams,
    tracker: &mut DisorderTracker,
    counters: &mut MessageCounters,
) {
    let mut order = pop.live_ids().to_vec();
    order.shuffle(&mut streams.order);
    let mut held = Vec::new();
    for id in order {
        refresh_view(pop, id, cfg, &mut streams.views);
        let Some(node) = pop.get_mut(id) else {
            continue;
        };
        let Some(msgs) = node.active_step(&cfg.slices, cfg.boundary_rule, &mut streams.protocol)
        else {
            continue;
        };
        tracker.on_estimate(node.id, node.effective_slice(&cfg.slices));
        for msg in msgs {
            counters.sent += 1;
            if overlapping(cfg.concurrency, &mut streams.delivery) {
                counters.deferred += 1;
                held.push(msg);
            } else {
                deliver_upd(pop, &msg, cfg, tracker, counters);
            }
        }
    }
    held.shuffle(&mut streams.delivery);
    for msg in &held {
        deliver_upd(pop, msg, cfg, tracker, counters);
    }
}

/// Runs `config` to completion.
pub fn run(config: &SimulationConfig) -> Result<Vec<MetricsRecord>> {
    Ok(Simulation::new(config.clone())?.run_to_end())
}
