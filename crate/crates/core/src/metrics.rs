//! Observer-side disorder measures and message counters.
//!
//! GDM compares attribute ranks with random-value ranks; SDM sums, over all
//! nodes, the distance between true and estimated slice in units of the
//! true slice width. Both are computed with global knowledge that nodes
//! never have.

use std::collections::HashMap;

use crate::domain::{attribute_ranks, Attribute, NodeId, SliceSpec};
use crate::ordering::ExchangeOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsRecord {
    pub cycle: u64,
    /// `None` for the ranking protocols, where no random sequence exists.
    pub gdm: Option<f64>,
    pub sdm: f64,
    pub messages_sent: u64,
    pub useless_messages: u64,
    pub unsuccessful_swaps: u64,
    /// Messages addressed to departed nodes.
    pub lost_messages: u64,
    pub deferred_messages: u64,
    pub live_nodes: usize,
}

/// Per-cycle message accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MessageCounters {
    pub sent: u64,
    pub useless: u64,
    pub unsuccessful_swaps: u64,
    pub lost: u64,
    /// Messages held back as overlapping and delivered at the end of the cycle.
    pub deferred: u64,
}

impl MessageCounters {
    /// Accounts for one delivered REQ and its ACK.
    pub fn count_useless(&mut self, outcome: &ExchangeOutcome) {
        self.useless += u64::from(outcome.request_useless) + u64::from(outcome.ack_useless);
        if !outcome.swapped {
            self.unsuccessful_swaps += 1;
        }
    }

    pub fn useless_fraction(&self) -> f64 {
        if self.sent == 0 {
            0.0
        } else {
            self.useless as f64 / self.sent as f64
        }
    }
}

impl std::ops::AddAssign for MessageCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.sent += rhs.sent;
        self.useless += rhs.useless;
        self.unsuccessful_swaps += rhs.unsuccessful_swaps;
        self.lost += rhs.lost;
        self.deferred += rhs.deferred;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueSample {
    pub id: NodeId,
    pub attribute: Attribute,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceSample {
    pub id: NodeId,
    pub attribute: Attribute,
    pub estimated_slice: usize,
}

/// Position (1-based) of each node when sorted by `(value, id)`.
pub fn value_ranks(samples: &[ValueSample]) -> HashMap<NodeId, usize> {
    let mut order: Vec<&ValueSample> = samples.iter().collect();
    order.sort_unstable_by(|a, b| a.value.total_cmp(&b.value).then(a.id.cmp(&b.id)));
    order
        .iter()
        .enumerate()
        .map(|(pos, s)| (s.id, pos + 1))
        .collect()
}

/// Global disorder measure `(1/n) * sum (alpha_i - rho_i)^2`.
pub fn gdm(samples: &[ValueSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let pairs: Vec<(NodeId, Attribute)> = samples.iter().map(|s| (s.id, s.attribute)).collect();
    let alpha = attribute_ranks(&pairs).expect("unique live ids");
    let rho = value_ranks(samples);
    let sum: u64 = samples
        .iter()
        .map(|s| {
            let d = alpha[&s.id] as i64 - rho[&s.id] as i64;
            (d * d) as u64
        })
        .sum();
    sum as f64 / samples.len() as f64
}

/// True slice of every node from its attribute rank.
pub fn true_slices(pairs: &[(NodeId, Attribute)], spec: &SliceSpec) -> HashMap<NodeId, usize> {
    let n = pairs.len() as f64;
    attribute_ranks(pairs)
        .expect("unique live ids")
        .into_iter()
        .map(|(id, rank)| (id, spec.slice_of_estimate(rank as f64 / n)))
        .collect()
}

/// `|mid(true) - mid(est)| / width(true)`.
pub fn slice_distance(spec: &SliceSpec, true_slice: usize, estimated: usize) -> f64 {
    let (l, u) = spec.interval(true_slice);
    let (le, ue) = spec.interval(estimated);
    ((u + l) / 2.0 - (ue + le) / 2.0).abs() / (u - l)
}

/// Slice disorder measure over the live population.
pub fn sdm(samples: &[SliceSample], spec: &SliceSpec) -> f64 {
    let pairs: Vec<(NodeId, Attribute)> = samples.iter().map(|s| (s.id, s.attribute)).collect();
    let truth = true_slices(&pairs, spec);
    samples
        .iter()
        .map(|s| slice_distance(spec, truth[&s.id], s.estimated_slice))
        .sum()
}

/// Incrementally maintained GDM and SDM.
///
/// GDM is kept as the exact integer `sum (alpha - rho)^2`; SDM as a
/// histogram over (true slice, estimated slice) pairs. Value swaps and
/// estimate changes update both in O(1); churn requires a rebuild.
#[derive(Debug, Clone)]
pub struct DisorderTracker {
    spec: SliceSpec,
    weights: Vec<f64>,
    // Indexed by node id; 0 marks an absent node.
    true_slice: Vec<u32>,
    est_slice: Vec<u32>,
    alpha: Vec<u32>,
    rho: Vec<u32>,
    histogram: Vec<u64>,
    squared_gap: u64,
    live: usize,
    ordering: bool,
}

/// One live node as seen by [`DisorderTracker::rebuild`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedNode {
    pub id: NodeId,
    pub attribute: Attribute,
    /// Random value for the ordering protocols.
    pub value: Option<f64>,
    pub estimated_slice: usize,
}

impl DisorderTracker {
    pub fn new(spec: &SliceSpec) -> Self {
        let k = spec.count();
        let mut weights = vec![0.0; k * k];
        for t in 1..=k {
            for e in 1..=k {
                weights[(t - 1) * k + (e - 1)] = slice_distance(spec, t, e);
            }
        }
        Self {
            spec: spec.clone(),
            weights,
            true_slice: Vec::new(),
            est_slice: Vec::new(),
            alpha: Vec::new(),
            rho: Vec::new(),
            histogram: vec![0; k * k],
            squared_gap: 0,
            live: 0,
            ordering: false,
        }
    }

    fn cell(&self, t: u32, e: u32) -> usize {
        (t as usize - 1) * self.spec.count() + (e as usize - 1)
    }

    /// Recomputes everything from scratch. Either all nodes carry a value
    /// (ordering) or none does (ranking).
    pub fn rebuild(&mut self, nodes: &[TrackedNode]) {
        let max_id = nodes.iter().map(|n| n.id.0 as usize + 1).max().unwrap_or(0);
        self.true_slice = vec![0; max_id];
        self.est_slice = vec![0; max_id];
        self.alpha = vec![0; max_id];
        self.rho = vec![0; max_id];
        self.histogram.iter_mut().for_each(|c| *c = 0);
        self.live = nodes.len();
        self.ordering = !nodes.is_empty() && nodes.iter().all(|n| n.value.is_some());

        let pairs: Vec<(NodeId, Attribute)> = nodes.iter().map(|n| (n.id, n.attribute)).collect();
        let ranks = attribute_ranks(&pairs).expect("unique live ids");
        let n = nodes.len() as f64;
        for node in nodes {
            let i = node.id.0 as usize;
            let rank = ranks[&node.id];
            self.alpha[i] = rank as u32;
            self.true_slice[i] = self.spec.slice_of_estimate(rank as f64 / n) as u32;
            self.est_slice[i] = node.estimated_slice as u32;
            let c = self.cell(self.true_slice[i], self.est_slice[i]);
            self.histogram[c] += 1;
        }
        self.squared_gap = 0;
        if self.ordering {
            let samples: Vec<ValueSample> = nodes
                .iter()
                .map(|n| ValueSample {
                    id: n.id,
                    attribute: n.attribute,
                    value: n.value.unwrap_or_default(),
                })
                .collect();
            for (id, r) in value_ranks(&samples) {
                let i = id.0 as usize;
                self.rho[i] = r as u32;
                let d = self.alpha[i] as i64 - r as i64;
                self.squared_gap += (d * d) as u64;
            }
        }
    }

    fn gap(&self, i: usize) -> u64 {
        let d = self.alpha[i] as i64 - self.rho[i] as i64;
        (d * d) as u64
    }

    /// Nodes `a` and `b` exchanged their (distinct) random values.
    pub fn on_swap(&mut self, a: NodeId, b: NodeId, est_a: usize, est_b: usize) {
        let (ia, ib) = (a.0 as usize, b.0 as usize);
        if self.ordering {
            self.squared_gap -= self.gap(ia) + self.gap(ib);
            self.rho.swap(ia, ib);
            self.squared_gap += self.gap(ia) + self.gap(ib);
        }
        self.on_estimate(a, est_a);
        self.on_estimate(b, est_b);
    }

    pub fn on_estimate(&mut self, id: NodeId, estimated: usize) {
        let i = id.0 as usize;
        let old = self.cell(self.true_slice[i], self.est_slice[i]);
        self.histogram[old] -= 1;
        self.est_slice[i] = estimated as u32;
        let new = self.cell(self.true_slice[i], self.est_slice[i]);
        self.histogram[new] += 1;
    }

    pub fn gdm(&self) -> Option<f64> {
        if !self.ordering {
            return None;
        }
        Some(self.squared_gap as f64 / self.live as f64)
    }

    pub fn sdm(&self) -> f64 {
        self.histogram
            .iter()
            .zip(&self.weights)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &w)| c as f64 * w)
            .sum()
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn squared_gap(&self) -> Option<u64> {
        self.ordering.then_some(self.squared_gap)
    }
}
