//! Rank estimation by sampling attribute values.
//!
//! A node counts how many of the attributes it encounters are not larger
//! than its own; the ratio estimates its normalized rank. Every cycle the
//! node scans its view and pushes its attribute to two neighbors: the one
//! whose rank estimate is closest to a slice boundary and a random one.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{Attribute, NodeId, SliceSpec};
use crate::sampling::{Peer, View};

/// FIFO of recent comparison outcomes (`true` = sample not above own attribute).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleWindow {
    buf: VecDeque<bool>,
    capacity: usize,
    lower: usize,
}

impl SampleWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "window capacity must be at least 1");
        Self {
            buf: VecDeque::with_capacity(capacity),
            capacity,
            lower: 0,
        }
    }

    pub fn push(&mut self, lower: bool) {
        if self.buf.len() == self.capacity {
            if let Some(true) = self.buf.pop_front() {
                self.lower -= 1;
            }
        }
        self.buf.push_back(lower);
        self.lower += usize::from(lower);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn lower_count(&self) -> usize {
        self.lower
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.buf.iter().copied()
    }

    pub fn ratio(&self) -> f64 {
        if self.buf.is_empty() {
            0.0
        } else {
            self.lower as f64 / self.buf.len() as f64
        }
    }
}

/// Which boundary `j1` selection measures a neighbor's estimate against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryRule {
    /// Each neighbor's own nearest boundary.
    #[default]
    PerNeighbor,
    /// The boundary nearest to the selecting node's estimate, for all neighbors.
    OwnBoundary,
}

#[derive(Debug, Clone)]
pub struct RankingNode {
    pub id: NodeId,
    pub attribute: Attribute,
    seen: u64,
    lower: u64,
    rank_estimate: f64,
    slice_estimate: Option<usize>,
    pub view: View,
    window: Option<SampleWindow>,
}

/// One-way `UPD(a_i)` message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdMessage {
    pub from: NodeId,
    pub to: NodeId,
    pub attribute: Attribute,
}

impl RankingNode {
    pub fn new(id: NodeId, attribute: Attribute, view_capacity: usize) -> Self {
        Self {
            id,
            attribute,
            seen: 0,
            lower: 0,
            rank_estimate: 0.0,
            slice_estimate: None,
            view: View::new(view_capacity),
            window: None,
        }
    }

    /// Same node, estimating from the last `capacity` samples only.
    pub fn windowed(
        id: NodeId,
        attribute: Attribute,
        view_capacity: usize,
        capacity: usize,
    ) -> Self {
        Self {
            window: Some(SampleWindow::new(capacity)),
            ..Self::new(id, attribute, view_capacity)
        }
    }

    /// Number of attribute values encountered.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Number of encountered values not larger than the own attribute.
    pub fn lower(&self) -> u64 {
        self.lower
    }

    pub fn rank_estimate(&self) -> f64 {
        self.rank_estimate
    }

    pub fn slice_estimate(&self) -> Option<usize> {
        self.slice_estimate
    }

    pub fn window(&self) -> Option<&SampleWindow> {
        self.window.as_ref()
    }

    /// Estimated slice; an estimate of 0, or none yet, maps to the first slice.
    pub fn effective_slice(&self, spec: &SliceSpec) -> usize {
        self.slice_estimate
            .unwrap_or_else(|| spec.slice_of_estimate(self.rank_estimate))
    }

    fn record(&mut self, other: Attribute) {
        let is_lower = other <= self.attribute;
        self.seen += 1;
        self.lower += u64::from(is_lower);
        if let Some(w) = &mut self.window {
            w.push(is_lower);
        }
    }

    fn refresh_estimate(&mut self, spec: &SliceSpec) {
        self.rank_estimate = match &self.window {
            Some(w) => w.ratio(),
            None if self.seen == 0 => 0.0,
            None => self.lower as f64 / self.seen as f64,
        };
        self.slice_estimate = Some(spec.slice_of_estimate(self.rank_estimate));
    }

    /// Active step after the view has been refreshed: count every view
    /// entry, pick the boundary-nearest and a random neighbor, update the
    /// estimate. Returns the two UPD messages, or `None` for an empty view.
    pub fn active_step<R: Rng + ?Sized>(
        &mut self,
        spec: &SliceSpec,
        rule: BoundaryRule,
        rng: &mut R,
    ) -> Option<[UpdMessage; 2]> {
        if self.view.is_empty() {
            return None;
        }
        let own_boundary = spec.nearest_boundary(self.rank_estimate);
        let mut dist_min = f64::INFINITY;
        let mut near = None;
        let attrs: Vec<Attribute> = self.view.entries().iter().map(|e| e.attribute).collect();
        for e in self.view.entries() {
            let dist = match rule {
                BoundaryRule::PerNeighbor => spec.boundary_distance(e.payload),
                BoundaryRule::OwnBoundary => {
                    own_boundary.map_or(f64::INFINITY, |b| (e.payload - b).abs())
                }
            };
            if dist < dist_min || near.is_none() {
                dist_min = dist;
                near = Some(e.id);
            }
        }
        for a in attrs {
            self.record(a);
        }
        let random = self.view.entries().choose(rng).map(|e| e.id)?;
        let near = near?;
        self.refresh_estimate(spec);
        let msg = |to| UpdMessage {
            from: self.id,
            to,
            attribute: self.attribute,
        };
        Some([msg(near), msg(random)])
    }

    /// Passive side: account for one received attribute.
    pub fn process_upd(&mut self, msg: &UpdMessage, spec: &SliceSpec) {
        self.record(msg.attribute);
        self.refresh_estimate(spec);
    }
}

impl Peer for RankingNode {
    fn id(&self) -> NodeId {
        self.id
    }
    fn attribute(&self) -> Attribute {
        self.attribute
    }
    fn payload(&self) -> f64 {
        self.rank_estimate
    }
    fn view(&self) -> &View {
        &self.view
    }
    fn view_mut(&mut self) -> &mut View {
        &mut self.view
    }
}
