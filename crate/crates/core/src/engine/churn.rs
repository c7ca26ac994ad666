use rand::Rng;

use super::config::ChurnSchedule;
use crate::domain::{Attribute, NodeId};
use crate::population::Population;
use crate::sampling::{uniform_resample, Peer};

/// Largest step between consecutive joiner attributes.
pub const JOIN_ATTRIBUTE_STEP: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChurnEvent {
    pub departed: Vec<NodeId>,
    pub joined: Vec<NodeId>,
}

impl ChurnEvent {
    pub fn is_empty(&self) -> bool {
        self.departed.is_empty() && self.joined.is_empty()
    }
}

/// Replaces `ceil(rate * n)` nodes on event cycles.
///
/// Leavers are the lowest `(attribute, id)` nodes (or, with probability
/// `1 - correlation` each, a uniformly random node). Each joiner gets an
/// attribute above the current maximum by a uniform step in `[1, 100]` and
/// a uniform bootstrap view of capacity `view_size`.
pub fn apply_churn<P, R, F>(
    pop: &mut Population<P>,
    schedule: &ChurnSchedule,
    cycle: u64,
    view_size: usize,
    rng: &mut R,
    mut spawn: F,
) -> ChurnEvent
where
    P: Peer,
    R: Rng + ?Sized,
    F: FnMut(NodeId, Attribute, &mut R) -> P,
{
    let mut event = ChurnEvent::default();
    if !schedule.is_event(cycle) || pop.is_empty() {
        return event;
    }
    let count = schedule.replaced(pop.len()).min(pop.len());
    if count == 0 {
        return event;
    }

    let mut by_attribute: Vec<(Attribute, NodeId)> =
        pop.iter().map(|p| (p.attribute(), p.id())).collect();
    by_attribute.sort_unstable();
    let mut max_attribute = by_attribute.last().map(|&(a, _)| a.0).unwrap_or(0);

    for _ in 0..count {
        let pick = if schedule.correlation >= 1.0 || rng.gen_bool(schedule.correlation) {
            0
        } else {
            rng.gen_range(0..by_attribute.len())
        };
        let (_, id) = by_attribute.remove(pick);
        pop.remove(id);
        event.departed.push(id);
    }

    for _ in 0..count {
        max_attribute += rng.gen_range(1..=JOIN_ATTRIBUTE_STEP);
        let attribute = Attribute(max_attribute);
        let id = pop.insert_with(|id| spawn(id, attribute, rng));
        event.joined.push(id);
    }
    for &id in &event.joined {
        let view = uniform_resample(pop, id, view_size, rng);
        if let Some(node) = pop.get_mut(id) {
            *node.view_mut() = view;
        }
    }
    event
}
