//! Live-node directory indexed by id.

use crate::domain::NodeId;

/// Slot-per-id storage. Ids are handed out in increasing order and never
/// reused, so a departed node leaves an empty slot behind.
#[derive(Debug, Clone)]
pub struct Population<P> {
    slots: Vec<Option<P>>,
    live: Vec<NodeId>,
}

impl<P> Default for Population<P> {
    fn default() -> Self {
        Self {
            slots: Vec::new(),
            live: Vec::new(),
        }
    }
}

impl<P> Population<P> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates the next id and stores the node built for it.
    pub fn insert_with(&mut self, build: impl FnOnce(NodeId) -> P) -> NodeId {
        let id = NodeId(self.slots.len() as u64);
        self.slots.push(Some(build(id)));
        self.live.push(id);
        id
    }

    pub fn remove(&mut self, id: NodeId) -> Option<P> {
        let node = self.slots.get_mut(id.0 as usize)?.take()?;
        if let Ok(pos) = self.live.binary_search(&id) {
            self.live.remove(pos);
        }
        Some(node)
    }

    #[inline]
    pub fn get(&self, id: NodeId) -> Option<&P> {
        self.slots.get(id.0 as usize)?.as_ref()
    }

    #[inline]
    pub fn get_mut(&mut self, id: NodeId) -> Option<&mut P> {
        self.slots.get_mut(id.0 as usize)?.as_mut()
    }

    /// Mutable access to two distinct live nodes at once.
    pub fn pair_mut(&mut self, a: NodeId, b: NodeId) -> Option<(&mut P, &mut P)> {
        let (ia, ib) = (a.0 as usize, b.0 as usize);
        if ia == ib || ia >= self.slots.len() || ib >= self.slots.len() {
            return None;
        }
        let (first, second) = if ia < ib {
            let (lo, hi) = self.slots.split_at_mut(ib);
            (&mut lo[ia], &mut hi[0])
        } else {
            let (lo, hi) = self.slots.split_at_mut(ia);
            (&mut hi[0], &mut lo[ib])
        };
        Some((first.as_mut()?, second.as_mut()?))
    }

    #[inline]
    pub fn contains(&self, id: NodeId) -> bool {
        self.get(id).is_some()
    }

    /// Live ids in ascending order.
    pub fn live_ids(&self) -> &[NodeId] {
        &self.live
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &P> {
        self.slots.iter().filter_map(Option::as_ref)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut P> {
        self.slots.iter_mut().filter_map(Option::as_mut)
    }
}
