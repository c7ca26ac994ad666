//! Peer sampling: the full-view Cyclon variant and an ideal uniform sampler.
//!
//! Both protocol families keep a bounded view of neighbor descriptors. Each
//! descriptor carries the neighbor's attribute and a protocol payload (the
//! random value for ordering, the rank estimate for ranking) as it was when
//! the descriptor was created; payloads are not refreshed in place.

use rand::Rng;

use crate::domain::{Attribute, NodeId};
use crate::population::Population;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewEntry {
    pub id: NodeId,
    pub age: u32,
    pub attribute: Attribute,
    pub payload: f64,
}

/// Bounded neighbor set, kept sorted by ascending id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct View {
    entries: Vec<ViewEntry>,
    capacity: usize,
}

impl View {
    pub fn new(capacity: usize) -> Self {
        Self {
            entries: Vec::with_capacity(capacity),
            capacity,
        }
    }

    /// Builds a view from arbitrary entries, applying the usual merge rules
    /// (no owner, one entry per id, youngest first up to capacity).
    pub fn from_entries(owner: NodeId, capacity: usize, entries: &[ViewEntry]) -> Self {
        let mut view = Self::new(capacity);
        view.merge(owner, entries);
        view
    }

    pub fn entries(&self) -> &[ViewEntry] {
        &self.entries
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<&ViewEntry> {
        self.entries
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.get(id).is_some()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    pub fn remove(&mut self, id: NodeId) -> Option<ViewEntry> {
        let pos = self.entries.binary_search_by_key(&id, |e| e.id).ok()?;
        Some(self.entries.remove(pos))
    }

    /// Entry with the largest age, smaller id on ties.
    pub fn oldest(&self) -> Option<&ViewEntry> {
        // Entries are id-sorted, so keeping the first maximum gives the id tie-break.
        self.entries
            .iter()
            .fold(None, |best: Option<&ViewEntry>, e| match best {
                Some(b) if b.age >= e.age => Some(b),
                _ => Some(e),
            })
    }

    /// Replaces each entry's payload with `current(id)` where it returns a value.
    pub fn refresh_payloads(&mut self, mut current: impl FnMut(NodeId) -> Option<f64>) {
        for e in &mut self.entries {
            if let Some(p) = current(e.id) {
                e.payload = p;
            }
        }
    }

    pub fn age_all(&mut self) {
        for e in &mut self.entries {
            e.age = e.age.saturating_add(1);
        }
    }

    /// Merges `incoming` into the view: drops the owner, keeps the younger
    /// entry per id (the incoming one on equal age), then retains the
    /// `capacity` youngest (smaller id first).
    pub fn merge(&mut self, owner: NodeId, incoming: &[ViewEntry]) {
        let mut all: Vec<ViewEntry> = Vec::with_capacity(self.entries.len() + incoming.len());
        all.extend_from_slice(incoming);
        all.extend_from_slice(&self.entries);
        all.retain(|e| e.id != owner);
        all.sort_by_key(|e| (e.id, e.age));
        all.dedup_by_key(|e| e.id);
        if all.len() > self.capacity {
            all.sort_unstable_by_key(|e| (e.age, e.id));
            all.truncate(self.capacity);
            all.sort_unstable_by_key(|e| e.id);
        }
        self.entries = all;
    }

    /// Replaces the view with `received` after sending every entry away.
    /// Entries naming the owner are discarded, a duplicate keeps its younger
    /// copy, and slots `received` leaves free are refilled from the previous
    /// entries, youngest first, then from `fallback`.
    pub fn absorb(&mut self, owner: NodeId, received: &[ViewEntry], fallback: &[ViewEntry]) {
        let old = std::mem::take(&mut self.entries);
        let mut all: Vec<(ViewEntry, u8)> = received
            .iter()
            .map(|&e| (e, 0))
            .chain(old.into_iter().map(|e| (e, 1)))
            .chain(fallback.iter().map(|&e| (e, 2)))
            .filter(|(e, _)| e.id != owner)
            .collect();
        all.sort_by_key(|(e, src)| (e.id, e.age, *src));
        all.dedup_by(|(a, a_src), (b, b_src)| {
            let dup = a.id == b.id;
            if dup {
                *b_src = (*b_src).min(*a_src);
            }
            dup
        });
        if all.len() > self.capacity {
            all.sort_unstable_by_key(|(e, src)| (*src, e.age, e.id));
            all.truncate(self.capacity);
        }
        self.entries = all.into_iter().map(|(e, _)| e).collect();
        self.entries.sort_unstable_by_key(|e| e.id);
    }
}

/// Anything that owns a view and can describe itself to neighbors.
pub trait Peer {
    fn id(&self) -> NodeId;
    fn attribute(&self) -> Attribute;
    fn payload(&self) -> f64;
    fn view(&self) -> &View;
    fn view_mut(&mut self) -> &mut View;

    /// Fresh self-descriptor (age 0) advertised during a shuffle.
    fn descriptor(&self) -> ViewEntry {
        ViewEntry {
            id: self.id(),
            age: 0,
            attribute: self.attribute(),
            payload: self.payload(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ShuffleOutcome {
    /// Partner the exchange happened with; `None` for an isolated node.
    pub partner: Option<NodeId>,
    /// Stale entries naming departed nodes, dropped while picking a partner.
    pub dropped: usize,
}

/// One active step of the Cyclon variant that exchanges whole views.
///
/// The initiator ages its entries, removes its oldest neighbor `q` and
/// sends `q` every remaining entry plus a fresh self-descriptor; `q`
/// answers with its entire view. Each side then holds what it received,
/// topped up with its own previous entries; the initiator falls back on
/// `q` itself when that still leaves a slot free. Entries naming departed
/// nodes are discarded when selected as partner.
pub fn cyclon_shuffle_step<P: Peer>(pop: &mut Population<P>, initiator: NodeId) -> ShuffleOutcome {
    let mut outcome = ShuffleOutcome::default();
    let partner = loop {
        let Some(node) = pop.get(initiator) else {
            return outcome;
        };
        let Some(candidate) = node.view().oldest().map(|e| e.id) else {
            return outcome;
        };
        if pop.contains(candidate) {
            break candidate;
        }
        if let Some(node) = pop.get_mut(initiator) {
            node.view_mut().remove(candidate);
        }
        outcome.dropped += 1;
    };

    let Some((me, other)) = pop.pair_mut(initiator, partner) else {
        return outcome;
    };
    me.view_mut().age_all();
    me.view_mut().remove(partner);
    let mut from_me: Vec<ViewEntry> = me.view().entries().to_vec();
    from_me.push(me.descriptor());
    let from_other: Vec<ViewEntry> = other.view().entries().to_vec();

    other.view_mut().absorb(partner, &from_me, &[]);
    me.view_mut()
        .absorb(initiator, &from_other, &[other.descriptor()]);

    outcome.partner = Some(partner);
    outcome
}

/// Brings the payloads in `owner`'s view up to date with the neighbors'
/// current state. Entries naming departed nodes are left untouched.
pub fn sync_payloads<P: Peer>(pop: &mut Population<P>, owner: NodeId) {
    let Some(node) = pop.get(owner) else { return };
    let current: Vec<Option<f64>> = node
        .view()
        .ids()
        .map(|id| pop.get(id).map(Peer::payload))
        .collect();
    if let Some(node) = pop.get_mut(owner) {
        let mut it = current.into_iter();
        node.view_mut().refresh_payloads(|_| it.next().flatten());
    }
}

/// A view of up to `c` distinct live nodes other than `owner`, drawn
/// uniformly without replacement, with ground-truth attribute and payload.
pub fn uniform_resample<P: Peer, R: Rng + ?Sized>(
    pop: &Population<P>,
    owner: NodeId,
    c: usize,
    rng: &mut R,
) -> View {
    let live = pop.live_ids();
    let self_pos = live.binary_search(&owner).ok();
    let others = live.len() - usize::from(self_pos.is_some());
    let take = c.min(others);
    let mut entries = Vec::with_capacity(take);
    for idx in rand::seq::index::sample(rng, others, take) {
        let idx = match self_pos {
            Some(p) if idx >= p => idx + 1,
            _ => idx,
        };
        let node = pop.get(live[idx]).expect("live id has a slot");
        entries.push(node.descriptor());
    }
    entries.sort_unstable_by_key(|e| e.id);
    View {
        entries,
        capacity: c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[derive(Debug, Clone)]
    struct Stub {
        id: NodeId,
        attribute: Attribute,
        payload: f64,
        view: View,
    }

    impl Peer for Stub {
        fn id(&self) -> NodeId {
            self.id
        }
        fn attribute(&self) -> Attribute {
            self.attribute
        }
        fn payload(&self) -> f64 {
            self.payload
        }
        fn view(&self) -> &View {
            &self.view
        }
        fn view_mut(&mut self) -> &mut View {
            &mut self.view
        }
    }

    fn entry(id: u64, age: u32) -> ViewEntry {
        ViewEntry {
            id: NodeId(id),
            age,
            attribute: Attribute(id * 10),
            payload: id as f64 / 10.0,
        }
    }

    /// Nodes 1..=count; slot 0 is allocated and removed so ids match the labels.
    fn network(count: u64, c: usize) -> Population<Stub> {
        let mut pop = Population::new();
        for _ in 0..=count {
            pop.insert_with(|id| Stub {
                id,
                attribute: Attribute(id.0 * 10),
                payload: id.0 as f64 / 10.0,
                view: View::new(c),
            });
        }
        pop.remove(NodeId(0));
        pop
    }

    #[test]
    fn partner_is_oldest_entry() {
        let view = View::from_entries(NodeId(1), 2, &[entry(2, 5), entry(3, 1)]);
        assert_eq!(view.oldest().unwrap().id, NodeId(2));
        let tie = View::from_entries(NodeId(1), 3, &[entry(4, 2), entry(3, 2), entry(2, 0)]);
        assert_eq!(tie.oldest().unwrap().id, NodeId(3));
    }

    #[test]
    fn merge_rules() {
        let mut view = View::from_entries(NodeId(1), 3, &[entry(2, 4), entry(3, 1), entry(4, 7)]);
        view.merge(
            NodeId(1),
            &[entry(1, 0), entry(2, 0), entry(5, 1), entry(6, 9)],
        );
        // Union without owner: 2@0, 3@1, 4@7, 5@1, 6@9 -> youngest three.
        let ids: Vec<u64> = view.ids().map(|id| id.0).collect();
        assert_eq!(ids, vec![2, 3, 5]);
        assert_eq!(view.get(NodeId(2)).unwrap().age, 0);
    }

    #[test]
    fn absorb_rules() {
        let mut view = View::from_entries(NodeId(1), 3, &[entry(2, 4), entry(3, 1), entry(4, 7)]);
        view.absorb(
            NodeId(1),
            &[entry(1, 0), entry(2, 6), entry(5, 2)],
            &[entry(8, 0)],
        );
        // Received 2 and 5 (self dropped); 2 keeps the younger old copy; one
        // free slot refilled with the youngest remaining old entry, 3.
        let got: Vec<(u64, u32)> = view.entries().iter().map(|e| (e.id.0, e.age)).collect();
        assert_eq!(got, vec![(2, 4), (3, 1), (5, 2)]);

        let mut full = View::from_entries(NodeId(1), 2, &[entry(9, 0)]);
        full.absorb(NodeId(1), &[entry(2, 3), entry(3, 1), entry(4, 2)], &[]);

        let mut short = View::from_entries(NodeId(1), 3, &[entry(2, 1)]);
        short.absorb(NodeId(1), &[entry(1, 2), entry(2, 5)], &[entry(7, 0)]);
        let got: Vec<(u64, u32)> = short.entries().iter().map(|e| (e.id.0, e.age)).collect();
        assert_eq!(got, vec![(2, 1), (7, 0)]);
        let ids: Vec<u64> = full.ids().map(|id| id.0).collect();
        assert_eq!(ids, vec![3, 4]);
    }

    #[test]
    fn hand_simulated_exchange() {
        let mut pop = network(4, 3);
        pop.get_mut(NodeId(1)).unwrap().view =
            View::from_entries(NodeId(1), 3, &[entry(2, 4), entry(3, 1), entry(4, 0)]);
        pop.get_mut(NodeId(2)).unwrap().view =
            View::from_entries(NodeId(2), 3, &[entry(1, 3), entry(3, 5)]);
        pop.get_mut(NodeId(1)).unwrap().payload = 0.55;

        let out = cyclon_shuffle_step(&mut pop, NodeId(1));
        assert_eq!(out.partner, Some(NodeId(2)));

        // Node 1 ages to {2@5, 3@2, 4@1}, drops 2 and sends {3@2, 4@1, 1@0}.
        // It receives {1@3, 3@5}: self dropped, its own younger 3@2 kept, 4
        // refilled, and the last slot goes to 2 itself.
        let v1: Vec<(u64, u32)> = pop
            .get(NodeId(1))
            .unwrap()
            .view
            .entries()
            .iter()
            .map(|e| (e.id.0, e.age))
            .collect();
        assert_eq!(v1, vec![(2, 0), (3, 2), (4, 1)]);
        let v2 = pop.get(NodeId(2)).unwrap().view.entries().to_vec();
        assert_eq!(
            v2.iter().map(|e| (e.id.0, e.age)).collect::<Vec<_>>(),
            vec![(1, 0), (3, 2), (4, 1)]
        );
        assert_eq!(v2[0].payload, 0.55);
        assert!(pop.get(NodeId(3)).unwrap().view.is_empty());
    }

    #[test]
    fn isolated_node_is_noop() {
        let mut pop = network(2, 2);
        let out = cyclon_shuffle_step(&mut pop, NodeId(1));
        assert_eq!(out, ShuffleOutcome::default());
    }

    #[test]
    fn departed_partner_is_dropped() {
        let mut pop = network(3, 2);
        pop.get_mut(NodeId(1)).unwrap().view =
            View::from_entries(NodeId(1), 2, &[entry(2, 9), entry(3, 1)]);
        pop.get_mut(NodeId(3)).unwrap().view = View::from_entries(NodeId(3), 2, &[entry(1, 0)]);
        pop.remove(NodeId(2));
        let out = cyclon_shuffle_step(&mut pop, NodeId(1));
        assert_eq!(out.partner, Some(NodeId(3)));
        assert_eq!(out.dropped, 1);
        assert!(!pop.get(NodeId(1)).unwrap().view.contains(NodeId(1)));
        assert!(!pop.get(NodeId(3)).unwrap().view.contains(NodeId(3)));
    }

    #[test]
    fn uniform_resample_forced_full_sample() {
        let pop = network(11, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let view = uniform_resample(&pop, NodeId(1), 10, &mut rng);
        let ids: Vec<u64> = view.ids().map(|i| i.0).collect();
        assert_eq!(ids, (2..=11).collect::<Vec<_>>());
        assert!(view.entries().iter().all(|e| e.age == 0));
    }

    #[test]
    fn uniform_resample_small_population() {
        let pop = network(4, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let view = uniform_resample(&pop, NodeId(2), 10, &mut rng);
        assert_eq!(view.len(), 3);
        assert!(!view.contains(NodeId(2)));
    }

    #[test]
    fn uniform_resample_never_includes_self() {
        let pop = network(30, 8);
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let owner = NodeId(1 + seed % 30);
            let view = uniform_resample(&pop, owner, 8, &mut rng);
            assert_eq!(view.len(), 8);
            assert!(!view.contains(owner));
        }
    }

    #[test]
    fn uniform_resample_inclusion_frequency() {
        let (n, c, trials) = (21u64, 5usize, 100_000u32);
        let pop = network(n, c);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = vec![0u32; n as usize + 1];
        for _ in 0..trials {
            for id in uniform_resample(&pop, NodeId(1), c, &mut rng).ids() {
                hits[id.0 as usize] += 1;
            }
        }
        let p = c as f64 / (n - 1) as f64;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        assert_eq!(hits[1], 0);
        for (id, &h) in hits.iter().enumerate().skip(2) {
            assert!(
                (h as f64 - mean).abs() <= 3.0 * sigma,
                "node {id}: {h} vs {mean}"
            );
        }
    }
}
