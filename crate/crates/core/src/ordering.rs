//! JK and mod-JK: ordering nodes by swapping random values.
//!
//! Each node holds a random value in `(0, 1]` and tries to hold the value
//! whose rank among all values matches its attribute rank. Swaps happen
//! with *misplaced* neighbors, i.e. pairs whose attribute order and value
//! order disagree. JK picks one such neighbor at random; mod-JK picks the
//! one whose swap reduces the local disorder measure the most.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{misplaced, Attribute, NodeId, RankPoint, SliceSpec};
use crate::error::{Error, Result};
use crate::sampling::{Peer, View};

#[derive(Debug, Clone)]
pub struct OrderingNode {
    pub id: NodeId,
    pub attribute: Attribute,
    random_value: RankPoint,
    slice_estimate: Option<usize>,
    pub view: View,
}

impl OrderingNode {
    pub fn new(
        id: NodeId,
        attribute: Attribute,
        random_value: RankPoint,
        view_capacity: usize,
    ) -> Self {
        Self {
            id,
            attribute,
            random_value,
            slice_estimate: None,
            view: View::new(view_capacity),
        }
    }

    pub fn random_value(&self) -> RankPoint {
        self.random_value
    }

    /// Slice recorded on the last value adoption, `None` before the first one.
    pub fn slice_estimate(&self) -> Option<usize> {
        self.slice_estimate
    }

    /// Slice implied by the current value; equals the recorded estimate
    /// whenever one is set.
    pub fn effective_slice(&self, spec: &SliceSpec) -> usize {
        self.slice_estimate
            .unwrap_or_else(|| spec.slice_of_estimate(self.random_value.get()))
    }

    pub fn adopt(&mut self, value: RankPoint, spec: &SliceSpec) {
        self.random_value = value;
        self.slice_estimate = Some(spec.slice_of_estimate(value.get()));
    }
}

impl Peer for OrderingNode {
    fn id(&self) -> NodeId {
        self.id
    }
    fn attribute(&self) -> Attribute {
        self.attribute
    }
    fn payload(&self) -> f64 {
        self.random_value.get()
    }
    fn view(&self) -> &View {
        &self.view
    }
    fn view_mut(&mut self) -> &mut View {
        &mut self.view
    }
}

/// Positions in the local attribute and random sequences over the view
/// plus the node itself. Index 0 is the node; the rest follow view order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalIndices {
    pub members: Vec<NodeId>,
    pub attribute_index: Vec<usize>,
    pub random_index: Vec<usize>,
}

impl LocalIndices {
    fn position(&self, id: NodeId) -> Option<usize> {
        self.members.iter().position(|&m| m == id)
    }

    pub fn attribute_index_of(&self, id: NodeId) -> Option<usize> {
        self.position(id).map(|p| self.attribute_index[p])
    }

    pub fn random_index_of(&self, id: NodeId) -> Option<usize> {
        self.position(id).map(|p| self.random_index[p])
    }
}

fn rank_by<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_unstable_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut index = vec![0; keys.len()];
    for (pos, &m) in order.iter().enumerate() {
        index[m] = pos + 1;
    }
    index
}

/// Total order on random values; values are finite so bits of the
/// non-negative float compare like the float itself.
#[inline]
fn value_key(value: f64) -> u64 {
    value.to_bits()
}

pub fn local_indices(node: &OrderingNode) -> LocalIndices {
    let members: Vec<NodeId> = std::iter::once(node.id).chain(node.view.ids()).collect();
    let attr_keys: Vec<(Attribute, NodeId)> = std::iter::once((node.attribute, node.id))
        .chain(node.view.entries().iter().map(|e| (e.attribute, e.id)))
        .collect();
    let value_keys: Vec<(u64, NodeId)> =
        std::iter::once((value_key(node.random_value.get()), node.id))
            .chain(
                node.view
                    .entries()
                    .iter()
                    .map(|e| (value_key(e.payload), e.id)),
            )
            .collect();
    LocalIndices {
        members,
        attribute_index: rank_by(&attr_keys),
        random_index: rank_by(&value_keys),
    }
}

fn ldm_of(idx: &LocalIndices) -> f64 {
    let sum: i64 = idx
        .attribute_index
        .iter()
        .zip(&idx.random_index)
        .map(|(&a, &r)| {
            let d = a as i64 - r as i64;
            d * d
        })
        .sum();
    sum as f64 / idx.members.len() as f64
}

/// Local disorder measure: mean squared gap between local attribute and
/// random indices over the view plus the node.
pub fn ldm(node: &OrderingNode) -> f64 {
    ldm_of(&local_indices(node))
}

#[inline]
fn gain_at(idx: &LocalIndices, j: usize) -> i64 {
    let (ai, ri) = (idx.attribute_index[0] as i64, idx.random_index[0] as i64);
    let (aj, rj) = (idx.attribute_index[j] as i64, idx.random_index[j] as i64);
    ai * rj + aj * ri - aj * rj
}

/// `la_i * lr_j + la_j * lr_i - la_j * lr_j`: the local disorder drop of
/// swapping with `j`, up to a term and factor that do not depend on `j`.
pub fn gain(node: &OrderingNode, j: NodeId) -> Result<i64> {
    let idx = local_indices(node);
    let pos = idx
        .members
        .iter()
        .skip(1)
        .position(|&m| m == j)
        .ok_or(Error::NotInView(j))?;
    Ok(gain_at(&idx, pos + 1))
}

/// How JK chooses whom to contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JkTargetPolicy {
    /// Uniformly among neighbors the view reports as misplaced.
    #[default]
    AmongMisplaced,
    /// Uniformly among all neighbors; the swap itself stays conditional.
    AnyNeighbor,
}

fn believed_misplaced(node: &OrderingNode, j: NodeId) -> bool {
    node.view.get(j).is_some_and(|e| {
        misplaced(
            node.attribute,
            node.random_value.get(),
            e.attribute,
            e.payload,
        )
    })
}

pub fn select_target_jk<R: Rng + ?Sized>(
    node: &OrderingNode,
    policy: JkTargetPolicy,
    rng: &mut R,
) -> Option<NodeId> {
    match policy {
        JkTargetPolicy::AmongMisplaced => {
            let candidates: Vec<NodeId> = node
                .view
                .ids()
                .filter(|&j| believed_misplaced(node, j))
                .collect();
            candidates.choose(rng).copied()
        }
        JkTargetPolicy::AnyNeighbor => node.view.entries().choose(rng).map(|e| e.id),
    }
}

/// Neighbor with maximal gain, scanning the view by ascending id and
/// keeping the last maximum; `None` unless that neighbor is misplaced.
pub fn select_target_modjk(node: &OrderingNode) -> Option<NodeId> {
    if node.view.is_empty() {
        return None;
    }
    let idx = local_indices(node);
    let mut best: Option<(i64, usize)> = None;
    for j in 1..idx.members.len() {
        let g = gain_at(&idx, j);
        if best.is_none_or(|(max, _)| g >= max) {
            best = Some((g, j));
        }
    }
    let (_, j) = best?;
    let target = idx.members[j];
    believed_misplaced(node, target).then_some(target)
}

/// `REQ(r_i, a_i)` from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapRequest {
    pub from: NodeId,
    pub to: NodeId,
    pub value: RankPoint,
    pub attribute: Attribute,
    /// Whether the sender's view showed the target as misplaced at send time.
    pub believed_misplaced: bool,
}

/// `ACK(r_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapAck {
    pub from: NodeId,
    pub value: RankPoint,
}

pub fn send_swap_request(initiator: &OrderingNode, target: NodeId) -> SwapRequest {
    SwapRequest {
        from: initiator.id,
        to: target,
        value: initiator.random_value,
        attribute: initiator.attribute,
        believed_misplaced: believed_misplaced(initiator, target),
    }
}

/// Passive side: always answers with the current value; reports whether the
/// carried value should be adopted.
pub fn handle_request(node: &OrderingNode, req: &SwapRequest) -> (SwapAck, bool) {
    let ack = SwapAck {
        from: node.id,
        value: node.random_value,
    };
    let adopt = misplaced(
        node.attribute,
        node.random_value.get(),
        req.attribute,
        req.value.get(),
    );
    (ack, adopt)
}

/// Active side on receipt of the ACK: adopt iff the partner is misplaced
/// with respect to the node's values at receipt.
pub fn handle_ack(node: &OrderingNode, partner_attribute: Attribute, ack: &SwapAck) -> bool {
    misplaced(
        node.attribute,
        node.random_value.get(),
        partner_attribute,
        ack.value.get(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExchangeOutcome {
    pub swapped: bool,
    /// REQ whose condition failed at receipt although the sender believed it held.
    pub request_useless: bool,
    /// ACK that could not be honoured because the sender's offer went stale.
    pub ack_useless: bool,
}

/// Delivers `req` to `target` and its ACK back to `initiator`.
///
/// The swap commits only when both sides accept. When the initiator no
/// longer holds the value it offered (it swapped with someone else while
/// the REQ was in transit) it refuses the ACK, and the target's tentative
/// adoption is rolled back, so values are only ever permuted.
pub fn exchange(
    initiator: &mut OrderingNode,
    target: &mut OrderingNode,
    req: &SwapRequest,
    spec: &SliceSpec,
) -> ExchangeOutcome {
    let (ack, target_accepts) = handle_request(target, req);
    let offer_current = initiator.random_value == req.value;
    let initiator_accepts = offer_current && handle_ack(initiator, target.attribute, &ack);
    let swapped = target_accepts && initiator_accepts;
    if swapped {
        target.adopt(req.value, spec);
        initiator.adopt(ack.value, spec);
    }
    ExchangeOutcome {
        swapped,
        request_useless: req.believed_misplaced && !target_accepts,
        ack_useless: target_accepts && !initiator_accepts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::ViewEntry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rp(x: f64) -> RankPoint {
        RankPoint::new(x).unwrap()
    }

    fn node_with(id: u64, a: u64, r: f64, neighbors: &[(u64, u64, f64)]) -> OrderingNode {
        let mut node = OrderingNode::new(NodeId(id), Attribute(a), rp(r), neighbors.len().max(1));
        let entries: Vec<ViewEntry> = neighbors
            .iter()
            .map(|&(j, aj, rj)| ViewEntry {
                id: NodeId(j),
                age: 0,
                attribute: Attribute(aj),
                payload: rj,
            })
            .collect();
        node.view = View::from_entries(node.id, neighbors.len().max(1), &entries);
        node
    }

    #[test]
    fn local_indices_three_members() {
        let node = node_with(1, 50, 0.85, &[(2, 120, 0.1), (3, 25, 0.35)]);
        let idx = local_indices(&node);
        assert_eq!(idx.attribute_index_of(NodeId(1)), Some(2));
        assert_eq!(idx.random_index_of(NodeId(1)), Some(3));
        assert_eq!(idx.attribute_index_of(NodeId(2)), Some(3));
        assert_eq!(idx.random_index_of(NodeId(2)), Some(1));
        assert_eq!(idx.attribute_index_of(NodeId(3)), Some(1));
        assert_eq!(idx.random_index_of(NodeId(3)), Some(2));
        assert!((ldm(&node) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sorted_view_has_no_disorder_and_no_target() {
        let node = node_with(1, 50, 0.5, &[(2, 10, 0.1), (3, 90, 0.9), (4, 70, 0.6)]);
        let idx = local_indices(&node);
        assert_eq!(idx.attribute_index, idx.random_index);
        assert_eq!(ldm(&node), 0.0);
        assert_eq!(select_target_modjk(&node), None);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            select_target_jk(&node, JkTargetPolicy::AmongMisplaced, &mut rng),
            None
        );
    }

    #[test]
    fn equal_values_order_by_id() {
        let node = node_with(5, 1, 0.4, &[(2, 2, 0.4), (9, 3, 0.4)]);
        let idx = local_indices(&node);
        assert_eq!(idx.random_index_of(NodeId(2)), Some(1));
        assert_eq!(idx.random_index_of(NodeId(5)), Some(2));
        assert_eq!(idx.random_index_of(NodeId(9)), Some(3));
    }

    #[test]
    fn two_member_mutual_misplacement() {
        let node = node_with(1, 10, 0.9, &[(2, 20, 0.2)]);
        assert!((ldm(&node) - 1.0).abs() < 1e-12);
        assert_eq!(select_target_modjk(&node), Some(NodeId(2)));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            select_target_jk(&node, JkTargetPolicy::AmongMisplaced, &mut rng),
            Some(NodeId(2))
        );
    }

    #[test]
    fn gain_rejects_non_neighbor() {
        let node = node_with(1, 10, 0.9, &[(2, 20, 0.2)]);
        assert_eq!(gain(&node, NodeId(7)), Err(Error::NotInView(NodeId(7))));
        assert_eq!(gain(&node, NodeId(1)), Err(Error::NotInView(NodeId(1))));
    }

    #[test]
    fn modjk_tie_goes_to_last_in_id_order() {
        // Self a=30 r=0.5; neighbors 2 (a=10, r=0.6) and 3 (a=50, r=0.4) are
        // mirror images around self, so their gains coincide.
        let node = node_with(1, 30, 0.5, &[(2, 10, 0.6), (3, 50, 0.4)]);
        assert_eq!(
            gain(&node, NodeId(2)).unwrap(),
            gain(&node, NodeId(3)).unwrap()
        );
        assert_eq!(select_target_modjk(&node), Some(NodeId(3)));
    }

    #[test]
    fn modjk_unique_best() {
        // Neighbor 4 is the farthest misplaced one.
        let node = node_with(1, 30, 0.5, &[(2, 40, 0.45), (3, 20, 0.3), (4, 90, 0.05)]);
        assert_eq!(select_target_modjk(&node), Some(NodeId(4)));
    }

    #[test]
    fn jk_uniform_over_misplaced() {
        // Misplaced: 2, 3, 5. Not misplaced: 4.
        let node = node_with(
            1,
            50,
            0.5,
            &[(2, 60, 0.1), (3, 70, 0.2), (4, 80, 0.9), (5, 10, 0.95)],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 10_000;
        let mut counts = [0u32; 6];
        for _ in 0..draws {
            let j = select_target_jk(&node, JkTargetPolicy::AmongMisplaced, &mut rng).unwrap();
            counts[j.0 as usize] += 1;
        }
        assert_eq!(counts[4], 0);
        let expected = draws as f64 / 3.0;
        let chi2: f64 = [2, 3, 5]
            .iter()
            .map(|&j| (counts[j] as f64 - expected).powi(2) / expected)
            .sum();
        // 99.9% quantile of chi-square with 2 degrees of freedom.
        assert!(chi2 < 13.82, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn jk_any_neighbor_policy_can_pick_ordered_neighbor() {
        let node = node_with(1, 50, 0.5, &[(2, 60, 0.9)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            select_target_jk(&node, JkTargetPolicy::AnyNeighbor, &mut rng),
            Some(NodeId(2))
        );
        assert!(!send_swap_request(&node, NodeId(2)).believed_misplaced);
    }

    #[test]
    fn atomic_swap_of_misplaced_pair() {
        let spec = SliceSpec::equal_width(2).unwrap();
        let mut i = node_with(1, 50, 0.85, &[(2, 120, 0.1)]);
        let mut j = node_with(2, 120, 0.1, &[(1, 50, 0.85)]);
        let req = send_swap_request(&i, j.id);
        let out = exchange(&mut i, &mut j, &req, &spec);
        assert!(out.swapped);
        assert_eq!(i.random_value().get(), 0.1);
        assert_eq!(j.random_value().get(), 0.85);
        assert_eq!(i.slice_estimate(), Some(1));
        assert_eq!(j.slice_estimate(), Some(2));
    }

    #[test]
    fn ordered_pair_keeps_values() {
        let spec = SliceSpec::equal_width(2).unwrap();
        let mut i = node_with(1, 25, 0.1, &[(2, 50, 0.35)]);
        let mut j = node_with(2, 50, 0.35, &[(1, 25, 0.1)]);
        let req = send_swap_request(&i, j.id);
        let out = exchange(&mut i, &mut j, &req, &spec);
        assert_eq!(out, ExchangeOutcome::default());
        assert_eq!(i.random_value().get(), 0.1);
        assert_eq!(j.slice_estimate(), None);
    }

    #[test]
    fn stale_view_makes_request_useless() {
        let spec = SliceSpec::equal_width(2).unwrap();
        // i believes j holds 0.1, but j already moved to 0.95.
        let mut i = node_with(1, 50, 0.85, &[(2, 120, 0.1)]);
        let mut j = node_with(2, 120, 0.95, &[]);
        let req = send_swap_request(&i, j.id);
        assert!(req.believed_misplaced);
        let out = exchange(&mut i, &mut j, &req, &spec);
        assert!(!out.swapped && out.request_useless && !out.ack_useless);
    }

    #[test]
    fn stale_offer_is_rolled_back() {
        let spec = SliceSpec::equal_width(2).unwrap();
        let mut i = node_with(1, 50, 0.85, &[(2, 120, 0.1)]);
        let mut j = node_with(2, 120, 0.1, &[]);
        let req = send_swap_request(&i, j.id);
        // While the REQ is in transit, i swaps 0.85 away for 0.6.
        i.adopt(rp(0.6), &spec);
        let out = exchange(&mut i, &mut j, &req, &spec);
        assert!(!out.swapped && !out.request_useless && out.ack_useless);
        assert_eq!(i.random_value().get(), 0.6);
        assert_eq!(j.random_value().get(), 0.1);
    }

    #[test]
    fn two_node_floor_both_in_first_slice() {
        let spec = SliceSpec::equal_width(2).unwrap();
        let mut a = node_with(1, 10, 0.4, &[(2, 20, 0.1)]);
        let mut b = node_with(2, 20, 0.1, &[(1, 10, 0.4)]);
        for _ in 0..5 {
            for (x, y) in [(&mut a, &mut b)] {
                if let Some(t) = select_target_modjk(x) {
                    let req = send_swap_request(x, t);
                    exchange(x, y, &req, &spec);
                }
            }
            let (av, bv) = (a.random_value().get(), b.random_value().get());
            a.view = View::from_entries(
                a.id,
                1,
                &[ViewEntry {
                    id: b.id,
                    age: 0,
                    attribute: b.attribute,
                    payload: bv,
                }],
            );
            b.view = View::from_entries(
                b.id,
                1,
                &[ViewEntry {
                    id: a.id,
                    age: 0,
                    attribute: a.attribute,
                    payload: av,
                }],
            );
        }
        assert_eq!(a.random_value().get(), 0.1);
        assert_eq!(b.random_value().get(), 0.4);
        assert_eq!(a.effective_slice(&spec), 1);
        assert_eq!(b.effective_slice(&spec), 1);
    }
}
