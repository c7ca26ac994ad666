use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slicer_core::ordering::{gain, ldm, select_target_modjk, OrderingNode};
use slicer_core::sampling::{View, ViewEntry};
use slicer_core::{Attribute, NodeId, RankPoint};

pub fn random_node(rng: &mut ChaCha8Rng, c: usize) -> OrderingNode {
    // Small attribute range so ties (broken by id) show up.
    let mut ids: Vec<u64> = (1..=40).collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    let me = ids[0];
    let mut node = OrderingNode::new(
        NodeId(me),
        Attribute(rng.gen_range(0..30)),
        RankPoint::new(1.0 - rng.gen::<f64>()).unwrap(),
        c,
    );
    let entries: Vec<ViewEntry> = ids[1..=c]
        .iter()
        .map(|&id| ViewEntry {
            id: NodeId(id),
            age: 0,
            attribute: Attribute(rng.gen_range(0..30)),
            payload: 1.0 - rng.gen::<f64>(),
        })
        .collect();
    node.view = View::from_entries(node.id, c, &entries);
    node
}

/// LDM after swapping the node's value with neighbor `j`'s, recomputed from scratch.
pub fn ldm_after_swap(node: &OrderingNode, j: NodeId) -> f64 {
    let rj = node.view.get(j).unwrap().payload;
    let mut swapped = OrderingNode::new(
        node.id,
        node.attribute,
        RankPoint::new(rj).unwrap(),
        node.view.capacity(),
    );
    let entries: Vec<ViewEntry> = node
        .view
        .entries()
        .iter()
        .map(|e| {
            let mut e = *e;
            if e.id == j {
                e.payload = node.random_value().get();
            }
            e
        })
        .collect();
    swapped.view = View::from_entries(node.id, node.view.capacity(), &entries);
    ldm(&swapped)
}

/// Checks `count` random views of size `c`; returns the number of
/// disagreements between the gain argmax and the brute-force LDM-drop argmax.
pub fn gain_oracle_mismatches(seed: u64, count: usize, c: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..count {
        let node = random_node(&mut rng, c);
        // LDM times the member count is an integer sum of squares.
        let members = (node.view.len() + 1) as f64;
        let scaled = |x: f64| (x * members).round() as i64;
        let before = scaled(ldm(&node));
        let mut best_gain = (i64::MIN, NodeId(0));
        let mut best_drop = (i64::MIN, NodeId(0));
        for id in node.view.ids() {
            let g = gain(&node, id).unwrap();
            let drop = before - scaled(ldm_after_swap(&node, id));
            // Ascending-id scan keeping the last maximum on both sides.
            if g >= best_gain.0 {
                best_gain = (g, id);
            }
            if drop >= best_drop.0 {
                best_drop = (drop, id);
            }
        }
        let chosen_ok = match select_target_modjk(&node) {
            Some(t) => t == best_gain.1 && best_drop.0 > 0,
            None => true,
        };
        if best_gain.1 != best_drop.1 || !chosen_ok {
            bad += 1;
        }
    }
    bad
}

/// GDM and SDM of two nodes holding sorted values 0.1 and 0.4 with two
/// equal slices.
pub fn two_node_instance() -> (f64, f64) {
    use slicer_core::metrics::{gdm, sdm, SliceSample, ValueSample};
    use slicer_core::SliceSpec;
    let values = [
        ValueSample {
            id: NodeId(1),
            attribute: Attribute(10),
            value: 0.1,
        },
        ValueSample {
            id: NodeId(2),
            attribute: Attribute(20),
            value: 0.4,
        },
    ];
    let spec = SliceSpec::equal_width(2).unwrap();
    let slices: Vec<SliceSample> = values
        .iter()
        .map(|v| SliceSample {
            id: v.id,
            attribute: v.attribute,
            estimated_slice: spec.slice_of(v.value).unwrap(),
        })
        .collect();
    (gdm(&values), sdm(&slices, &spec))
}
