#![allow(dead_code)]

use auction_sensitivity::{CostTable, Edge, EntityId, MrtaInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Edge order of the reference interval table.
pub const TABLE_EDGES: [&str; 9] = [
    "r1t1", "r1t2", "r1t3", "r2t1", "r2t2", "r2t3", "t1t2", "t1t3", "t2t3",
];
pub const TABLE_COST: [f64; 9] = [9.34, 9.85, 14.06, 12.09, 12.31, 10.0, 4.0, 14.04, 10.05];
pub const TABLE_DECREASE: [f64; 9] = [9.34, 0.25, 4.04, 2.50, 2.72, 0.41, 4.00, 4.01, 0.02];
pub const TABLE_INCREASE: [f64; 9] = [
    0.25,
    f64::INFINITY,
    f64::INFINITY,
    f64::INFINITY,
    f64::INFINITY,
    0.02,
    5.60,
    f64::INFINITY,
    f64::INFINITY,
];
/// Straight-line distance between the two robots, (2.5, 0) and (8, 0).
pub const ROBOT_GAP: f64 = 5.5;

/// Two robots, three tasks, reference costs.
pub fn reference_instance() -> MrtaInstance<f64> {
    let mut costs = CostTable::from_fn(2, 3, |_, _| 0.0);
    costs.set_pair(0, 1, ROBOT_GAP);
    let inst = MrtaInstance::new(costs.clone());
    for (label, c) in TABLE_EDGES.iter().zip(TABLE_COST) {
        let e = edge(&inst, label);
        costs.set_edge(e, c);
    }
    MrtaInstance::new(costs)
}

/// Edge named by concatenated labels such as `r1t2`.
pub fn edge(inst: &MrtaInstance<f64>, label: &str) -> Edge {
    let split = label[1..].find(['r', 't']).expect("two labels") + 1;
    let a = inst.entity_by_label(&label[..split]).expect("known label");
    let b = inst.entity_by_label(&label[split..]).expect("known label");
    Edge::new(a, b)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn task(inst: &MrtaInstance<f64>, j: usize) -> EntityId {
    EntityId::task(inst.m(), j)
}
