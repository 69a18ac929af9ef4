mod common;

use auction_sensitivity::oracle::{
    brute_force_minsum, held_karp_minsum, held_karp_route, random_euclidean_instance,
};
use auction_sensitivity::{assign, plan_cost, route_cost, CostTable, Route};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn enumeration_agrees_with_subset_dp(m in 1usize..=3, n in 0usize..=6, seed in any::<u64>()) {
        let inst = random_euclidean_instance(m, n, &mut common::rng(seed));
        let brute = brute_force_minsum(&inst.costs).unwrap();
        let dp = held_karp_minsum(&inst.costs).unwrap();
        prop_assert!((brute.total_cost - dp).abs() < 1e-9);
        prop_assert!((plan_cost(&brute, &inst.costs).unwrap() - brute.total_cost).abs() < 1e-9);
    }

    #[test]
    fn auction_plan_within_twice_optimum(m in 1usize..=3, n in 2usize..=6, seed in any::<u64>()) {
        let inst = random_euclidean_instance(m, n, &mut common::rng(seed));
        let best = brute_force_minsum(&inst.costs).unwrap().total_cost;
        let (plan, _) = assign(&inst).unwrap();
        prop_assert!(best <= plan.total_cost + 1e-9);
        prop_assert!(plan.total_cost <= 2.0 * best + 1e-9);
    }

    #[test]
    fn subset_dp_route_is_priced_consistently(n in 1usize..=6, seed in any::<u64>()) {
        let inst = random_euclidean_instance(1, n, &mut common::rng(seed));
        let tasks: Vec<usize> = (1..=n).collect();
        let (cost, order) = held_karp_route(&inst.costs, 0, &tasks);
        let route = Route::new(order.iter().map(|&i| inst.costs.entity(i)).collect());
        prop_assert!((route_cost(&route, &inst.costs).unwrap() - cost).abs() < 1e-12);
    }
}

#[test]
fn execution_costs_enter_the_optimum() {
    // One robot, two tasks with execution cost 1 each: 2 + 2 traversal.
    let c = CostTable::from_rows(
        1,
        2,
        vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 1.0, 1.0],
            vec![5.0, 1.0, 1.0],
        ],
    )
    .unwrap();
    assert_eq!(brute_force_minsum(&c).unwrap().total_cost, 4.0);
    assert_eq!(held_karp_minsum(&c).unwrap(), 4.0);
}

#[test]
fn ties_keep_first_plan_found() {
    // Both tasks equally placed: the first assignment (all to robot 0) wins
    // over the mirrored one, and the first ordering wins too.
    let c = CostTable::from_rows(
        2,
        1,
        vec![vec![0.0, 2.0, 1.0], vec![2.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
    )
    .unwrap();
    let best = brute_force_minsum(&c).unwrap();
    assert_eq!(best.routes[0].len(), 2);
    assert_eq!(best.routes[1].len(), 1);
}
