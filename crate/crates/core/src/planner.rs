//! Turning the auction forest into robot-routes, and the full planner.

use petgraph::unionfind::UnionFind;

use crate::auction::{run_auction, AuctionOutcome};
use crate::error::{Error, Result};
use crate::model::{CostTable, EntityId, MrtaInstance, Plan, Route};
use crate::scalar::Scalar;

/// Checks that `W` is a forest in which every component holds exactly one
/// robot and every task is won exactly once.
pub fn check_forest<S: Scalar>(costs: &CostTable<S>, outcome: &AuctionOutcome<S>) -> Result<()> {
    let (m, n) = (costs.m(), costs.n());
    let bad = |msg: String| Err(Error::MalformedOutcome(msg));
    if outcome.m() != m || outcome.winners.len() != n || outcome.assignment.len() != m + n {
        return bad(format!(
            "outcome has {} winners over {} entities, instance has m={m}, n={n}",
            outcome.winners.len(),
            outcome.assignment.len()
        ));
    }
    let mut components = UnionFind::<usize>::new(m + n);
    let mut robots_in = vec![0usize; m + n];
    for r in 0..m {
        robots_in[r] = 1;
    }
    for (i, w) in outcome.winners.iter().enumerate() {
        let k = i + 1;
        if w.round != k {
            return bad(format!("winner at position {k} records round {}", w.round));
        }
        if !w.task.is_task() || w.task.index() >= m + n || w.parent.index() >= m + n {
            return bad(format!("winner of round {k} is not a (bidder, task) pair"));
        }
        if outcome.round_of(w.task) != k {
            return bad(format!("task of round {k} is assigned round {}", outcome.round_of(w.task)));
        }
        if w.parent.is_task() && outcome.round_of(w.parent) >= k {
            return bad(format!("bidder of round {k} was not assigned before the round"));
        }
        let (p, t) = (components.find(w.parent.index()), components.find(w.task.index()));
        if p == t {
            return bad(format!("winner of round {k} closes a cycle"));
        }
        let robots = robots_in[p] + robots_in[t];
        components.union(p, t);
        robots_in[components.find(p)] = robots;
    }
    for v in 0..m + n {
        let root = components.find(v);
        if robots_in[root] != 1 {
            return bad(format!(
                "component of entity {v} holds {} robots",
                robots_in[root]
            ));
        }
    }
    Ok(())
}

/// Depth-first shortcut of each robot's tree: children are visited in
/// ascending assignment round, so the route is the preorder of the tree.
pub fn df_shortcut<S: Scalar>(costs: &CostTable<S>, outcome: &AuctionOutcome<S>) -> Result<Plan<S>> {
    check_forest(costs, outcome)?;
    let size = costs.len();
    // Winners are stored in round order, so child lists come out sorted by a(s).
    let mut children: Vec<Vec<EntityId>> = vec![Vec::new(); size];
    for w in &outcome.winners {
        children[w.parent.index()].push(w.task);
    }

    let routes = costs
        .robots()
        .map(|r| {
            let mut route = Vec::new();
            let mut stack = vec![r];
            while let Some(v) = stack.pop() {
                route.push(v);
                stack.extend(children[v.index()].iter().rev().copied());
            }
            Route::new(route)
        })
        .collect();
    Plan::priced(routes, costs)
}

/// Straight transcription of the reverse-scan shortcut loop. Cubic in the
/// component size; kept for cross-checking [`df_shortcut`].
pub fn df_shortcut_literal<S: Scalar>(
    costs: &CostTable<S>,
    outcome: &AuctionOutcome<S>,
) -> Result<Plan<S>> {
    check_forest(costs, outcome)?;
    let in_w = |x: EntityId, y: EntityId| {
        outcome
            .winners
            .iter()
            .any(|w| (w.parent == x && w.task == y) || (w.parent == y && w.task == x))
    };

    let mut routes = Vec::with_capacity(costs.m());
    for r in costs.robots() {
        let mut tree = vec![r];
        for w in &outcome.winners {
            if tree.contains(&w.parent) {
                tree.push(w.task);
            }
        }
        let mut route = vec![r];
        while route.len() < tree.len() {
            let mut appended = false;
            for &t in route.iter().rev() {
                let mut best_round = usize::MAX;
                let mut next = None;
                for &s in tree.iter().filter(|s| !route.contains(s)) {
                    if in_w(t, s) && outcome.round_of(s) < best_round {
                        best_round = outcome.round_of(s);
                        next = Some(s);
                    }
                }
                if let Some(v) = next {
                    route.push(v);
                    appended = true;
                    break;
                }
            }
            if !appended {
                return Err(Error::MalformedOutcome(format!(
                    "tree of robot {r} is disconnected"
                )));
            }
        }
        routes.push(Route::new(route));
    }
    Plan::priced(routes, costs)
}

/// Auction followed by the depth-first shortcut. Returns the outcome too,
/// since the sensitivity analysis consumes it.
pub fn assign<S: Scalar>(instance: &MrtaInstance<S>) -> Result<(Plan<S>, AuctionOutcome<S>)> {
    let outcome = run_auction(&instance.costs)?;
    let plan = df_shortcut(&instance.costs, &outcome)?;
    Ok((plan, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::WinningEdge;

    fn star() -> (CostTable<f64>, AuctionOutcome<f64>) {
        // Robot close to three tasks that are far from each other.
        let c = CostTable::from_rows(
            1,
            3,
            vec![
                vec![0.0, 1.0, 2.0, 3.0],
                vec![1.0, 0.0, 10.0, 11.0],
                vec![2.0, 10.0, 0.0, 12.0],
                vec![3.0, 11.0, 12.0, 0.0],
            ],
        )
        .unwrap();
        let o = run_auction(&c).unwrap();
        (c, o)
    }

    #[test]
    fn star_tree_visits_children_in_round_order() {
        let (c, o) = star();
        assert!(o.winners.iter().all(|w| w.parent == EntityId::robot(0)));
        let plan = df_shortcut(&c, &o).unwrap();
        let t = |j| EntityId::task(1, j);
        assert_eq!(
            plan.routes[0].vertices,
            vec![EntityId::robot(0), t(0), t(1), t(2)]
        );
        assert_eq!(plan, df_shortcut_literal(&c, &o).unwrap());
    }

    #[test]
    fn idle_robot_gets_singleton_route() {
        let c = CostTable::from_rows(
            2,
            1,
            vec![
                vec![0.0, 9.0, 1.0],
                vec![9.0, 0.0, 8.0],
                vec![1.0, 8.0, 0.0],
            ],
        )
        .unwrap();
        let (plan, _) = assign(&MrtaInstance::new(c)).unwrap();
        assert_eq!(plan.routes[1].vertices, vec![EntityId::robot(1)]);
        assert_eq!(plan.total_cost, 1.0);
    }

    #[test]
    fn malformed_outcome_is_rejected() {
        let (c, mut o) = star();
        // Second winner claims a bidder that is assigned later.
        o.winners[1] = WinningEdge {
            parent: EntityId::task(1, 2),
            ..o.winners[1]
        };
        assert!(matches!(df_shortcut(&c, &o), Err(Error::MalformedOutcome(_))));
    }
}
