//! Exhaustive and randomized reference procedures for checking the planner
//! and the sensitivity intervals on small instances.

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::auction::{run_auction, AuctionOutcome, Bid};
use crate::error::{Error, Result};
use crate::geometry::euclidean_costs;
use crate::model::{CostTable, Edge, EntityId, MrtaInstance, Plan, Route};
use crate::scalar::Scalar;
use crate::sensitivity::{contains, IntervalFamily, PerturbationDelta, Side};

pub const ORACLE_MAX_M: usize = 3;
pub const ORACLE_MAX_N: usize = 8;

fn guard(m: usize, n: usize) -> Result<()> {
    if m > ORACLE_MAX_M || n > ORACLE_MAX_N {
        return Err(Error::SizeGuard {
            m,
            n,
            max_m: ORACLE_MAX_M,
            max_n: ORACLE_MAX_N,
        });
    }
    Ok(())
}

/// Walk cost written out independently of the planner's pricing.
fn walk_cost<S: Scalar>(costs: &CostTable<S>, walk: &[usize]) -> S {
    if walk.len() < 2 {
        return S::zero();
    }
    let mut total = S::zero();
    for &v in walk {
        total = total + costs.get(v, v);
    }
    for pair in walk.windows(2) {
        total = total + costs.get(pair[0], pair[1]);
    }
    total
}

/// Every base-`m` counter over the `n` tasks, task 0 as the lowest digit.
fn assignments(m: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = m.checked_pow(n as u32).unwrap_or(0).max(usize::from(n == 0));
    (0..total).map(move |mut code| {
        (0..n)
            .map(|_| {
                let d = code % m;
                code /= m;
                d
            })
            .collect()
    })
}

fn plan_from_walks<S: Scalar>(costs: &CostTable<S>, walks: Vec<Vec<usize>>, total: S) -> Plan<S> {
    Plan {
        routes: walks
            .into_iter()
            .map(|w| Route::new(w.into_iter().map(|i| costs.entity(i)).collect()))
            .collect(),
        total_cost: total,
    }
}

/// Exact MinSum optimum by enumerating every assignment of tasks to robots
/// and every ordering of each robot's tasks. Ties keep the first plan found.
pub fn brute_force_minsum<S: Scalar>(costs: &CostTable<S>) -> Result<Plan<S>> {
    let (m, n) = (costs.m(), costs.n());
    guard(m, n)?;
    if m == 0 && n > 0 {
        return Err(Error::Input("tasks without robots have no plan".into()));
    }
    let mut best: Option<(S, Vec<Vec<usize>>)> = None;
    for owner in assignments(m, n) {
        let mut walks = Vec::with_capacity(m);
        let mut total = S::zero();
        for r in 0..m {
            let mine: Vec<usize> = (0..n).filter(|&j| owner[j] == r).map(|j| m + j).collect();
            let mut best_walk: Option<(S, Vec<usize>)> = None;
            for order in mine.iter().copied().permutations(mine.len()) {
                let mut walk = Vec::with_capacity(order.len() + 1);
                walk.push(r);
                walk.extend(order);
                let c = walk_cost(costs, &walk);
                if best_walk.as_ref().is_none_or(|(b, _)| c < *b) {
                    best_walk = Some((c, walk));
                }
            }
            let (c, walk) = best_walk.expect("permutations yield at least one order");
            total = total + c;
            walks.push(walk);
        }
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, walks));
        }
    }
    let (total, walks) = best.unwrap_or((S::zero(), Vec::new()));
    Ok(plan_from_walks(costs, walks, total))
}

/// Cheapest path from `start` through every vertex of `tasks`, by dynamic
/// programming over subsets. Returns the cost under the walk pricing and
/// the visiting order.
pub fn held_karp_route<S: Scalar>(costs: &CostTable<S>, start: usize, tasks: &[usize]) -> (S, Vec<usize>) {
    let k = tasks.len();
    if k == 0 {
        return (S::zero(), vec![start]);
    }
    let full = 1usize << k;
    let mut dp = vec![S::infinity(); full * k];
    let mut prev = vec![usize::MAX; full * k];
    for i in 0..k {
        dp[(1 << i) * k + i] = costs.get(start, tasks[i]);
    }
    for set in 1..full {
        for last in 0..k {
            let here = dp[set * k + last];
            if set & (1 << last) == 0 {
                continue;
            }
            for next in 0..k {
                if set & (1 << next) != 0 {
                    continue;
                }
                let to = set | (1 << next);
                let c = here + costs.get(tasks[last], tasks[next]);
                if c < dp[to * k + next] {
                    dp[to * k + next] = c;
                    prev[to * k + next] = last;
                }
            }
        }
    }
    let (mut last, mut travel) = (0, dp[(full - 1) * k]);
    for i in 1..k {
        if dp[(full - 1) * k + i] < travel {
            travel = dp[(full - 1) * k + i];
            last = i;
        }
    }
    let mut order = Vec::with_capacity(k);
    let mut set = full - 1;
    loop {
        order.push(tasks[last]);
        let p = prev[set * k + last];
        set &= !(1 << last);
        if p == usize::MAX {
            break;
        }
        last = p;
    }
    order.push(start);
    order.reverse();
    let execution = order.iter().fold(S::zero(), |acc, &v| acc + costs.get(v, v));
    (travel + execution, order)
}

/// MinSum optimum with subset dynamic programming per robot; an
/// independent cross-check of [`brute_force_minsum`].
pub fn held_karp_minsum<S: Scalar>(costs: &CostTable<S>) -> Result<S> {
    let (m, n) = (costs.m(), costs.n());
    guard(m, n)?;
    let mut best = if n == 0 { S::zero() } else { S::infinity() };
    for owner in assignments(m, n) {
        let total = (0..m).fold(S::zero(), |acc, r| {
            let mine: Vec<usize> = (0..n).filter(|&j| owner[j] == r).map(|j| m + j).collect();
            acc + held_karp_route(costs, r, &mine).0
        });
        best = best.min(total);
    }
    Ok(best)
}

/// Textbook auction: each round scans every (assigned vertex, free task)
/// pair and keeps the cheapest under the cost, task, bidder order.
pub fn naive_auction<S: Scalar>(costs: &CostTable<S>) -> Vec<Bid<S>> {
    let (m, n) = (costs.m(), costs.n());
    let mut assigned: Vec<usize> = (0..m).collect();
    let mut free: Vec<usize> = (m..m + n).collect();
    let mut winners = Vec::with_capacity(n);
    while !free.is_empty() {
        let mut best: Option<Bid<S>> = None;
        for &t in &free {
            for &s in &assigned {
                let bid = Bid {
                    bidder: costs.entity(s),
                    task: costs.entity(t),
                    cost: costs.get(s, t),
                };
                if best.as_ref().is_none_or(|b| bid.auction_cmp(b).is_lt()) {
                    best = Some(bid);
                }
            }
        }
        let w = best.expect("at least one robot bids");
        free.retain(|&t| t != w.task.index());
        assigned.push(w.task.index());
        winners.push(w);
    }
    winners
}

/// Same winners, same orientation, same order.
pub fn auctions_equal<S: Scalar>(o1: &AuctionOutcome<S>, o2: &AuctionOutcome<S>) -> bool {
    o1.winners.len() == o2.winners.len()
        && o1
            .winners
            .iter()
            .zip(&o2.winners)
            .all(|(a, b)| a.parent == b.parent && a.task == b.task)
}

/// Finite stand-in for an infinite upper bound during sampling.
pub fn sampling_cap<S: Scalar>(costs: &CostTable<S>) -> S {
    let cap = S::of(10.0) * costs.max_finite();
    if cap > S::zero() {
        cap
    } else {
        S::one()
    }
}

/// A draw whose perturbed auction disagreed with the original one.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleViolation<S = f64> {
    pub draw: usize,
    pub delta: PerturbationDelta<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport<S = f64> {
    pub draws: usize,
    pub violations: Vec<SampleViolation<S>>,
}

/// A point strictly inside `(lo, hi]`, `nudge` above `lo` when that fits.
fn just_above<S: Scalar>(lo: S, hi: S, nudge: S) -> S {
    let v = lo + nudge.min((hi - lo) * S::half());
    if v > lo && v <= hi {
        v
    } else {
        hi
    }
}

fn draw_delta<S: Scalar>(family: &IntervalFamily<S>, cap: S, rng: &mut ChaCha8Rng) -> PerturbationDelta<S> {
    let values = family
        .lower
        .iter()
        .zip(&family.upper)
        .map(|(&lower, &upper)| {
            let lo = -lower;
            let hi = if upper.is_finite() { upper } else { cap };
            if hi <= lo {
                return hi;
            }
            // Endpoints are where robustness is most fragile; hit them often.
            match rng.gen_range(0..4u8) {
                0 => hi,
                1 => just_above(lo, hi, (hi - lo) * S::of(1e-9)),
                _ => {
                    let u = S::of(rng.gen::<f64>());
                    let v = hi - (hi - lo) * u;
                    if v > lo {
                        v
                    } else {
                        hi
                    }
                }
            }
        })
        .collect();
    PerturbationDelta { values }
}

/// Re-runs the auction under `draws` perturbations sampled inside `family`
/// and records every draw that changes the winning-edge list. Draw `i`
/// uses its own stream of the seeded generator, so the result does not
/// depend on evaluation order.
pub fn sample_robustness<S: Scalar>(
    costs: &CostTable<S>,
    family: &IntervalFamily<S>,
    draws: usize,
    seed: u64,
) -> Result<RobustnessReport<S>> {
    let original = run_auction(costs)?;
    let cap = sampling_cap(costs);
    let mut violations = Vec::new();
    for draw in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw as u64);
        let delta = draw_delta(family, cap, &mut rng);
        if !changes_outcome(costs, &original, &delta) {
            continue;
        }
        violations.push(SampleViolation { draw, delta });
    }
    Ok(RobustnessReport { draws, violations })
}

fn changes_outcome<S: Scalar>(
    costs: &CostTable<S>,
    original: &AuctionOutcome<S>,
    delta: &PerturbationDelta<S>,
) -> bool {
    match delta.apply(costs).and_then(|c| run_auction(&c)) {
        Ok(perturbed) => !auctions_equal(original, &perturbed),
        Err(_) => true,
    }
}

/// Copy of `family` with one bound of `edge` enlarged by `epsilon`.
pub fn enlarge<S: Scalar>(
    family: &IntervalFamily<S>,
    index: usize,
    side: Side,
    epsilon: S,
) -> IntervalFamily<S> {
    let mut wider = family.clone();
    match side {
        Side::Lower => wider.lower[index] = wider.lower[index] + epsilon,
        Side::Upper => wider.upper[index] = wider.upper[index] + epsilon,
    }
    wider
}

/// Searches for a perturbation that lies in `family` with one bound of
/// `edge` enlarged by `epsilon` and changes the auction outcome.
///
/// The target edge is moved past its old bound. The remaining edges are
/// placed by the construction used in the maximality argument (every edge
/// at its upper end) and, failing that, by two variants that pull
/// competitors to their lower ends. Returns `None` when no candidate
/// changes the outcome, which is expected for never-bid edges.
pub fn witness_nonrobust<S: Scalar>(
    costs: &CostTable<S>,
    family: &IntervalFamily<S>,
    edge: Edge,
    side: Side,
    epsilon: S,
) -> Result<Option<PerturbationDelta<S>>> {
    let original = run_auction(costs)?;
    let index = costs.edge_index(edge);
    let wider = enlarge(family, index, side, epsilon);
    let cap = sampling_cap(costs);
    let c = costs.cost(edge);

    let targets: Vec<S> = match side {
        Side::Lower => {
            let old = family.lower[index];
            [S::half(), S::of(0.9), S::of(0.1)]
                .into_iter()
                .map(|t| -(old + epsilon * t))
                .filter(|d| c + *d >= S::zero())
                .collect()
        }
        Side::Upper => {
            let old = family.upper[index];
            if old.is_infinite() {
                return Ok(None);
            }
            [S::one(), S::half(), S::of(0.1)]
                .into_iter()
                .map(|t| old + epsilon * t)
                .collect()
        }
    };

    let upper_end = |i: usize| {
        let u = family.upper[i];
        if u.is_finite() {
            u
        } else {
            cap
        }
    };
    let nudge = epsilon * S::of(1e-3);
    let lower_end = |i: usize| just_above(-family.lower[i], upper_end(i), nudge);
    let layouts: [&dyn Fn(usize) -> S; 3] = [
        &upper_end,
        &lower_end,
        &|i: usize| match family.roles[i] {
            crate::sensitivity::EdgeRole::Winner { .. } => upper_end(i),
            _ => lower_end(i),
        },
    ];

    for &target in &targets {
        for layout in layouts {
            let mut values: Vec<S> = (0..family.len()).map(layout).collect();
            values[index] = target;
            let delta = PerturbationDelta { values };
            if contains(&wider, &delta)? && changes_outcome(costs, &original, &delta) {
                return Ok(Some(delta));
            }
        }
    }
    Ok(None)
}

/// Uniform points in the unit square with Euclidean costs, redrawn until
/// every pair of edge costs differs by more than `1e-9`.
pub fn random_euclidean_instance(m: usize, n: usize, rng: &mut impl Rng) -> MrtaInstance<f64> {
    loop {
        let positions: Vec<Vec<f64>> = (0..m + n)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let costs = euclidean_costs(m, n, &positions).expect("points share a dimension");
        let mut sorted: Vec<f64> = costs.edges().map(|e| costs.cost(e)).collect();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] > 1e-9) {
            return MrtaInstance::new(costs)
                .with_positions(positions)
                .expect("one position per entity");
        }
    }
}

/// A random Euclidean instance with execution costs on the diagonal: one
/// shared value `lambda` for every task and an independent boot-up cost per
/// robot. Each diagonal entry stays below twice the distance to the nearest
/// other entity, so the triangle inequality also holds through repeated
/// vertices. Returns the instance and `lambda`.
pub fn random_labelled_instance(m: usize, n: usize, rng: &mut impl Rng) -> (MrtaInstance<f64>, f64) {
    let mut instance = random_euclidean_instance(m, n, rng);
    let size = m + n;
    let nearest: Vec<f64> = (0..size)
        .map(|i| {
            (0..size)
                .filter(|&j| j != i)
                .map(|j| instance.costs.get(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let room = |limit: f64| if limit.is_finite() { 2.0 * limit } else { 2.0 };
    let task_limit = nearest[m..].iter().copied().fold(f64::INFINITY, f64::min);
    let lambda = rng.gen::<f64>() * room(task_limit);
    for (r, &limit) in nearest.iter().enumerate().take(m) {
        instance.costs.set(r, r, rng.gen::<f64>() * room(limit));
    }
    for t in m..size {
        instance.costs.set(t, t, lambda);
    }
    (instance, lambda)
}

/// Entity list of a route as plain indices, for comparisons in tests.
pub fn route_indices(route: &Route) -> Vec<usize> {
    route.vertices.iter().map(|v: &EntityId| v.index()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_enumerates_all_assignments() {
        let all: Vec<_> = assignments(2, 3).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[1], vec![1, 0, 0]);
        assert_eq!(assignments(3, 0).count(), 1);
    }

    #[test]
    fn size_guard() {
        let c = CostTable::<f64>::from_fn(1, 9, |i, j| if i == j { 0.0 } else { 1.0 });
        assert!(matches!(brute_force_minsum(&c), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn single_task() {
        let c = CostTable::from_rows(1, 1, vec![vec![0.0, 2.5], vec![2.5, 0.0]]).unwrap();
        let p = brute_force_minsum(&c).unwrap();
        assert_eq!(p.total_cost, 2.5);
        assert_eq!(route_indices(&p.routes[0]), vec![0, 1]);
        assert_eq!(held_karp_minsum(&c).unwrap(), 2.5);
    }

    #[test]
    fn no_tasks() {
        let c = CostTable::<f64>::from_fn(2, 0, |_, _| 0.0);
        let p = brute_force_minsum(&c).unwrap();
        assert_eq!(p.total_cost, 0.0);
        assert_eq!(p.routes.len(), 2);
    }
}
