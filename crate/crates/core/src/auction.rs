//! Sequential single-item auction.
//!
//! Every robot and every already-assigned task bids on every unassigned task
//! in each round; the cheapest pair wins. Ties are broken by smallest task
//! index, then smallest bidder index.

use std::cmp::Ordering;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CostTable, Edge, EntityId};
use crate::scalar::{total_cmp, Scalar};

/// Maximum number of tied pairs kept in [`AuctionOutcome::ties`].
const MAX_REPORTED_TIES: usize = 32;

/// Winner `w_k` of bid round `k`, oriented from the bidder to the task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinningEdge<S = f64> {
    pub parent: EntityId,
    pub task: EntityId,
    pub round: usize,
    pub cost: S,
}

impl<S: Scalar> WinningEdge<S> {
    pub fn edge(&self) -> Edge {
        Edge::new(self.parent, self.task)
    }
}

/// A candidate `(bidder, task)` pair with its bid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bid<S = f64> {
    pub bidder: EntityId,
    pub task: EntityId,
    pub cost: S,
}

impl<S: Scalar> Bid<S> {
    pub fn edge(&self) -> Edge {
        Edge::new(self.bidder, self.task)
    }

    /// Order used to pick winners: cost, then task index, then bidder index.
    pub fn auction_cmp(&self, other: &Self) -> Ordering {
        total_cmp(self.cost, other.cost)
            .then(self.task.index().cmp(&other.task.index()))
            .then(self.bidder.index().cmp(&other.bidder.index()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome<S = f64> {
    /// `W`: winners in round order; `winners[k - 1].round == k`.
    pub winners: Vec<WinningEdge<S>>,
    /// `a`: zero for robots, the winning round for tasks. Indexed by entity.
    pub assignment: Vec<usize>,
    /// `U`: second-best candidate per round, absent when the round had a
    /// single candidate.
    pub runners_up: Vec<Option<Bid<S>>>,
    /// Some round saw two candidates with equal cost.
    pub tie_flag: bool,
    /// Equal-cost candidate pairs sharing a bid round (truncated).
    pub ties: Vec<(Edge, Edge)>,
    m: usize,
}

impl<S: Scalar> AuctionOutcome<S> {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.winners.len()
    }

    /// `w_k` for `1 <= k <= n`.
    pub fn winner(&self, round: usize) -> &WinningEdge<S> {
        &self.winners[round - 1]
    }

    pub fn runner_up(&self, round: usize) -> Option<&Bid<S>> {
        self.runners_up[round - 1].as_ref()
    }

    /// `c(u_k)`, or `+∞` when round `k` had one candidate.
    pub fn runner_up_cost(&self, round: usize) -> S {
        self.runner_up(round).map_or(S::infinity(), |u| u.cost)
    }

    pub fn round_of(&self, v: EntityId) -> usize {
        self.assignment[v.index()]
    }

    /// `B_e`, the rounds in which `edge` is a candidate.
    pub fn bid_rounds(&self, edge: Edge) -> Range<usize> {
        bid_rounds(edge, &self.assignment)
    }

    /// The round `K` with `w_K = edge`, if `edge` wins a round.
    pub fn winning_round(&self, edge: Edge) -> Option<usize> {
        let (x, y) = (edge.a(), edge.b());
        let (lo, hi) = if self.round_of(x) <= self.round_of(y) {
            (x, y)
        } else {
            (y, x)
        };
        let k = self.round_of(hi);
        (hi.is_task() && k > 0 && self.winner(k).parent == lo).then_some(k)
    }

    /// Robot whose tree contains `v`.
    pub fn owner(&self, v: EntityId) -> EntityId {
        let mut cur = v;
        while cur.is_task() {
            cur = self.winner(self.round_of(cur)).parent;
        }
        cur
    }
}

/// `B_e = { k : min(a(x), a(y)) < k <= max(a(x), a(y)) }`.
pub fn bid_rounds(edge: Edge, assignment: &[usize]) -> Range<usize> {
    let (ax, ay) = (assignment[edge.a().index()], assignment[edge.b().index()]);
    ax.min(ay) + 1..ax.max(ay) + 1
}

#[derive(Clone, Copy)]
struct BestTwo<S> {
    best: Option<(S, EntityId)>,
    second: Option<(S, EntityId)>,
}

impl<S: Scalar> BestTwo<S> {
    fn new() -> Self {
        Self {
            best: None,
            second: None,
        }
    }

    fn offer(&mut self, cost: S, bidder: EntityId) {
        let better = |a: (S, EntityId), b: (S, EntityId)| {
            total_cmp(a.0, b.0)
                .then(a.1.index().cmp(&b.1.index()))
                .is_lt()
        };
        let bid = (cost, bidder);
        match self.best {
            Some(b) if !better(bid, b) => {
                if self.second.is_none_or(|s| better(bid, s)) {
                    self.second = Some(bid);
                }
            }
            _ => {
                self.second = self.best;
                self.best = Some(bid);
            }
        }
    }
}

/// Runs the auction. The table must be in metric mode (zero diagonal,
/// symmetric, non-negative); the triangle inequality is not needed.
pub fn run_auction<S: Scalar>(costs: &CostTable<S>) -> Result<AuctionOutcome<S>> {
    costs.require_metric_mode()?;
    let (m, n) = (costs.m(), costs.n());
    let mut assignment = vec![0usize; m + n];
    let mut winners = Vec::with_capacity(n);
    let mut runners_up = Vec::with_capacity(n);

    // Best two bids per unassigned task, over bidders in R ∪ A.
    let mut open: Vec<EntityId> = costs.tasks().collect();
    let mut offers: Vec<BestTwo<S>> = vec![BestTwo::new(); n];
    for t in &open {
        let slot = &mut offers[t.index() - m];
        for r in costs.robots() {
            slot.offer(costs.get(r.index(), t.index()), r);
        }
    }

    for round in 1..=n {
        let as_bid = |t: EntityId, o: Option<(S, EntityId)>| {
            o.map(|(cost, bidder)| Bid { bidder, task: t, cost })
        };
        let mut best: Option<(usize, Bid<S>)> = None;
        for (pos, &t) in open.iter().enumerate() {
            if let Some(bid) = as_bid(t, offers[t.index() - m].best) {
                if best.is_none_or(|(_, b)| bid.auction_cmp(&b).is_lt()) {
                    best = Some((pos, bid));
                }
            }
        }
        let Some((pos, win)) = best.filter(|(_, b)| b.cost.is_finite()) else {
            let task = open.first().map_or(m, |t| t.index());
            return Err(Error::UnreachableTask { task, round });
        };

        let mut second = as_bid(win.task, offers[win.task.index() - m].second);
        for &t in &open {
            if t == win.task {
                continue;
            }
            if let Some(bid) = as_bid(t, offers[t.index() - m].best) {
                if second.is_none_or(|s| bid.auction_cmp(&s).is_lt()) {
                    second = Some(bid);
                }
            }
        }

        winners.push(WinningEdge {
            parent: win.bidder,
            task: win.task,
            round,
            cost: win.cost,
        });
        runners_up.push(second);
        assignment[win.task.index()] = round;
        open.remove(pos);
        for &t in &open {
            offers[t.index() - m].offer(costs.get(win.task.index(), t.index()), win.task);
        }
    }

    let ties = find_ties(costs, &assignment);
    Ok(AuctionOutcome {
        winners,
        assignment,
        runners_up,
        tie_flag: !ties.is_empty(),
        ties,
        m,
    })
}

/// Pairs of equal-cost edges that are candidates in a common round.
fn find_ties<S: Scalar>(costs: &CostTable<S>, assignment: &[usize]) -> Vec<(Edge, Edge)> {
    let mut edges: Vec<(S, Edge)> = costs
        .edges()
        .filter(|e| !e.is_robot_robot())
        .map(|e| (costs.cost(e), e))
        .collect();
    edges.sort_by(|x, y| total_cmp(x.0, y.0).then(x.1.cmp(&y.1)));

    let mut ties = Vec::new();
    for group in edges.chunk_by(|x, y| x.0 == y.0) {
        if group.len() < 2 {
            continue;
        }
        for (i, (_, e)) in group.iter().enumerate() {
            let re = bid_rounds(*e, assignment);
            for (_, f) in &group[i + 1..] {
                let rf = bid_rounds(*f, assignment);
                if re.start < rf.end && rf.start < re.end {
                    ties.push((*e, *f));
                    if ties.len() >= MAX_REPORTED_TIES {
                        return ties;
                    }
                }
            }
        }
    }
    ties
}

/// Round `k` trace entry: every candidate with its bid, in auction order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTrace<S = f64> {
    pub round: usize,
    pub candidates: Vec<Bid<S>>,
    pub winner: Bid<S>,
    pub runner_up: Option<Bid<S>>,
}

/// Candidates of round `k` reconstructed from the assignment function:
/// bidders with `a(s) < k`, unassigned tasks with `a(t) >= k`.
pub fn round_candidates<S: Scalar>(
    costs: &CostTable<S>,
    outcome: &AuctionOutcome<S>,
    round: usize,
) -> Vec<Bid<S>> {
    let mut bids: Vec<Bid<S>> = costs
        .tasks()
        .filter(|t| outcome.round_of(*t) >= round)
        .flat_map(|t| {
            costs
                .entities()
                .filter(move |s| s.is_robot() || outcome.round_of(*s) < round)
                .filter(move |s| *s != t)
                .map(move |s| Bid {
                    bidder: s,
                    task: t,
                    cost: costs.get(s.index(), t.index()),
                })
        })
        .collect();
    bids.sort_by(Bid::auction_cmp);
    bids
}

/// Runs the auction and records the full candidate list of every round.
pub fn run_auction_traced<S: Scalar>(
    costs: &CostTable<S>,
) -> Result<(AuctionOutcome<S>, Vec<RoundTrace<S>>)> {
    let outcome = run_auction(costs)?;
    let trace = (1..=outcome.n())
        .map(|k| {
            let candidates = round_candidates(costs, &outcome, k);
            let w = outcome.winner(k);
            RoundTrace {
                round: k,
                winner: Bid {
                    bidder: w.parent,
                    task: w.task,
                    cost: w.cost,
                },
                runner_up: outcome.runner_up(k).copied(),
                candidates,
            }
        })
        .collect();
    Ok((outcome, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(m: usize, n: usize, rows: &[&[f64]]) -> CostTable<f64> {
        CostTable::from_rows(m, n, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_candidate_round() {
        let c = table(1, 1, &[&[0.0, 7.0], &[7.0, 0.0]]);
        let o = run_auction(&c).unwrap();
        assert_eq!(o.winners.len(), 1);
        assert_eq!(o.winner(1).cost, 7.0);
        assert_eq!(o.round_of(EntityId::task(1, 0)), 1);
        assert!(o.runner_up(1).is_none());
        assert_eq!(o.runner_up_cost(1), f64::INFINITY);
        assert!(!o.tie_flag);
    }

    #[test]
    fn no_tasks() {
        let c = table(2, 0, &[&[0.0, 1.0], &[1.0, 0.0]]);
        let o = run_auction(&c).unwrap();
        assert!(o.winners.is_empty());
        assert_eq!(o.assignment, vec![0, 0]);
    }

    #[test]
    fn unreachable_task() {
        let inf = f64::INFINITY;
        let c = table(
            1,
            2,
            &[&[0.0, 1.0, inf], &[1.0, 0.0, inf], &[inf, inf, 0.0]],
        );
        assert!(matches!(
            run_auction(&c),
            Err(Error::UnreachableTask { round: 2, .. })
        ));
    }

    #[test]
    fn non_metric_mode_is_rejected() {
        let c = table(1, 1, &[&[1.0, 2.0], &[2.0, 0.0]]);
        assert!(matches!(run_auction(&c), Err(Error::NotMetricMode(_))));
    }

    #[test]
    fn tie_break_prefers_smaller_task_then_bidder() {
        // Both robots bid 1 on both tasks.
        let c = table(
            2,
            2,
            &[
                &[0.0, 5.0, 1.0, 1.0],
                &[5.0, 0.0, 1.0, 1.0],
                &[1.0, 1.0, 0.0, 3.0],
                &[1.0, 1.0, 3.0, 0.0],
            ],
        );
        let o = run_auction(&c).unwrap();
        assert!(o.tie_flag);
        assert_eq!(o.winner(1).task, EntityId::task(2, 0));
        assert_eq!(o.winner(1).parent, EntityId::robot(0));
        assert_eq!(o.winner(2).task, EntityId::task(2, 1));
        assert_eq!(o.winner(2).parent, EntityId::robot(0));
    }

    #[test]
    fn robot_robot_edges_have_no_bid_rounds() {
        let a = vec![0, 0, 1];
        let e = Edge::new(EntityId::robot(0), EntityId::robot(1));
        assert!(bid_rounds(e, &a).is_empty());
    }
}
