//! Cost-perturbation intervals on which the auction output is unchanged.
//!
//! For every edge `e` the family holds a half-open interval
//! `(-lower(e), upper(e)]` of additive changes. Any simultaneous change with
//! every `δ(e)` inside its interval leaves the winning-edge list `W`
//! unchanged, element by element and in order.
//!
//! The computation runs in two passes. [`initialiser`] picks the upper bound
//! of each winning edge, processing rounds from the most to the least
//! expensive winner and splitting the gap to each competing edge at its
//! midpoint unless an earlier round already forces a larger value.
//! [`error_intervals`] then derives every remaining bound from those upper
//! bounds: an edge competing in round `k` must stay above `c(w_k) + upper(w_k)`.

use std::cmp::Ordering;
use std::ops::{Bound, Range};

use serde::Serialize;

use crate::auction::AuctionOutcome;
use crate::error::{Error, Result};
use crate::model::{CostTable, Edge};
use crate::scalar::{total_cmp, Scalar};

/// Multiplier applied to the largest finite cost when an upper bound has no
/// competitor and would otherwise be infinite.
pub const UNBOUNDED_CAP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgeRole {
    /// `e = w_round`.
    Winner { round: usize },
    /// Candidate in at least one round, never wins.
    Loser,
    /// Robot-robot edge; never bid on.
    Unconstrained,
}

/// Upper bounds `I_0(w_k)` for the winning edges, indexed by round - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialBounds<S = f64> {
    pub values: Vec<S>,
    /// The round had no competitor; the value is a finite stand-in for `+∞`.
    pub capped: Vec<bool>,
}

impl<S: Scalar> InitialBounds<S> {
    /// Bounds given directly; none are flagged as capped.
    pub fn from_values(values: Vec<S>) -> Self {
        let capped = vec![false; values.len()];
        Self { values, capped }
    }

    pub fn get(&self, round: usize) -> S {
        self.values[round - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFamily<S = f64> {
    m: usize,
    n: usize,
    /// `Δ̲(e)`, indexed by canonical edge position.
    pub lower: Vec<S>,
    /// `Δ̄(e)`, `+∞` allowed.
    pub upper: Vec<S>,
    pub roles: Vec<EdgeRole>,
    /// Upper bound is a finite cap standing in for `+∞`.
    pub capped: Vec<bool>,
}

impl<S: Scalar> IntervalFamily<S> {
    /// Family over an `m`-robot, `n`-task edge set from raw bound vectors.
    pub fn from_parts(
        m: usize,
        n: usize,
        lower: Vec<S>,
        upper: Vec<S>,
        roles: Vec<EdgeRole>,
        capped: Vec<bool>,
    ) -> Result<Self> {
        let size = m + n;
        let edges = size * size.saturating_sub(1) / 2;
        for (name, len) in [
            ("lower", lower.len()),
            ("upper", upper.len()),
            ("roles", roles.len()),
            ("capped", capped.len()),
        ] {
            if len != edges {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has {len} entries for {edges} edges"
                )));
            }
        }
        Ok(Self {
            m,
            n,
            lower,
            upper,
            roles,
            capped,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    fn same_domain(&self, other_m: usize, other_n: usize) -> Result<()> {
        if self.m != other_m || self.n != other_n {
            return Err(Error::DimensionMismatch(format!(
                "family over m={}, n={} used with m={other_m}, n={other_n}",
                self.m, self.n
            )));
        }
        Ok(())
    }

    /// All `2|E|` bounds in increasing order, `+∞` last.
    pub fn rho(&self) -> Vec<S> {
        let mut v: Vec<S> = self.lower.iter().chain(&self.upper).copied().collect();
        v.sort_by(|a, b| total_cmp(*a, *b));
        v
    }

    /// Bounds flagged as standing in for `+∞` or belonging to never-bid edges.
    pub fn is_unconstrained(&self, index: usize) -> bool {
        self.roles[index] == EdgeRole::Unconstrained
    }
}

/// Additive change `δ(e)` per edge, by canonical edge position.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationDelta<S = f64> {
    pub values: Vec<S>,
}

impl<S: Scalar> PerturbationDelta<S> {
    pub fn zero(edges: usize) -> Self {
        Self {
            values: vec![S::zero(); edges],
        }
    }

    /// `δ = observed - original` on every edge.
    pub fn between(original: &CostTable<S>, observed: &CostTable<S>) -> Result<Self> {
        if original.m() != observed.m() || original.n() != observed.n() {
            return Err(Error::DimensionMismatch(format!(
                "observed table has m={}, n={}; expected m={}, n={}",
                observed.m(),
                observed.n(),
                original.m(),
                original.n()
            )));
        }
        Ok(Self {
            values: original
                .edges()
                .map(|e| observed.cost(e) - original.cost(e))
                .collect(),
        })
    }

    /// `c'(e) = c(e) + δ(e)`; fails if a perturbed cost would be negative.
    pub fn apply(&self, costs: &CostTable<S>) -> Result<CostTable<S>> {
        if self.values.len() != costs.edge_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} perturbations for {} edges",
                self.values.len(),
                costs.edge_count()
            )));
        }
        let mut out = costs.clone();
        for (e, d) in costs.edges().zip(&self.values) {
            let v = costs.cost(e) + *d;
            if v < S::zero() {
                return Err(Error::Input(format!(
                    "perturbed cost of {e} is negative ({v})"
                )));
            }
            out.set_edge(e, v);
        }
        Ok(out)
    }
}

/// Per-edge facts shared by both passes.
struct EdgeFacts<S> {
    edge: Edge,
    cost: S,
    rounds: Range<usize>,
    won: Option<usize>,
}

fn edge_facts<S: Scalar>(costs: &CostTable<S>, outcome: &AuctionOutcome<S>) -> Vec<EdgeFacts<S>> {
    costs
        .edges()
        .map(|edge| EdgeFacts {
            edge,
            cost: costs.cost(edge),
            rounds: outcome.bid_rounds(edge),
            won: outcome.winning_round(edge),
        })
        .collect()
}

fn require_untied<S: Scalar>(outcome: &AuctionOutcome<S>) -> Result<()> {
    if outcome.tie_flag {
        return Err(Error::TiedCosts {
            ties: outcome.ties.clone(),
        });
    }
    Ok(())
}

fn cap_for<S: Scalar>(costs: &CostTable<S>) -> S {
    let cap = S::of(UNBOUNDED_CAP_FACTOR) * costs.max_finite();
    if cap > S::zero() {
        cap
    } else {
        S::one()
    }
}

/// Chooses the upper bound `I_0(w_k)` of every winning edge.
///
/// Rounds are processed by decreasing winner cost. For round `k`, every
/// other candidate edge `e` of that round proposes
/// `max(L(e), (c(w_k) + c(e)) / 2)`, where `L(e)` is the largest
/// `c(w_j) + I_0(w_j)` already fixed for a round `j` in which `e` competes.
/// The smallest proposal becomes `c(w_k) + I_0(w_k)`.
pub fn initialiser<S: Scalar>(
    costs: &CostTable<S>,
    outcome: &AuctionOutcome<S>,
) -> Result<InitialBounds<S>> {
    require_untied(outcome)?;
    let n = outcome.n();
    let facts = edge_facts(costs, outcome);
    let cap = cap_for(costs);

    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&j, &k| {
        total_cmp(outcome.winner(k).cost, outcome.winner(j).cost).then(j.cmp(&k))
    });

    let mut floor = vec![S::zero(); facts.len()];
    let mut values = vec![S::zero(); n];
    let mut capped = vec![false; n];
    let mut competitors: Vec<usize> = Vec::new();
    for k in order {
        let wk = outcome.winner(k).cost;
        competitors.clear();
        competitors.extend(
            facts
                .iter()
                .enumerate()
                .filter(|(_, f)| f.rounds.contains(&k) && f.won != Some(k))
                .map(|(i, _)| i),
        );
        let best = competitors
            .iter()
            .map(|&i| floor[i].max((wk + facts[i].cost) * S::half()))
            .fold(S::infinity(), S::min);
        if best.is_infinite() {
            values[k - 1] = cap;
            capped[k - 1] = true;
            continue;
        }
        let bound = best - wk;
        values[k - 1] = bound;
        let reach = wk + bound;
        for &i in &competitors {
            floor[i] = floor[i].max(reach);
        }
    }
    Ok(InitialBounds { values, capped })
}

/// Extends upper bounds on the winners to the maximal family having exactly
/// those upper bounds.
///
/// Requires `0 <= I_0(w_k) < c(u_k) - c(w_k)` for every round, with
/// `c(u_k) = +∞` when round `k` had a single candidate.
pub fn error_intervals<S: Scalar>(
    costs: &CostTable<S>,
    outcome: &AuctionOutcome<S>,
    initial: &InitialBounds<S>,
) -> Result<IntervalFamily<S>> {
    let n = outcome.n();
    if initial.values.len() != n || initial.capped.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} initial bounds for {n} rounds",
            initial.values.len()
        )));
    }
    for k in 1..=n {
        let value = initial.get(k);
        let limit = outcome.runner_up_cost(k) - outcome.winner(k).cost;
        if !(value >= S::zero() && value < limit) {
            return Err(Error::InitialBound {
                round: k,
                value: value.as_f64(),
                limit: limit.as_f64(),
            });
        }
    }

    // c(w_k) + Δ̄(w_k), by round - 1.
    let reach: Vec<S> = (1..=n)
        .map(|k| outcome.winner(k).cost + initial.get(k))
        .collect();
    let max_reach = |rounds: Range<usize>| {
        rounds
            .map(|k| reach[k - 1])
            .fold(None, |acc: Option<S>, v| Some(acc.map_or(v, |a| a.max(v))))
    };

    let facts = edge_facts(costs, outcome);
    let mut lower = Vec::with_capacity(facts.len());
    let mut upper = Vec::with_capacity(facts.len());
    let mut roles = Vec::with_capacity(facts.len());
    let mut capped = Vec::with_capacity(facts.len());
    for f in &facts {
        let (lo, hi, role, cap) = if f.edge.is_robot_robot() || f.rounds.is_empty() {
            (f.cost, S::infinity(), EdgeRole::Unconstrained, false)
        } else if let Some(k) = f.won {
            // B_e \ {K}: the rounds before K in which e already competed.
            let others = f.rounds.start..k;
            let lo = max_reach(others).map_or(f.cost, |r| f.cost - r);
            (lo, initial.get(k), EdgeRole::Winner { round: k }, initial.capped[k - 1])
        } else {
            let r = max_reach(f.rounds.clone()).expect("losing edge competes in some round");
            (f.cost - r, S::infinity(), EdgeRole::Loser, false)
        };
        lower.push(lo);
        upper.push(hi);
        roles.push(role);
        capped.push(cap);
    }
    Ok(IntervalFamily {
        m: costs.m(),
        n: costs.n(),
        lower,
        upper,
        roles,
        capped,
    })
}

/// The lexicographically maximal family on which the auction is robust.
pub fn auction_sensitivity<S: Scalar>(
    costs: &CostTable<S>,
    outcome: &AuctionOutcome<S>,
) -> Result<IntervalFamily<S>> {
    let initial = initialiser(costs, outcome)?;
    error_intervals(costs, outcome, &initial)
}

/// `-lower(e) < δ(e) <= upper(e)` on every edge.
pub fn contains<S: Scalar>(family: &IntervalFamily<S>, delta: &PerturbationDelta<S>) -> Result<bool> {
    if delta.values.len() != family.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} perturbations for {} edges",
            delta.values.len(),
            family.len()
        )));
    }
    Ok(delta
        .values
        .iter()
        .zip(family.lower.iter().zip(&family.upper))
        .all(|(d, (lo, hi))| -*lo < *d && *d <= *hi))
}

/// Region of `c'(e)` keeping the auction output when only `e` changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeBounds<S = f64> {
    /// The auction never reads this edge.
    Unconstrained,
    Range { lower: Bound<S>, upper: Bound<S> },
}

impl<S: Scalar> EdgeBounds<S> {
    pub fn admits(&self, value: S) -> bool {
        match self {
            EdgeBounds::Unconstrained => true,
            EdgeBounds::Range { lower, upper } => {
                let above = match *lower {
                    Bound::Included(l) => value >= l,
                    Bound::Excluded(l) => value > l,
                    Bound::Unbounded => true,
                };
                let below = match *upper {
                    Bound::Included(u) => value <= u,
                    Bound::Excluded(u) => value < u,
                    Bound::Unbounded => true,
                };
                above && below
            }
        }
    }
}

/// Exact single-edge robustness region: losers must stay above every winner
/// of their rounds; a winner must stay below its runner-up and above the
/// winners of its other rounds (or at least zero).
pub fn single_edge_bounds<S: Scalar>(
    costs: &CostTable<S>,
    outcome: &AuctionOutcome<S>,
    edge: Edge,
) -> Result<EdgeBounds<S>> {
    require_untied(outcome)?;
    let rounds = outcome.bid_rounds(edge);
    if edge.is_robot_robot() || rounds.is_empty() {
        return Ok(EdgeBounds::Unconstrained);
    }
    if edge.b().index() >= costs.len() {
        return Err(Error::IndexOutOfRange {
            index: edge.b().index(),
            len: costs.len(),
        });
    }
    let max_winner = |r: Range<usize>| {
        r.map(|k| outcome.winner(k).cost)
            .fold(None, |acc: Option<S>, v| Some(acc.map_or(v, |a| a.max(v))))
    };
    Ok(match outcome.winning_round(edge) {
        None => EdgeBounds::Range {
            lower: Bound::Excluded(max_winner(rounds).expect("non-empty rounds")),
            upper: Bound::Unbounded,
        },
        Some(k) => {
            let upper = match outcome.runner_up(k) {
                Some(u) => Bound::Excluded(u.cost),
                None => Bound::Unbounded,
            };
            let lower = match max_winner(rounds.start..k) {
                Some(w) => Bound::Excluded(w),
                None => Bound::Included(S::zero()),
            };
            EdgeBounds::Range { lower, upper }
        }
    })
}

/// Lexicographic comparison of the sorted bound vectors; `+∞` is largest.
pub fn lex_compare<S: Scalar>(f1: &IntervalFamily<S>, f2: &IntervalFamily<S>) -> Result<Ordering> {
    f1.same_domain(f2.m, f2.n)?;
    let (r1, r2) = (f1.rho(), f2.rho());
    Ok(r1
        .iter()
        .zip(&r2)
        .map(|(a, b)| total_cmp(*a, *b))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

/// An observed cost outside its interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation<S = f64> {
    pub edge: Edge,
    pub original: S,
    pub observed: S,
    pub side: Side,
    /// `c(e) - lower(e)` (exclusive) or `c(e) + upper(e)` (inclusive).
    pub limit: S,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplanDecision<S = f64> {
    KeepPlan,
    Replan { violations: Vec<BoundViolation<S>> },
}

impl<S> ReplanDecision<S> {
    pub fn keeps_plan(&self) -> bool {
        matches!(self, ReplanDecision::KeepPlan)
    }
}

/// Compares observed costs against the family.
///
/// Edges marked unconstrained are skipped: the auction never reads them, so
/// no change to them can alter the plan.
pub fn replan_check<S: Scalar>(
    original: &CostTable<S>,
    family: &IntervalFamily<S>,
    observed: &CostTable<S>,
) -> Result<ReplanDecision<S>> {
    family.same_domain(original.m(), original.n())?;
    let delta = PerturbationDelta::between(original, observed)?;
    let mut violations = Vec::new();
    for (i, e) in original.edges().enumerate() {
        if family.is_unconstrained(i) {
            continue;
        }
        let (lo, hi, d) = (family.lower[i], family.upper[i], delta.values[i]);
        let c = original.cost(e);
        let side = if d <= -lo {
            Some((Side::Lower, c - lo))
        } else if d > hi {
            Some((Side::Upper, c + hi))
        } else {
            None
        };
        if let Some((side, limit)) = side {
            violations.push(BoundViolation {
                edge: e,
                original: c,
                observed: observed.cost(e),
                side,
                limit,
            });
        }
    }
    Ok(if violations.is_empty() {
        ReplanDecision::KeepPlan
    } else {
        ReplanDecision::Replan { violations }
    })
}
