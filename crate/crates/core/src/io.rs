//! JSON formats for instances, plans and interval families.
//!
//! Infinite values are written as the string `"inf"`; readers also accept
//! `"infinity"`, `"Infinity"` and `"∞"`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::auction::{AuctionOutcome, RoundTrace};
use crate::error::{Error, Result};
use crate::geometry::{euclidean_costs, obstacle_costs, Obstacle};
use crate::model::{CostTable, Edge, MrtaInstance, Plan, Route};
use crate::sensitivity::{EdgeRole, IntervalFamily};

/// A JSON number, or a string spelling of infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonNumber {
    Finite(f64),
    Text(InfText),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InfText {
    #[serde(rename = "inf", alias = "infinity", alias = "Infinity", alias = "∞", alias = "+inf")]
    Inf,
}

impl JsonNumber {
    pub fn get(self) -> f64 {
        match self {
            JsonNumber::Finite(v) => v,
            JsonNumber::Text(InfText::Inf) => f64::INFINITY,
        }
    }
}

impl From<f64> for JsonNumber {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            JsonNumber::Text(InfText::Inf)
        } else {
            JsonNumber::Finite(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub rect: [f64; 4],
}

/// On-disk instance. An explicit `cost_matrix` takes precedence over
/// positions; otherwise costs are Euclidean, or shortest paths around
/// `obstacles` when any are given. `execution_costs`, one per entity,
/// overwrite the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub robots: Vec<EntitySpec>,
    pub tasks: Vec<EntitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_matrix: Option<Vec<Vec<JsonNumber>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub execution_costs: Option<Vec<JsonNumber>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub obstacles: Vec<ObstacleSpec>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<MrtaInstance<f64>> {
        let (m, n) = (self.robots.len(), self.tasks.len());
        let entities: Vec<&EntitySpec> = self.robots.iter().chain(&self.tasks).collect();
        let mut labels: Vec<&str> = entities.iter().map(|e| e.id.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Input(format!("duplicate entity id {:?}", w[0])));
        }
        let positions: Option<Vec<Vec<f64>>> = entities.iter().map(|e| e.pos.clone()).collect();

        let mut costs = match (&self.cost_matrix, &positions) {
            (Some(rows), _) => CostTable::from_rows(
                m,
                n,
                rows.iter()
                    .map(|r| r.iter().map(|v| v.get()).collect())
                    .collect(),
            )?,
            (None, Some(pos)) if self.obstacles.is_empty() => euclidean_costs(m, n, pos)?,
            (None, Some(pos)) => {
                let obstacles = self
                    .obstacles
                    .iter()
                    .map(|o| Obstacle::new(o.rect[0], o.rect[1], o.rect[2], o.rect[3]))
                    .collect::<Result<Vec<_>>>()?;
                obstacle_costs(m, n, pos, &obstacles)?
            }
            (None, None) => {
                return Err(Error::Input(
                    "instance needs a cost_matrix or a position for every entity".into(),
                ))
            }
        };
        if let Some(exec) = &self.execution_costs {
            if exec.len() != m + n {
                return Err(Error::DimensionMismatch(format!(
                    "{} execution costs for {} entities",
                    exec.len(),
                    m + n
                )));
            }
            for (i, v) in exec.iter().enumerate() {
                costs.set(i, i, v.get());
            }
        }

        let mut instance = MrtaInstance::new(costs).with_name(self.name);
        instance.robot_ids = self.robots.into_iter().map(|e| e.id).collect();
        instance.task_ids = self.tasks.into_iter().map(|e| e.id).collect();
        match positions {
            Some(pos) => instance.with_positions(pos),
            None => Ok(instance),
        }
    }

    /// Serialises an instance with its full cost matrix.
    pub fn from_instance(instance: &MrtaInstance<f64>) -> Self {
        let pos = |i: usize| instance.positions.as_ref().map(|p| p[i].clone());
        let m = instance.m();
        Self {
            name: instance.name.clone(),
            robots: instance
                .robot_ids
                .iter()
                .enumerate()
                .map(|(i, id)| EntitySpec {
                    id: id.clone(),
                    pos: pos(i),
                })
                .collect(),
            tasks: instance
                .task_ids
                .iter()
                .enumerate()
                .map(|(j, id)| EntitySpec {
                    id: id.clone(),
                    pos: pos(m + j),
                })
                .collect(),
            cost_matrix: Some(
                instance
                    .costs
                    .rows()
                    .into_iter()
                    .map(|r| r.into_iter().map(JsonNumber::from).collect())
                    .collect(),
            ),
            execution_costs: None,
            obstacles: Vec::new(),
        }
    }
}

pub fn parse_instance(json: &str) -> Result<MrtaInstance<f64>> {
    serde_json::from_str::<InstanceFile>(json)?.into_instance()
}

pub fn instance_to_json(instance: &MrtaInstance<f64>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&InstanceFile::from_instance(instance))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub robot: String,
    /// Tasks in visiting order, without the robot.
    pub sequence: Vec<String>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerRecord {
    pub round: usize,
    pub from: String,
    pub to: String,
    pub edge: String,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidRecord {
    pub bidder: String,
    pub task: String,
    pub cost: JsonNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub winner: BidRecord,
    pub runner_up: Option<BidRecord>,
    pub candidates: Vec<BidRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub routes: Vec<RouteRecord>,
    pub total_cost: f64,
    pub winning_edges: Vec<WinnerRecord>,
    /// Assignment round per entity label; robots map to 0.
    pub assignment: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<RoundRecord>>,
}

impl PlanFile {
    pub fn new(
        instance: &MrtaInstance<f64>,
        plan: &Plan<f64>,
        outcome: &AuctionOutcome<f64>,
        trace: Option<&[RoundTrace<f64>]>,
    ) -> Result<Self> {
        let label = |v| instance.label(v).to_string();
        let bid = |b: &crate::auction::Bid<f64>| BidRecord {
            bidder: label(b.bidder),
            task: label(b.task),
            cost: b.cost.into(),
        };
        Ok(Self {
            routes: plan
                .routes
                .iter()
                .map(|r| {
                    Ok(RouteRecord {
                        robot: label(r.vertices[0]),
                        sequence: r.tasks().iter().map(|v| label(*v)).collect(),
                        cost: crate::model::route_cost(r, &instance.costs)?,
                    })
                })
                .collect::<Result<_>>()?,
            total_cost: plan.total_cost,
            winning_edges: outcome
                .winners
                .iter()
                .map(|w| WinnerRecord {
                    round: w.round,
                    from: label(w.parent),
                    to: label(w.task),
                    edge: instance.edge_label(w.edge()),
                    cost: w.cost,
                })
                .collect(),
            assignment: instance
                .costs
                .entities()
                .map(|v| (label(v), outcome.round_of(v)))
                .collect(),
            trace: trace.map(|t| {
                t.iter()
                    .map(|r| RoundRecord {
                        round: r.round,
                        winner: bid(&r.winner),
                        runner_up: r.runner_up.as_ref().map(bid),
                        candidates: r.candidates.iter().map(bid).collect(),
                    })
                    .collect()
            }),
        })
    }

    /// Rebuilds the routes against `instance` and prices them afresh.
    pub fn to_plan(&self, instance: &MrtaInstance<f64>) -> Result<Plan<f64>> {
        let routes = self
            .routes
            .iter()
            .map(|r| {
                std::iter::once(&r.robot)
                    .chain(&r.sequence)
                    .map(|l| {
                        instance
                            .entity_by_label(l)
                            .ok_or_else(|| Error::Input(format!("unknown entity {l:?} in plan")))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Route::new)
            })
            .collect::<Result<Vec<_>>>()?;
        Plan::priced(routes, &instance.costs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub edge: String,
    pub a: String,
    pub b: String,
    pub cost: f64,
    pub max_decrease: f64,
    pub max_increase: JsonNumber,
    /// `B_e` as an explicit list of rounds.
    pub bid_rounds: Vec<usize>,
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winning_round: Option<usize>,
    /// Upper end is infinite or a finite cap standing in for infinity.
    pub unbounded: bool,
    pub unconstrained: bool,
    /// Distance from zero to the nearer interval end.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub m: usize,
    pub n: usize,
    pub edges: Vec<EdgeRecord>,
}

impl FamilyFile {
    pub fn new(
        instance: &MrtaInstance<f64>,
        outcome: &AuctionOutcome<f64>,
        family: &IntervalFamily<f64>,
    ) -> Self {
        let edges = instance
            .costs
            .edges()
            .enumerate()
            .map(|(i, e)| {
                let (role, winning_round) = match family.roles[i] {
                    EdgeRole::Winner { round } => ("winner", Some(round)),
                    EdgeRole::Loser => ("loser", None),
                    EdgeRole::Unconstrained => ("unconstrained", None),
                };
                let (lo, hi) = (family.lower[i], family.upper[i]);
                EdgeRecord {
                    edge: instance.edge_label(e),
                    a: instance.label(e.a()).to_string(),
                    b: instance.label(e.b()).to_string(),
                    cost: instance.costs.cost(e),
                    max_decrease: lo,
                    max_increase: hi.into(),
                    bid_rounds: outcome.bid_rounds(e).collect(),
                    role: role.to_string(),
                    winning_round,
                    unbounded: hi.is_infinite() || family.capped[i],
                    unconstrained: family.roles[i] == EdgeRole::Unconstrained,
                    margin: lo.min(hi),
                }
            })
            .collect();
        Self {
            m: instance.m(),
            n: instance.n(),
            edges,
        }
    }

    /// Reads the bounds back against `instance`, matching edges by their
    /// endpoint labels. Every edge of the instance must be listed once.
    pub fn to_family(&self, instance: &MrtaInstance<f64>) -> Result<IntervalFamily<f64>> {
        if self.m != instance.m() || self.n != instance.n() {
            return Err(Error::DimensionMismatch(format!(
                "family over m={}, n={} for instance with m={}, n={}",
                self.m,
                self.n,
                instance.m(),
                instance.n()
            )));
        }
        let count = instance.costs.edge_count();
        let mut lower = vec![f64::NAN; count];
        let mut upper = vec![f64::NAN; count];
        let mut roles = vec![EdgeRole::Unconstrained; count];
        let mut capped = vec![false; count];
        for rec in &self.edges {
            let find = |l: &str| {
                instance
                    .entity_by_label(l)
                    .ok_or_else(|| Error::Input(format!("unknown entity {l:?} in family")))
            };
            let edge = Edge::try_new(find(&rec.a)?, find(&rec.b)?)
                .ok_or_else(|| Error::Input(format!("edge {} joins a vertex to itself", rec.edge)))?;
            let i = instance.costs.edge_index(edge);
            if !lower[i].is_nan() {
                return Err(Error::Input(format!("edge {} listed twice", rec.edge)));
            }
            lower[i] = rec.max_decrease;
            upper[i] = rec.max_increase.get();
            roles[i] = match (rec.role.as_str(), rec.winning_round) {
                ("winner", Some(round)) => EdgeRole::Winner { round },
                ("loser", _) => EdgeRole::Loser,
                ("unconstrained", _) => EdgeRole::Unconstrained,
                (other, _) => {
                    return Err(Error::Input(format!("edge {} has role {other:?}", rec.edge)))
                }
            };
            capped[i] = rec.unbounded && upper[i].is_finite();
        }
        if let Some(i) = lower.iter().position(|v| v.is_nan()) {
            let e = instance.costs.edges().nth(i).expect("index within edge count");
            return Err(Error::Input(format!(
                "family lacks edge {}",
                instance.edge_label(e)
            )));
        }
        IntervalFamily::from_parts(self.m, self.n, lower, upper, roles, capped)
    }
}
