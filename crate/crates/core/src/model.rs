//! Instance representation: entities, edges, cost tables, routes and plans.
//!
//! Entities follow a canonical ordering `[r_1..r_m, t_1..t_n]`; every
//! iteration order in the crate is derived from it, so outputs are
//! reproducible bit for bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Robot,
    Task,
}

/// Position of a robot or task in the canonical ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EntityId {
    index: usize,
    kind: EntityKind,
}

impl EntityId {
    pub fn robot(i: usize) -> Self {
        Self {
            index: i,
            kind: EntityKind::Robot,
        }
    }

    /// Task `j` (zero based) in an instance with `m` robots.
    pub fn task(m: usize, j: usize) -> Self {
        Self {
            index: m + j,
            kind: EntityKind::Task,
        }
    }

    pub fn from_index(index: usize, m: usize) -> Self {
        if index < m {
            Self::robot(index)
        } else {
            Self::task(m, index - m)
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self.index
    }

    #[inline]
    pub fn kind(self) -> EntityKind {
        self.kind
    }

    #[inline]
    pub fn is_robot(self) -> bool {
        self.kind == EntityKind::Robot
    }

    #[inline]
    pub fn is_task(self) -> bool {
        self.kind == EntityKind::Task
    }
}

/// Unordered pair of distinct entities, stored with `a.index() < b.index()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    a: EntityId,
    b: EntityId,
}

impl Edge {
    pub fn try_new(x: EntityId, y: EntityId) -> Option<Self> {
        match x.index.cmp(&y.index) {
            std::cmp::Ordering::Less => Some(Self { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(Self { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// # Panics
    /// If `x == y`.
    pub fn new(x: EntityId, y: EntityId) -> Self {
        Self::try_new(x, y).expect("an edge joins two distinct entities")
    }

    #[inline]
    pub fn a(self) -> EntityId {
        self.a
    }

    #[inline]
    pub fn b(self) -> EntityId {
        self.b
    }

    pub fn contains(self, v: EntityId) -> bool {
        self.a == v || self.b == v
    }

    /// Both endpoints are robots. The auction never bids on such edges.
    pub fn is_robot_robot(self) -> bool {
        self.a.is_robot() && self.b.is_robot()
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EntityKind::Robot => write!(f, "r#{}", self.index),
            EntityKind::Task => write!(f, "t#{}", self.index),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

/// Pairwise cost function over `R ⊔ T` as a dense `(m+n)×(m+n)` matrix.
///
/// Entries may be `+∞`. The diagonal holds execution (task) and boot-up
/// (robot) costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable<S = f64> {
    m: usize,
    n: usize,
    entries: Vec<S>,
}

impl<S: Scalar> CostTable<S> {
    pub fn from_rows(m: usize, n: usize, rows: Vec<Vec<S>>) -> Result<Self> {
        let size = m + n;
        if rows.len() != size {
            return Err(Error::Shape {
                expected: size,
                found: format!("{} rows", rows.len()),
            });
        }
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != size {
                return Err(Error::Shape {
                    expected: size,
                    found: format!("row {i} with {} columns", row.len()),
                });
            }
            for (j, v) in row.into_iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::NotANumber { row: i, col: j });
                }
                entries.push(v);
            }
        }
        Ok(Self { m, n, entries })
    }

    /// # Panics
    /// If `f` yields NaN.
    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let size = m + n;
        let mut entries = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let v = f(i, j);
                assert!(!v.is_nan(), "cost ({i}, {j}) is NaN");
                entries.push(v);
            }
        }
        Self { m, n, entries }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of entities, `m + n`.
    #[inline]
    pub fn len(&self) -> usize {
        self.m + self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.entries[i * self.len() + j]
    }

    pub fn try_get(&self, i: usize, j: usize) -> Result<S> {
        let len = self.len();
        for index in [i, j] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        Ok(self.get(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, value: S) {
        assert!(!value.is_nan(), "cost ({i}, {j}) is NaN");
        let len = self.len();
        self.entries[i * len + j] = value;
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_pair(&mut self, i: usize, j: usize, value: S) {
        self.set(i, j, value);
        self.set(j, i, value);
    }

    #[inline]
    pub fn cost(&self, edge: Edge) -> S {
        self.get(edge.a.index, edge.b.index)
    }

    pub fn set_edge(&mut self, edge: Edge, value: S) {
        self.set_pair(edge.a.index, edge.b.index, value);
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.entries.chunks(self.len().max(1)).map(<[S]>::to_vec).collect()
    }

    pub fn entity(&self, index: usize) -> EntityId {
        EntityId::from_index(index, self.m)
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.len()).map(|i| self.entity(i))
    }

    pub fn robots(&self) -> impl Iterator<Item = EntityId> {
        (0..self.m).map(EntityId::robot)
    }

    pub fn tasks(&self) -> impl Iterator<Item = EntityId> {
        let m = self.m;
        (0..self.n).map(move |j| EntityId::task(m, j))
    }

    /// `|E| = N(N-1)/2` for `N = m + n`.
    pub fn edge_count(&self) -> usize {
        let size = self.len();
        size * size.saturating_sub(1) / 2
    }

    /// Edges in canonical order: `(0,1), (0,2), …, (1,2), …`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let size = self.len();
        (0..size).flat_map(move |i| {
            (i + 1..size).map(move |j| Edge {
                a: self.entity(i),
                b: self.entity(j),
            })
        })
    }

    /// Position of `edge` in [`edges`](Self::edges).
    pub fn edge_index(&self, edge: Edge) -> usize {
        let size = self.len();
        let (i, j) = (edge.a.index, edge.b.index);
        i * size - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn edge_between(&self, i: usize, j: usize) -> Option<Edge> {
        Edge::try_new(self.entity(i), self.entity(j))
    }

    /// Largest finite entry, or zero if there is none.
    pub fn max_finite(&self) -> S {
        self.entries
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(S::zero(), S::max)
    }

    /// Checks the conditions the auction relies on: non-negative, symmetric,
    /// zero diagonal.
    pub fn require_metric_mode(&self) -> Result<()> {
        let size = self.len();
        for i in 0..size {
            if self.get(i, i) != S::zero() {
                return Err(Error::NotMetricMode(format!(
                    "diagonal entry {i} is {}",
                    self.get(i, i)
                )));
            }
            for j in i + 1..size {
                let (x, y) = (self.get(i, j), self.get(j, i));
                if x < S::zero() || y < S::zero() {
                    return Err(Error::NotMetricMode(format!("negative cost at ({i}, {j})")));
                }
                if x != y {
                    return Err(Error::NotMetricMode(format!(
                        "asymmetric pair ({i}, {j}): {x} vs {y}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn cast<T: Scalar>(&self) -> CostTable<T> {
        CostTable {
            m: self.m,
            n: self.n,
            entries: self.entries.iter().map(|v| T::of(v.as_f64())).collect(),
        }
    }
}

/// A robot-task problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MrtaInstance<S = f64> {
    pub name: String,
    pub robot_ids: Vec<String>,
    pub task_ids: Vec<String>,
    pub costs: CostTable<S>,
    pub positions: Option<Vec<Vec<S>>>,
}

impl<S: Scalar> MrtaInstance<S> {
    /// Instance with default labels `r1.., t1..`.
    pub fn new(costs: CostTable<S>) -> Self {
        let robot_ids = (1..=costs.m()).map(|i| format!("r{i}")).collect();
        let task_ids = (1..=costs.n()).map(|j| format!("t{j}")).collect();
        Self {
            name: String::new(),
            robot_ids,
            task_ids,
            costs,
            positions: None,
        }
    }

    pub fn with_positions(mut self, positions: Vec<Vec<S>>) -> Result<Self> {
        if positions.len() != self.costs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} positions for {} entities",
                positions.len(),
                self.costs.len()
            )));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.costs.m()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.costs.n()
    }

    pub fn label(&self, v: EntityId) -> &str {
        if v.is_robot() {
            &self.robot_ids[v.index()]
        } else {
            &self.task_ids[v.index() - self.m()]
        }
    }

    /// Concatenated endpoint labels, e.g. `r1t1`.
    pub fn edge_label(&self, e: Edge) -> String {
        format!("{}{}", self.label(e.a()), self.label(e.b()))
    }

    /// Looks up an entity by its label.
    pub fn entity_by_label(&self, label: &str) -> Option<EntityId> {
        if let Some(i) = self.robot_ids.iter().position(|r| r == label) {
            return Some(EntityId::robot(i));
        }
        self.task_ids
            .iter()
            .position(|t| t == label)
            .map(|j| EntityId::task(self.m(), j))
    }

    /// Same instance with a different cost table of identical shape.
    pub fn with_costs(&self, costs: CostTable<S>) -> Result<Self> {
        if costs.m() != self.m() || costs.n() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "expected m={}, n={}; got m={}, n={}",
                self.m(),
                self.n(),
                costs.m(),
                costs.n()
            )));
        }
        Ok(Self {
            costs,
            ..self.clone()
        })
    }
}

/// Ordered walk `(v_0, …, v_k)`; a robot-route starts at a robot and visits
/// only tasks afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    pub vertices: Vec<EntityId>,
}

impl Route {
    pub fn new(vertices: Vec<EntityId>) -> Self {
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_robot_route(&self) -> bool {
        match self.vertices.split_first() {
            Some((head, rest)) => head.is_robot() && rest.iter().all(|v| v.is_task()),
            None => false,
        }
    }

    pub fn tasks(&self) -> &[EntityId] {
        self.vertices.get(1..).unwrap_or(&[])
    }
}

/// One robot-route per robot, in robot order.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan<S = f64> {
    pub routes: Vec<Route>,
    pub total_cost: S,
}

impl<S: Scalar> Plan<S> {
    /// Builds a plan and prices it, checking that the routes partition `R ⊔ T`.
    pub fn priced(routes: Vec<Route>, costs: &CostTable<S>) -> Result<Self> {
        let mut plan = Self {
            routes,
            total_cost: S::zero(),
        };
        plan.total_cost = plan_cost(&plan, costs)?;
        Ok(plan)
    }
}

/// Cost of a walk: execution costs of every vertex plus consecutive traversal
/// costs, or zero for a single vertex.
pub fn route_cost<S: Scalar>(route: &Route, costs: &CostTable<S>) -> Result<S> {
    let v = &route.vertices;
    if v.is_empty() {
        return Err(Error::EmptyRoute);
    }
    for x in v {
        if x.index() >= costs.len() {
            return Err(Error::IndexOutOfRange {
                index: x.index(),
                len: costs.len(),
            });
        }
    }
    if v.len() == 1 {
        return Ok(S::zero());
    }
    let execution = v
        .iter()
        .fold(S::zero(), |acc, x| acc + costs.get(x.index(), x.index()));
    let traversal = v
        .windows(2)
        .fold(S::zero(), |acc, w| acc + costs.get(w[0].index(), w[1].index()));
    Ok(execution + traversal)
}

/// Sum of route costs; the routes must partition `R ⊔ T` with robot `i`
/// leading route `i`.
pub fn plan_cost<S: Scalar>(plan: &Plan<S>, costs: &CostTable<S>) -> Result<S> {
    check_partition(&plan.routes, costs)?;
    plan.routes
        .iter()
        .try_fold(S::zero(), |acc, r| Ok(acc + route_cost(r, costs)?))
}

fn check_partition<S: Scalar>(routes: &[Route], costs: &CostTable<S>) -> Result<()> {
    if routes.len() != costs.m() {
        return Err(Error::NotAPartition(format!(
            "{} routes for {} robots",
            routes.len(),
            costs.m()
        )));
    }
    let mut seen = vec![false; costs.len()];
    for (i, route) in routes.iter().enumerate() {
        match route.vertices.first() {
            Some(head) if head.is_robot() && head.index() == i => {}
            _ => {
                return Err(Error::NotAPartition(format!(
                    "route {i} must start at robot {}",
                    EntityId::robot(i)
                )))
            }
        }
        for (pos, v) in route.vertices.iter().enumerate() {
            if v.index() >= costs.len() {
                return Err(Error::IndexOutOfRange {
                    index: v.index(),
                    len: costs.len(),
                });
            }
            if pos > 0 && v.is_robot() {
                return Err(Error::NotAPartition(format!(
                    "robot {v} appears inside route {i}"
                )));
            }
            if std::mem::replace(&mut seen[v.index()], true) {
                return Err(Error::NotAPartition(format!("entity {v} visited twice")));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::NotAPartition(format!(
            "entity {} is not visited",
            costs.entity(missing)
        )));
    }
    Ok(())
}
