//! Folding execution and boot-up costs into traversal costs.
//!
//! Vertices joined by zero-cost pairs are merged into one cell, and the
//! diagonal of the original table is pushed onto the off-diagonal entries so
//! that every robot-route keeps its cost while the new table has a zero
//! diagonal.

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::metric::{validate_metric, Axiom};
use crate::model::{CostTable, EntityId, MrtaInstance, Route};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientInstance<S = f64> {
    /// Cells in order of their smallest member; cells containing a robot
    /// come first.
    pub partition: Vec<Vec<EntityId>>,
    /// Costs between cells. Cells holding a robot are the "robots" of this
    /// table.
    pub qcosts: CostTable<S>,
    pub cprime_is_metric: bool,
    /// Shared task execution cost, when one exists.
    pub lambda: Option<S>,
    cell_of: Vec<usize>,
}

impl<S: Scalar> QuotientInstance<S> {
    pub fn cell_of(&self, v: EntityId) -> usize {
        self.cell_of[v.index()]
    }

    /// Maps every vertex of `route` to its cell.
    pub fn map_route(&self, route: &Route) -> Route {
        Route::new(
            route
                .vertices
                .iter()
                .map(|v| self.qcosts.entity(self.cell_of(*v)))
                .collect(),
        )
    }
}

/// Builds the quotient table. Requires M1, M3 and M4 within `tol`.
pub fn quotient_metricize<S: Scalar>(
    instance: &MrtaInstance<S>,
    tol: S,
) -> Result<QuotientInstance<S>> {
    let costs = &instance.costs;
    let report = validate_metric(costs, tol);
    for (holds, axiom) in [
        (report.holds_m1, Axiom::M1),
        (report.holds_m3, Axiom::M3),
        (report.holds_m4, Axiom::M4),
    ] {
        if !holds {
            let witness = report
                .violations_of(axiom)
                .next()
                .map(|v| format!("{:?}", v.witness))
                .unwrap_or_default();
            return Err(Error::AxiomPrecondition(format!(
                "{axiom} fails, witness {witness}"
            )));
        }
    }

    let size = costs.len();
    let mut clusters = UnionFind::<usize>::new(size);
    for x in 0..size {
        for y in x + 1..size {
            if costs.get(x, y) <= tol {
                clusters.union(x, y);
            }
        }
    }

    // Cells ordered by smallest member, so robot-bearing cells lead.
    let mut cell_of = vec![usize::MAX; size];
    let mut partition: Vec<Vec<EntityId>> = Vec::new();
    let mut root_cell = vec![usize::MAX; size];
    for v in 0..size {
        let root = clusters.find(v);
        if root_cell[root] == usize::MAX {
            root_cell[root] = partition.len();
            partition.push(Vec::new());
        }
        let cell = root_cell[root];
        cell_of[v] = cell;
        partition[cell].push(costs.entity(v));
    }

    let q_m = partition
        .iter()
        .filter(|cell| cell.iter().any(|v| v.is_robot()))
        .count();
    let q_n = partition.len() - q_m;
    let rep: Vec<usize> = partition.iter().map(|cell| cell[0].index()).collect();
    let has_task: Vec<bool> = partition
        .iter()
        .map(|cell| cell.iter().any(|v| v.is_task()))
        .collect();

    let qcosts = CostTable::from_fn(q_m, q_n, |i, j| {
        if i == j {
            return S::zero();
        }
        let alpha = if has_task[i] && has_task[j] {
            S::zero()
        } else {
            S::one()
        };
        let (vi, vj) = (rep[i], rep[j]);
        let own = costs.get(vi, vi);
        // 0 · ∞ must stay 0.
        let boot = if alpha == S::zero() { S::zero() } else { own };
        boot + costs.get(vi, vj) + costs.get(vj, vj)
    });

    let task_diag: Vec<S> = costs.tasks().map(|t| costs.get(t.index(), t.index())).collect();
    let (lo, hi) = task_diag
        .iter()
        .fold((S::infinity(), S::neg_infinity()), |(lo, hi), &d| {
            (lo.min(d), hi.max(d))
        });
    let cprime_is_metric = task_diag.is_empty() || hi - lo <= tol;
    let lambda = if cprime_is_metric {
        task_diag.first().copied()
    } else {
        None
    };

    Ok(QuotientInstance {
        partition,
        qcosts,
        cprime_is_metric,
        lambda,
        cell_of,
    })
}
