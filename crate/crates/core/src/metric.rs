//! Metric-axiom validation and weighted combination of cost tables.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CostTable, Edge};
use crate::scalar::{total_cmp, Scalar};

/// Default tolerance for validation. Never used by the auction or the
/// interval computations, which compare exactly.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Axiom {
    /// Non-negativity.
    M1,
    /// `c(x, y) = 0` iff `x = y`.
    M2,
    /// Zero self-cost, the pseudometric weakening of M2.
    M2Prime,
    /// Symmetry.
    M3,
    /// Triangle inequality.
    M4,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::M1 => "M1",
            Axiom::M2 => "M2",
            Axiom::M2Prime => "M2'",
            Axiom::M3 => "M3",
            Axiom::M4 => "M4",
        };
        f.write_str(s)
    }
}

/// A failed axiom together with the entity indices that witness it.
///
/// Witness layout: `M1`/`M2`/`M2'`/`M3` use `(x, y)`; `M4` uses `(x, y, z)`
/// with `c(x, z) > c(x, y) + c(y, z)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
}

impl Violation {
    /// Re-evaluates the violated inequality against `costs`.
    pub fn reproduces<S: Scalar>(&self, costs: &CostTable<S>, tol: S) -> bool {
        let c = |i: usize, j: usize| costs.get(i, j);
        match (self.axiom, self.witness.as_slice()) {
            (Axiom::M1, &[x, y]) => c(x, y) < -tol,
            (Axiom::M2, &[x, y]) if x == y => c(x, x) > tol,
            (Axiom::M2, &[x, y]) => c(x, y) <= tol,
            (Axiom::M2Prime, &[x, _]) => c(x, x) > tol,
            (Axiom::M3, &[x, y]) => !symmetric_within(c(x, y), c(y, x), tol),
            (Axiom::M4, &[x, y, z]) => c(x, z) > c(x, y) + c(y, z) + tol,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub holds_m1: bool,
    pub holds_m2: bool,
    pub holds_m2_prime: bool,
    pub holds_m3: bool,
    pub holds_m4: bool,
    pub violations: Vec<Violation>,
    /// Off-diagonal edge costs pairwise distinct beyond the tolerance.
    pub is_injective_on_edges: bool,
    #[serde(skip)]
    pub duplicate_cost_pairs: Vec<(Edge, Edge)>,
}

impl MetricReport {
    pub fn is_metric(&self) -> bool {
        self.holds_m1 && self.holds_m2 && self.holds_m3 && self.holds_m4
    }

    pub fn is_pseudometric(&self) -> bool {
        self.holds_m1 && self.holds_m2_prime && self.holds_m3 && self.holds_m4
    }

    pub fn violations_of(&self, axiom: Axiom) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.axiom == axiom)
    }
}

fn symmetric_within<S: Scalar>(x: S, y: S, tol: S) -> bool {
    x == y || (x - y).abs() <= tol
}

/// Checks M1–M4 (and M2') on every pair and ordered triple.
pub fn validate_metric<S: Scalar>(costs: &CostTable<S>, tol: S) -> MetricReport {
    let size = costs.len();
    let c = |i: usize, j: usize| costs.get(i, j);
    let mut violations = Vec::new();

    for x in 0..size {
        for y in 0..size {
            if c(x, y) < -tol {
                violations.push(Violation {
                    axiom: Axiom::M1,
                    witness: vec![x, y],
                });
            }
        }
    }
    for x in 0..size {
        if c(x, x) > tol {
            violations.push(Violation {
                axiom: Axiom::M2Prime,
                witness: vec![x, x],
            });
            violations.push(Violation {
                axiom: Axiom::M2,
                witness: vec![x, x],
            });
        }
        for y in 0..size {
            if x != y && c(x, y) <= tol {
                violations.push(Violation {
                    axiom: Axiom::M2,
                    witness: vec![x, y],
                });
            }
        }
    }
    for x in 0..size {
        for y in x + 1..size {
            if !symmetric_within(c(x, y), c(y, x), tol) {
                violations.push(Violation {
                    axiom: Axiom::M3,
                    witness: vec![x, y],
                });
            }
        }
    }
    for x in 0..size {
        for y in 0..size {
            for z in 0..size {
                if c(x, z) > c(x, y) + c(y, z) + tol {
                    violations.push(Violation {
                        axiom: Axiom::M4,
                        witness: vec![x, y, z],
                    });
                }
            }
        }
    }

    let holds = |a: Axiom| !violations.iter().any(|v| v.axiom == a);
    let duplicate_cost_pairs = near_equal_edges(costs, tol);
    MetricReport {
        holds_m1: holds(Axiom::M1),
        holds_m2: holds(Axiom::M2),
        holds_m2_prime: holds(Axiom::M2Prime),
        holds_m3: holds(Axiom::M3),
        holds_m4: holds(Axiom::M4),
        is_injective_on_edges: duplicate_cost_pairs.is_empty(),
        duplicate_cost_pairs,
        violations,
    }
}

/// Pairs of distinct edges whose costs differ by at most `tol`, reported
/// between neighbours in cost order.
pub fn near_equal_edges<S: Scalar>(costs: &CostTable<S>, tol: S) -> Vec<(Edge, Edge)> {
    near_equal_in(costs, costs.edges(), tol)
}

pub(crate) fn near_equal_in<S: Scalar>(
    costs: &CostTable<S>,
    edges: impl Iterator<Item = Edge>,
    tol: S,
) -> Vec<(Edge, Edge)> {
    let mut by_cost: Vec<(S, Edge)> = edges.map(|e| (costs.cost(e), e)).collect();
    by_cost.sort_by(|x, y| total_cmp(x.0, y.0).then(x.1.cmp(&y.1)));
    by_cost
        .windows(2)
        .filter(|w| w[0].0 == w[1].0 || (w[1].0 - w[0].0) <= tol)
        .map(|w| (w[0].1, w[1].1))
        .collect()
}

/// Entrywise weighted sum `Σ w_i c_i`. A zero weight annihilates infinite
/// entries.
pub fn combine_metrics<S: Scalar>(tables: &[CostTable<S>], weights: &[S]) -> Result<CostTable<S>> {
    let first = tables
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no tables to combine".into()))?;
    if tables.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} tables but {} weights",
            tables.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < S::zero()) {
        return Err(Error::Input(format!("weight {w} is not a non-negative number")));
    }
    for t in tables {
        if t.m() != first.m() || t.n() != first.n() {
            return Err(Error::DimensionMismatch(format!(
                "table with m={}, n={} does not match m={}, n={}",
                t.m(),
                t.n(),
                first.m(),
                first.n()
            )));
        }
    }
    Ok(CostTable::from_fn(first.m(), first.n(), |i, j| {
        tables
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w != S::zero())
            .fold(S::zero(), |acc, (t, w)| acc + *w * t.get(i, j))
    }))
}
