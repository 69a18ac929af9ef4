//! Cost tables from entity positions: straight-line distance, and shortest
//! paths around axis-aligned rectangular obstacles.

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CostTable;
use crate::scalar::Scalar;

/// Slack applied when testing whether a segment enters an obstacle, so that
/// paths grazing an edge or corner are not blocked by rounding.
pub const GRAZE_TOL: f64 = 1e-12;

/// Axis-aligned rectangle with an open interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle<S = f64> {
    pub min_corner: [S; 2],
    pub max_corner: [S; 2],
}

impl<S: Scalar> Obstacle<S> {
    pub fn new(xmin: S, ymin: S, xmax: S, ymax: S) -> Result<Self> {
        let ob = Self {
            min_corner: [xmin, ymin],
            max_corner: [xmax, ymax],
        };
        ob.validate(0)?;
        Ok(ob)
    }

    fn validate(&self, index: usize) -> Result<()> {
        let finite = self.min_corner.iter().chain(&self.max_corner).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidObstacle {
                index,
                reason: "corners must be finite".into(),
            });
        }
        if !(self.min_corner[0] < self.max_corner[0] && self.min_corner[1] < self.max_corner[1]) {
            return Err(Error::InvalidObstacle {
                index,
                reason: "min corner must lie strictly below and left of max corner".into(),
            });
        }
        Ok(())
    }

    /// Point in the open interior.
    pub fn contains_strictly(&self, p: [S; 2]) -> bool {
        (0..2).all(|d| self.min_corner[d] < p[d] && p[d] < self.max_corner[d])
    }

    pub fn corners(&self) -> [[S; 2]; 4] {
        let ([x0, y0], [x1, y1]) = (self.min_corner, self.max_corner);
        [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
    }

    /// Whether the segment `p -> q` passes through the open interior.
    ///
    /// Clips the segment's parameter range against the interior shrunk by
    /// [`GRAZE_TOL`]; the segment is blocked when a non-degenerate piece
    /// survives.
    pub fn blocks(&self, p: [S; 2], q: [S; 2]) -> bool {
        let tol = S::of(GRAZE_TOL);
        let (mut t0, mut t1) = (S::zero(), S::one());
        for d in 0..2 {
            let lo = self.min_corner[d] + tol;
            let hi = self.max_corner[d] - tol;
            let dir = q[d] - p[d];
            if dir == S::zero() {
                if !(lo < p[d] && p[d] < hi) {
                    return false;
                }
                continue;
            }
            let (mut a, mut b) = ((lo - p[d]) / dir, (hi - p[d]) / dir);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 >= t1 {
                return false;
            }
        }
        t1 - t0 > tol
    }
}

fn distance<S: Scalar>(p: &[S], q: &[S]) -> S {
    p.iter()
        .zip(q)
        .fold(S::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b))
        .sqrt()
}

/// Pairwise Euclidean distances between `m + n` points of equal dimension.
pub fn euclidean_costs<S: Scalar>(m: usize, n: usize, positions: &[Vec<S>]) -> Result<CostTable<S>> {
    if positions.len() != m + n {
        return Err(Error::DimensionMismatch(format!(
            "{} positions for {} entities",
            positions.len(),
            m + n
        )));
    }
    if let Some(first) = positions.first() {
        if let Some(i) = positions.iter().position(|p| p.len() != first.len()) {
            return Err(Error::DimensionMismatch(format!(
                "position {i} has dimension {}, expected {}",
                positions[i].len(),
                first.len()
            )));
        }
    }
    Ok(CostTable::from_fn(m, n, |i, j| {
        if i == j {
            S::zero()
        } else {
            distance(&positions[i], &positions[j])
        }
    }))
}

/// All-pairs shortest collision-free path lengths in the plane.
///
/// The visibility graph has a node for every entity and every obstacle
/// corner that is not inside another obstacle; two nodes are joined when the
/// segment between them avoids every open interior. Entities that cannot
/// reach each other get an infinite cost.
pub fn obstacle_costs<S: Scalar>(
    m: usize,
    n: usize,
    positions: &[Vec<S>],
    obstacles: &[Obstacle<S>],
) -> Result<CostTable<S>> {
    if positions.len() != m + n {
        return Err(Error::DimensionMismatch(format!(
            "{} positions for {} entities",
            positions.len(),
            m + n
        )));
    }
    let mut points: Vec<[S; 2]> = Vec::with_capacity(positions.len() + 4 * obstacles.len());
    for (i, p) in positions.iter().enumerate() {
        match p.as_slice() {
            &[x, y] => points.push([x, y]),
            _ => {
                return Err(Error::DimensionMismatch(format!(
                    "obstacle avoidance needs 2-D positions, entity {i} has {}",
                    p.len()
                )))
            }
        }
    }
    for (k, ob) in obstacles.iter().enumerate() {
        ob.validate(k)?;
    }
    for (i, p) in points.iter().enumerate() {
        if let Some(k) = obstacles.iter().position(|ob| ob.contains_strictly(*p)) {
            return Err(Error::InsideObstacle { index: i, obstacle: k });
        }
    }
    let entities = points.len();
    for ob in obstacles {
        for corner in ob.corners() {
            if !obstacles.iter().any(|o| o.contains_strictly(corner)) {
                points.push(corner);
            }
        }
    }

    let mut graph = UnGraph::<(), S>::with_capacity(points.len(), points.len() * points.len() / 2);
    let nodes: Vec<NodeIndex> = points.iter().map(|_| graph.add_node(())).collect();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let (p, q) = (points[a], points[b]);
            if !obstacles.iter().any(|ob| ob.blocks(p, q)) {
                graph.add_edge(nodes[a], nodes[b], distance(&p, &q));
            }
        }
    }

    let mut table = CostTable::from_fn(m, n, |i, j| if i == j { S::zero() } else { S::infinity() });
    let mut disconnected = 0usize;
    for a in 0..entities {
        let reach = dijkstra(&graph, nodes[a], None, |e| *e.weight());
        for b in a + 1..entities {
            match reach.get(&nodes[b]) {
                Some(&d) => table.set_pair(a, b, d),
                None => disconnected += 1,
            }
        }
    }
    if disconnected > 0 {
        log::warn!("{disconnected} entity pairs are separated by obstacles; their cost is infinite");
    }
    Ok(table)
}
