mod common;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use auction_sensitivity::{
    euclidean_costs, obstacle_costs, validate_metric, Error, Obstacle, DEFAULT_TOL,
};
use proptest::prelude::*;

const GRID: i64 = 40;
const STEP: f64 = 0.25;
const REACH: i64 = 6;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Moves to lattice neighbours in every primitive direction up to `REACH`,
/// so the lattice metric is within half a percent of the Euclidean one.
fn moves() -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for dx in -REACH..=REACH {
        for dy in -REACH..=REACH {
            if (dx, dy) != (0, 0) && gcd(dx, dy) == 1 {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Rectangle given in lattice units; a move is blocked if any of its
/// sample points lies strictly inside.
fn blocked(rect: [i64; 4], a: (i64, i64), b: (i64, i64)) -> bool {
    let samples = 64;
    (1..samples).any(|s| {
        let t = s as f64 / samples as f64;
        let x = a.0 as f64 + t * (b.0 - a.0) as f64;
        let y = a.1 as f64 + t * (b.1 - a.1) as f64;
        let [x0, y0, x1, y1] = rect.map(|v| v as f64);
        x0 < x && x < x1 && y0 < y && y < y1
    })
}

/// Dijkstra over the lattice from `src` to `dst`, in world units.
fn lattice_distance(rect: [i64; 4], src: (i64, i64), dst: (i64, i64)) -> f64 {
    let side = (GRID + 1) as usize;
    let id = |p: (i64, i64)| p.0 as usize * side + p.1 as usize;
    let mut dist = vec![f64::INFINITY; side * side];
    let mut heap = BinaryHeap::new();
    dist[id(src)] = 0.0;
    heap.push((Reverse(0u64), src));
    let steps = moves();
    while let Some((Reverse(bits), p)) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[id(p)] {
            continue;
        }
        if p == dst {
            return d * STEP;
        }
        for &(dx, dy) in &steps {
            let q = (p.0 + dx, p.1 + dy);
            if q.0 < 0 || q.1 < 0 || q.0 > GRID || q.1 > GRID || blocked(rect, p, q) {
                continue;
            }
            let nd = d + ((dx * dx + dy * dy) as f64).sqrt();
            if nd < dist[id(q)] {
                dist[id(q)] = nd;
                heap.push((Reverse(nd.to_bits()), q));
            }
        }
    }
    f64::INFINITY
}

fn world(p: (i64, i64)) -> Vec<f64> {
    vec![p.0 as f64 * STEP, p.1 as f64 * STEP]
}

fn scene() -> impl Strategy<Value = ([i64; 4], (i64, i64), (i64, i64))> {
    (4i64..30, 4i64..30, 3i64..10, 3i64..10, any::<[u8; 4]>()).prop_filter_map(
        "endpoints must lie outside the rectangle",
        |(x0, y0, w, h, raw)| {
            let rect = [x0, y0, (x0 + w).min(GRID), (y0 + h).min(GRID)];
            let p = (i64::from(raw[0]) % (GRID + 1), i64::from(raw[1]) % (GRID + 1));
            let q = (i64::from(raw[2]) % (GRID + 1), i64::from(raw[3]) % (GRID + 1));
            let inside = |a: (i64, i64)| rect[0] < a.0 && a.0 < rect[2] && rect[1] < a.1 && a.1 < rect[3];
            (p != q && !inside(p) && !inside(q)).then_some((rect, p, q))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn visibility_graph_matches_lattice_oracle((rect, p, q) in scene()) {
        let ob = Obstacle::new(
            rect[0] as f64 * STEP,
            rect[1] as f64 * STEP,
            rect[2] as f64 * STEP,
            rect[3] as f64 * STEP,
        )
        .unwrap();
        let c = obstacle_costs(1, 1, &[world(p), world(q)], &[ob]).unwrap();
        let oracle = lattice_distance(rect, p, q);
        prop_assert!((c.get(0, 1) - oracle).abs() <= 0.01 * oracle, "{} vs {}", c.get(0, 1), oracle);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn obstacle_costs_form_a_metric_above_straight_lines(
        pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 2..8),
        rects in prop::collection::vec((0.0f64..9.0, 0.0f64..9.0, 0.2f64..3.0, 0.2f64..3.0), 0..3),
    ) {
        let obstacles: Vec<Obstacle<f64>> = rects
            .iter()
            .map(|&(x, y, w, h)| Obstacle::new(x, y, x + w, y + h).unwrap())
            .collect();
        let positions: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
        prop_assume!(positions
            .iter()
            .all(|p| obstacles.iter().all(|o| !o.contains_strictly([p[0], p[1]]))));
        let m = 1;
        let n = positions.len() - 1;
        let with = obstacle_costs(m, n, &positions, &obstacles).unwrap();
        let plain = euclidean_costs(m, n, &positions).unwrap();
        let connected = (0..with.len()).all(|i| (0..with.len()).all(|j| with.get(i, j).is_finite()));
        if connected {
            let report = validate_metric(&with, DEFAULT_TOL);
            prop_assert!(report.holds_m1 && report.holds_m2_prime && report.holds_m3 && report.holds_m4);
        }
        for i in 0..with.len() {
            for j in 0..with.len() {
                prop_assert!(with.get(i, j) >= plain.get(i, j) - 1e-12);
            }
        }
        if obstacles.is_empty() {
            prop_assert_eq!(with, plain);
        }
    }
}

#[test]
fn rectangle_off_every_segment_changes_nothing() {
    let positions = vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 3.0]];
    let ob = Obstacle::new(10.0, 10.0, 12.0, 11.0).unwrap();
    let with = obstacle_costs(1, 2, &positions, &[ob]).unwrap();
    let plain = euclidean_costs(1, 2, &positions).unwrap();
    assert_eq!(with, plain);
}

#[test]
fn enclosed_entity_is_disconnected() {
    // A point boxed in by four touching walls cannot be reached.
    let walls = [
        Obstacle::new(0.0, 0.0, 4.0, 1.0).unwrap(),
        Obstacle::new(0.0, 3.0, 4.0, 4.0).unwrap(),
        Obstacle::new(0.0, 0.0, 1.0, 4.0).unwrap(),
        Obstacle::new(3.0, 0.0, 4.0, 4.0).unwrap(),
    ];
    let positions = vec![vec![2.0, 2.0], vec![6.0, 6.0]];
    let c = obstacle_costs::<f64>(1, 1, &positions, &walls).unwrap();
    assert!(c.get(0, 1).is_infinite());
}

#[test]
fn position_inside_is_rejected() {
    let ob = Obstacle::new(0.0, 0.0, 1.0, 1.0).unwrap();
    let err = obstacle_costs(1, 1, &[vec![5.0, 5.0], vec![0.5, 0.5]], &[ob]);
    assert!(matches!(err, Err(Error::InsideObstacle { index: 1, .. })));
}
