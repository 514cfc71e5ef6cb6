#![allow(dead_code)]

//! Reference implementations and instance generators shared by the
//! integration tests. Nothing here calls into the code under test except to
//! build inputs.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sightsim::boundary::{RectBoundary, RectDims};
use sightsim::colour::ShirtClass;
use sightsim::geometry::{Pose2, Vec2};
use sightsim::mapping::{Costmap, OccupancyGrid};
use sightsim::seeding;
use sightsim::world::{Payload, Scene, TaskKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    seeding::rng(seed, 0x7E57)
}

/// Random costmap: scattered lethal blocks over a field of soft costs.
pub fn random_costmap(seed: u64, w: usize, h: usize) -> Costmap {
    let mut r = rng(seed);
    let mut cm = OccupancyGrid::new(Vec2::ZERO, 0.1, w, h).unwrap();
    for row in 0..h {
        for col in 0..w {
            let v = match r.random_range(0..10) {
                0..=4 => 0,
                5..=7 => r.random_range(1..254u8),
                _ => 0,
            };
            cm.set(col, row, v);
        }
    }
    let blocks = r.random_range(5..40);
    for _ in 0..blocks {
        let (c0, r0) = (r.random_range(0..w), r.random_range(0..h));
        let (bw, bh) = (r.random_range(1..8), r.random_range(1..8));
        let v = if r.random_bool(0.8) { 255 } else { 254 };
        for row in r0..(r0 + bh).min(h) {
            for col in c0..(c0 + bw).min(w) {
                cm.set(col, row, v);
            }
        }
    }
    cm
}

pub fn step_cost(diagonal: bool, value: u8, gain: f64) -> u64 {
    let len = if diagonal { SQRT_2 } else { 1.0 };
    (len * (1.0 + f64::from(value) / 255.0 * gain) * 1e6).round() as u64
}

/// Plain Dijkstra over the 8-connected grid with the no-corner-cutting rule.
pub fn dijkstra(cm: &Costmap, start: (usize, usize), goal: (usize, usize), lethal: u8, gain: f64) -> Option<u64> {
    let (w, h) = (cm.width() as i64, cm.height() as i64);
    let ok = |c: i64, r: i64| c >= 0 && r >= 0 && c < w && r < h && cm.get(c as usize, r as usize) < lethal;
    if !ok(start.0 as i64, start.1 as i64) || !ok(goal.0 as i64, goal.1 as i64) {
        return None;
    }
    let mut dist = vec![u64::MAX; (w * h) as usize];
    let id = |c: i64, r: i64| (r * w + c) as usize;
    let mut heap = BinaryHeap::new();
    dist[id(start.0 as i64, start.1 as i64)] = 0;
    heap.push(Reverse((0u64, start.0 as i64, start.1 as i64)));
    while let Some(Reverse((d, c, r))) = heap.pop() {
        if d > dist[id(c, r)] {
            continue;
        }
        if (c as usize, r as usize) == goal {
            return Some(d);
        }
        for dc in -1..=1i64 {
            for dr in -1..=1i64 {
                if (dc, dr) == (0, 0) || !ok(c + dc, r + dr) {
                    continue;
                }
                let diagonal = dc != 0 && dr != 0;
                if diagonal && !(ok(c + dc, r) && ok(c, r + dr)) {
                    continue;
                }
                let nd = d + step_cost(diagonal, cm.get((c + dc) as usize, (r + dr) as usize), gain);
                if nd < dist[id(c + dc, r + dr)] {
                    dist[id(c + dc, r + dr)] = nd;
                    heap.push(Reverse((nd, c + dc, r + dr)));
                }
            }
        }
    }
    None
}

/// Full (m+1)×(n+1) edit-distance table.
pub fn levenshtein_table(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in t[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = t[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            t[i][j] = sub.min(t[i - 1][j] + 1).min(t[i][j - 1] + 1);
        }
    }
    t[a.len()][b.len()]
}

/// Components of the sorted values split at gaps wider than `eps`,
/// numbered by first appearance in input order.
pub fn gap_components(values: &[f64], eps: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut comp = vec![0usize; values.len()];
    let mut c = 0;
    for k in 0..order.len() {
        if k > 0 && values[order[k]] - values[order[k - 1]] > eps {
            c += 1;
        }
        comp[order[k]] = c;
    }
    let mut renumber = vec![usize::MAX; c + 1];
    let mut next = 0;
    comp.iter()
        .map(|&x| {
            if renumber[x] == usize::MAX {
                renumber[x] = next;
                next += 1;
            }
            renumber[x]
        })
        .collect()
}

/// Tries every slot; returns the unique one keeping the rack sorted and the
/// hangers shifted from the nearer end.
pub fn slot_oracle(rack: &[ShirtClass], new: ShirtClass) -> (usize, usize) {
    let valid: Vec<usize> = (0..=rack.len())
        .filter(|&s| {
            let mut v = rack.to_vec();
            v.insert(s, new);
            v.windows(2).all(|w| w[0] < w[1])
        })
        .collect();
    assert_eq!(valid.len(), 1, "rack {rack:?} new {new:?}");
    let s = valid[0];
    (s, s.min(rack.len() - s))
}

/// All permutations of `items`, lexicographic by index.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

/// Bare scene with a randomly placed rectangle of one of the task sizes.
pub fn boundary_scene(seed: u64) -> Scene {
    let mut r = rng(seed);
    let dims = [
        RectDims::new(10.0, 4.0),
        RectDims::new(10.0, 2.5),
        RectDims::new(6.0, 1.0),
        RectDims::new(4.0, 3.0),
    ][r.random_range(0..4)];
    let pose = Pose2::new(
        r.random_range(-5.0..5.0),
        r.random_range(-5.0..5.0),
        r.random_range(-PI..PI),
    );
    Scene {
        task_kind: TaskKind::Forest,
        boundary_dims: dims,
        boundary_pose: pose,
        obstacles: Vec::new(),
        payload: Payload::None,
        seed,
    }
}

pub fn corner_rms(a: &RectBoundary, b: &RectBoundary) -> f64 {
    let s: f64 = a
        .corners
        .iter()
        .zip(&b.corners)
        .map(|(p, q)| p.distance(*q).powi(2))
        .sum();
    (s / 4.0).sqrt()
}

/// Exhaustive pose search around `start` at 0.01 m / 0.5° steps, scoring
/// each candidate by truncated squared distance of `points` to the outline.
pub fn grid_search_rect(points: &[Vec2], start: &RectBoundary, span: f64, span_deg: f64, tol: f64) -> RectBoundary {
    let score = |r: &RectBoundary| -> f64 { points.iter().map(|p| r.distance_to_outline(*p).min(tol).powi(2)).sum() };
    let steps = (span / 0.01).round() as i64;
    let asteps = (span_deg / 0.5).round() as i64;
    let mut best = (f64::INFINITY, *start);
    for da in -asteps..=asteps {
        let yaw = start.yaw() + (da as f64 * 0.5).to_radians();
        for dx in -steps..=steps {
            for dy in -steps..=steps {
                let c = start.center() + Vec2::new(dx as f64 * 0.01, dy as f64 * 0.01);
                let r = RectBoundary::from_pose(c, yaw, start.dims);
                let s = score(&r);
                if s < best.0 {
                    best = (s, r);
                }
            }
        }
    }
    best.1
}

/// Row-major 2×3 layout with 0 to 4 taken seats.
pub fn seat_layout(seed: u64) -> Vec<sightsim::world::SeatOccupant> {
    use sightsim::world::SeatOccupant;
    let mut r = rng(seed);
    let mut seats = vec![SeatOccupant::Free; 6];
    let taken = r.random_range(0..=4);
    for i in rand::seq::index::sample(&mut r, 6, taken) {
        seats[i] = if r.random_bool(0.5) {
            SeatOccupant::Person
        } else {
            SeatOccupant::Backpack
        };
    }
    seats
}

/// Seat rectangle somewhere in the room.
pub fn seat_rect(seed: u64) -> RectBoundary {
    let mut r = rng(seed ^ 0x5EA7);
    RectBoundary::from_pose(
        Vec2::new(r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)),
        r.random_range(-PI..PI),
        RectDims::new(4.0, 3.0),
    )
}

/// Pilot at the origin facing +y with a wall ahead that is open on the
/// pilot's left. Returns the heading difference the planner asks for.
pub fn blocked_ahead_open_left() -> f64 {
    use sightsim::mapping::OCCUPIED;
    use sightsim::planner::{desired_heading, plan, PlannerParams};
    let mut grid = OccupancyGrid::covering(Vec2::new(-3.0, -1.0), Vec2::new(3.0, 8.0), 0.05).unwrap();
    for i in 0..=70 {
        grid.integrate_points(&[Vec2::new(-0.5 + 0.05 * f64::from(i), 2.0)]);
    }
    assert_eq!(grid.value_at(Vec2::new(0.0, 2.0)), OCCUPIED);
    let cm = grid.inflate(0.3, 0.5);
    let pose = Pose2::new(0.0, 0.0, PI / 2.0);
    let path = plan(&cm, pose.position, Vec2::new(0.0, 5.0), &PlannerParams::default()).unwrap();
    sightsim::geometry::wrap_angle(desired_heading(&path, &pose, 1.0) - pose.heading)
}
