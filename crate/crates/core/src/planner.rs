//! Grid A* over an inflated costmap, goal placement beyond the end line and
//! desired-heading extraction.
//!
//! Step costs are kept in integer fixed point (millionths of a cell), so
//! path costs compare exactly between search strategies.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::RectBoundary;
use crate::geometry::{Pose2, Vec2};
use crate::mapping::Costmap;

/// Fixed-point units per cell of travel.
pub const COST_SCALE: f64 = 1_000_000.0;

/// Offset of the goal beyond the centre of the back edge, metres.
pub const GOAL_OFFSET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    /// Cells at or above this value are impassable.
    pub lethal_threshold: u8,
    pub heuristic_weight: f64,
    /// Multiplier applied to the normalized cell cost.
    pub cost_gain: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            lethal_threshold: 254,
            heuristic_weight: 1.0,
            cost_gain: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Start,
    Goal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("{0:?} lies outside the costmap")]
    OutOfBounds(Endpoint),
    #[error("start cell is lethal")]
    LethalStart,
    #[error("goal cell is lethal")]
    LethalGoal,
    #[error("goal unreachable")]
    NoPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Vec2>,
    pub cells: Vec<(usize, usize)>,
    /// Total cost in fixed-point units (see [`COST_SCALE`]).
    pub cost_units: u64,
    /// Total cost in metres-equivalent: `cost_units / COST_SCALE · resolution`.
    pub cost: f64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y\n");
        for p in &self.waypoints {
            let _ = writeln!(s, "{},{}", p.x, p.y);
        }
        s
    }
}

/// Cost of one step into a cell holding `cell_value`.
pub fn step_cost_units(diagonal: bool, cell_value: u8, cost_gain: f64) -> u64 {
    let length = if diagonal { SQRT_2 } else { 1.0 };
    (length * (1.0 + f64::from(cell_value) / 255.0 * cost_gain) * COST_SCALE).round() as u64
}

fn heuristic_units(a: (usize, usize), b: (usize, usize), weight: f64) -> u64 {
    let dx = a.0 as f64 - b.0 as f64;
    let dy = a.1 as f64 - b.1 as f64;
    (dx.hypot(dy) * COST_SCALE * weight).floor() as u64
}

const NEIGHBOURS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

/// 8-connected moves from `cell`. Diagonal moves may not cut the corner of
/// a lethal cell.
pub fn successors(
    costmap: &Costmap,
    cell: (usize, usize),
    lethal: u8,
) -> impl Iterator<Item = ((usize, usize), bool)> + '_ {
    let (w, h) = (costmap.width() as i64, costmap.height() as i64);
    let passable =
        move |c: i64, r: i64| c >= 0 && r >= 0 && c < w && r < h && costmap.get(c as usize, r as usize) < lethal;
    NEIGHBOURS.iter().filter_map(move |&(dc, dr)| {
        let (c, r) = (cell.0 as i64 + dc, cell.1 as i64 + dr);
        if !passable(c, r) {
            return None;
        }
        let diagonal = dc != 0 && dr != 0;
        if diagonal && (!passable(cell.0 as i64 + dc, cell.1 as i64) || !passable(cell.0 as i64, cell.1 as i64 + dr)) {
            return None;
        }
        Some(((c as usize, r as usize), diagonal))
    })
}

/// A* between grid cells. Frontier ties resolve by `(f, h, cell index)`.
pub fn plan_cells(
    costmap: &Costmap,
    start: (usize, usize),
    goal: (usize, usize),
    params: &PlannerParams,
) -> Result<Path, PlanError> {
    let in_bounds = |c: (usize, usize)| c.0 < costmap.width() && c.1 < costmap.height();
    if !in_bounds(start) {
        return Err(PlanError::OutOfBounds(Endpoint::Start));
    }
    if !in_bounds(goal) {
        return Err(PlanError::OutOfBounds(Endpoint::Goal));
    }
    if costmap.get(start.0, start.1) >= params.lethal_threshold {
        return Err(PlanError::LethalStart);
    }
    if costmap.get(goal.0, goal.1) >= params.lethal_threshold {
        return Err(PlanError::LethalGoal);
    }

    let n = costmap.len();
    let mut g = vec![u64::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let start_idx = costmap.index(start.0, start.1);
    let goal_idx = costmap.index(goal.0, goal.1);
    let mut open = BinaryHeap::new();
    g[start_idx] = 0;
    let h0 = heuristic_units(start, goal, params.heuristic_weight);
    open.push(Reverse((h0, h0, start_idx)));

    while let Some(Reverse((_, _, idx))) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == goal_idx {
            break;
        }
        let cell = costmap.coords(idx);
        for (next, diagonal) in successors(costmap, cell, params.lethal_threshold) {
            let nidx = costmap.index(next.0, next.1);
            let tentative = g[idx] + step_cost_units(diagonal, costmap.get(next.0, next.1), params.cost_gain);
            if tentative < g[nidx] {
                g[nidx] = tentative;
                parent[nidx] = idx;
                // Inadmissible weights may need to revisit closed cells.
                closed[nidx] = false;
                let h = heuristic_units(next, goal, params.heuristic_weight);
                open.push(Reverse((tentative + h, h, nidx)));
            }
        }
    }

    if g[goal_idx] == u64::MAX {
        return Err(PlanError::NoPath);
    }
    let mut cells = vec![goal];
    let mut cur = goal_idx;
    while cur != start_idx {
        cur = parent[cur];
        cells.push(costmap.coords(cur));
    }
    cells.reverse();
    let waypoints = cells.iter().map(|&(c, r)| costmap.cell_center(c, r)).collect();
    let cost_units = g[goal_idx];
    Ok(Path {
        waypoints,
        cells,
        cost_units,
        cost: cost_units as f64 / COST_SCALE * costmap.resolution(),
    })
}

/// A* between world points.
pub fn plan(costmap: &Costmap, start: Vec2, goal: Vec2, params: &PlannerParams) -> Result<Path, PlanError> {
    let s = costmap
        .world_to_cell(start)
        .ok_or(PlanError::OutOfBounds(Endpoint::Start))?;
    let g = costmap
        .world_to_cell(goal)
        .ok_or(PlanError::OutOfBounds(Endpoint::Goal))?;
    plan_cells(costmap, s, g, params)
}

/// Nearest cell to `from` (by centre distance) that is below the lethal
/// threshold, searched within `max_radius` metres.
pub fn nearest_free_cell(costmap: &Costmap, from: Vec2, lethal: u8, max_radius: f64) -> Option<(usize, usize)> {
    let (c0, r0) = costmap.world_to_cell(from)?;
    let reach = (max_radius / costmap.resolution()).ceil() as i64;
    let mut best: Option<(f64, usize, (usize, usize))> = None;
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            let (c, r) = (c0 as i64 + dc, r0 as i64 + dr);
            if c < 0 || r < 0 || c >= costmap.width() as i64 || r >= costmap.height() as i64 {
                continue;
            }
            let cell = (c as usize, r as usize);
            if costmap.get(cell.0, cell.1) >= lethal {
                continue;
            }
            let d = costmap.cell_center(cell.0, cell.1).distance(from);
            if d > max_radius {
                continue;
            }
            let idx = costmap.index(cell.0, cell.1);
            if best.is_none_or(|(bd, bi, _)| d < bd || (d == bd && idx < bi)) {
                best = Some((d, idx, cell));
            }
        }
    }
    best.map(|(_, _, cell)| cell)
}

/// Midpoint of the back edge pushed [`GOAL_OFFSET`] along its outward normal.
pub fn compute_goal(rect: &RectBoundary) -> Vec2 {
    rect.back_mid() + rect.forward() * GOAL_OFFSET
}

/// Heading from `pose` towards the first waypoint at least `lookahead`
/// metres of arc beyond the path point closest to the pose (the final
/// waypoint when the path is shorter).
pub fn desired_heading(path: &Path, pose: &Pose2, lookahead: f64) -> f64 {
    let pts = &path.waypoints;
    if pts.is_empty() {
        return pose.heading;
    }
    let here = pose.position;
    let closest = pts
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |best, (i, p)| {
            let d = p.distance(here);
            if d < best.1 {
                (i, d)
            } else {
                best
            }
        })
        .0;
    let mut travelled = 0.0;
    let mut target = pts.len() - 1;
    for i in closest + 1..pts.len() {
        travelled += pts[i].distance(pts[i - 1]);
        if travelled >= lookahead {
            target = i;
            break;
        }
    }
    let delta = pts[target] - here;
    if delta.norm() > 1e-9 {
        return delta.angle();
    }
    if pts.len() >= 2 {
        (pts[pts.len() - 1] - pts[pts.len() - 2]).angle()
    } else {
        pose.heading
    }
}
