//! Synthetic scenes, simulated sensors and the behavioural pilot model.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belt::{BeltCue, CENTER_BACK};
use crate::boundary::{Edge, RectBoundary, RectDims};
use crate::geometry::{point_segment_distance, wrap_angle, Pose2, Vec2};
use crate::mapping::{Costmap, OccupancyGrid, OCCUPIED};
use crate::planner::{self, PlannerParams};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    Sidewalk,
    Footpath,
    Forest,
    Doorbell,
    Seats,
    Grocery,
    Colours,
    Finder,
    Touchscreen,
}

impl TaskKind {
    pub const ALL: [TaskKind; 9] = [
        TaskKind::Sidewalk,
        TaskKind::Footpath,
        TaskKind::Forest,
        TaskKind::Doorbell,
        TaskKind::Seats,
        TaskKind::Grocery,
        TaskKind::Colours,
        TaskKind::Finder,
        TaskKind::Touchscreen,
    ];

    pub fn is_navigation(self) -> bool {
        matches!(self, TaskKind::Sidewalk | TaskKind::Footpath | TaskKind::Forest)
    }

    pub fn default_dims(self) -> RectDims {
        match self {
            TaskKind::Sidewalk => RectDims::new(10.0, 2.5),
            TaskKind::Footpath => RectDims::new(6.0, 1.0),
            TaskKind::Forest => RectDims::new(10.0, 4.0),
            TaskKind::Seats => RectDims::new(4.0, 3.0),
            _ => RectDims::new(2.0, 2.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Sidewalk => "Sidewalk",
            TaskKind::Footpath => "Footpath",
            TaskKind::Forest => "Forest",
            TaskKind::Doorbell => "Doorbell",
            TaskKind::Seats => "Seats",
            TaskKind::Grocery => "Grocery",
            TaskKind::Colours => "Colours",
            TaskKind::Finder => "Finder",
            TaskKind::Touchscreen => "Touchscreen",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown task {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstacle {
    Disc { center: Vec2, radius: f64 },
    Segment { a: Vec2, b: Vec2 },
}

impl Obstacle {
    /// Distance from `p` to the obstacle surface (0 inside).
    pub fn distance(&self, p: Vec2) -> f64 {
        match *self {
            Obstacle::Disc { center, radius } => (p.distance(center) - radius).max(0.0),
            Obstacle::Segment { a, b } => point_segment_distance(p, a, b),
        }
    }

    /// Distance between the two obstacle surfaces.
    pub fn gap(&self, other: &Obstacle) -> f64 {
        match (*self, *other) {
            (Obstacle::Disc { center: c1, radius: r1 }, Obstacle::Disc { center: c2, radius: r2 }) => {
                (c1.distance(c2) - r1 - r2).max(0.0)
            }
            (Obstacle::Disc { center, radius }, seg @ Obstacle::Segment { .. })
            | (seg @ Obstacle::Segment { .. }, Obstacle::Disc { center, radius }) => {
                (seg.distance(center) - radius).max(0.0)
            }
            (Obstacle::Segment { a, b }, Obstacle::Segment { a: c, b: d }) => {
                if segments_intersect(a, b, c, d) {
                    0.0
                } else {
                    point_segment_distance(a, c, d)
                        .min(point_segment_distance(b, c, d))
                        .min(point_segment_distance(c, a, b))
                        .min(point_segment_distance(d, a, b))
                }
            }
        }
    }

    /// Range along the ray `origin + t·dir` (unit `dir`) to the first hit.
    pub fn ray_hit(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        match *self {
            Obstacle::Disc { center, radius } => {
                let oc = origin - center;
                let b = oc.dot(dir);
                let c = oc.norm_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let t = -b - sq;
                if t > 0.0 {
                    Some(t)
                } else if -b + sq > 0.0 {
                    // Origin inside the disc.
                    Some(0.0)
                } else {
                    None
                }
            }
            Obstacle::Segment { a, b } => {
                let e = b - a;
                let denom = dir.cross(e);
                if denom.abs() < 1e-15 {
                    return None;
                }
                let ao = a - origin;
                let t = ao.cross(e) / denom;
                let s = ao.cross(dir) / denom;
                (t > 0.0 && (0.0..=1.0).contains(&s)).then_some(t)
            }
        }
    }

    fn points(&self) -> Vec<Vec2> {
        match *self {
            Obstacle::Disc { center, radius } => vec![center + Vec2::new(radius, 0.0), center - Vec2::new(radius, 0.0)],
            Obstacle::Segment { a, b } => vec![a, b],
        }
    }
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = (b - a).cross(c - a);
    let d2 = (b - a).cross(d - a);
    let d3 = (d - c).cross(a - c);
    let d4 = (d - c).cross(b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorbellPayload {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, top row first.
    pub names: Vec<String>,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeatOccupant {
    Free,
    Person,
    Backpack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatsPayload {
    /// Row-major 2×3; row 1 nearest the front edge, col 1 on the pilot's left.
    pub seats: Vec<SeatOccupant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroceryPayload {
    pub rows: usize,
    pub cols: usize,
    /// Row-major product names on the shelf.
    pub shelf: Vec<String>,
    pub dictionaries: Vec<(String, Vec<String>)>,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoursPayload {
    /// Base hues in degrees; the first sorts before the second.
    pub base_hues: [f64; 2],
    /// Arrival order as (base index, brightness level 1..=3).
    pub arrival: Vec<(u8, u8)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinderPayload {
    /// Object label and horizontal image position in [0, 1].
    pub objects: Vec<(String, f64)>,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouchscreenPayload {
    pub rows: usize,
    pub cols: usize,
    /// Screen size in millimetres.
    pub screen: (f64, f64),
    /// 1-based (row, col) of the target item.
    pub target: (usize, usize),
    /// Initial fingertip position in screen millimetres (y down).
    pub finger_start: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    None,
    Doorbell(DoorbellPayload),
    Seats(SeatsPayload),
    Grocery(GroceryPayload),
    Colours(ColoursPayload),
    Finder(FinderPayload),
    Touchscreen(TouchscreenPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub task_kind: TaskKind,
    pub boundary_dims: RectDims,
    /// Centre and yaw (direction of travel) of the task rectangle.
    pub boundary_pose: Pose2,
    pub obstacles: Vec<Obstacle>,
    pub payload: Payload,
    pub seed: u64,
}

impl Scene {
    pub fn boundary(&self) -> RectBoundary {
        RectBoundary::from_pose(
            self.boundary_pose.position,
            self.boundary_pose.heading,
            self.boundary_dims,
        )
    }

    /// Pilot start pose: just before the front edge, facing along the task.
    pub fn start_pose(&self) -> Pose2 {
        let rect = self.boundary();
        let p = rect.front_mid() - rect.forward() * START_SETBACK;
        Pose2 {
            position: p,
            heading: rect.yaw(),
        }
    }

    /// Grid spanning the rectangle's bounding box plus `margin`.
    pub fn empty_grid(&self, resolution: f64, margin: f64) -> OccupancyGrid {
        let c = self.boundary().corners;
        let min = Vec2::new(
            c.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - margin,
            c.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - margin,
        );
        let max = Vec2::new(
            c.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + margin,
            c.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + margin,
        );
        OccupancyGrid::covering(min, max, resolution).expect("scene extent is finite")
    }

    /// Ground-truth occupancy: every cell whose centre lies within half a
    /// cell of an obstacle surface.
    pub fn truth_grid(&self, resolution: f64, margin: f64) -> OccupancyGrid {
        let mut grid = self.empty_grid(resolution, margin);
        for r in 0..grid.height() {
            for c in 0..grid.width() {
                let p = grid.cell_center(c, r);
                if self.obstacles.iter().any(|o| o.distance(p) <= resolution / 2.0) {
                    grid.set(c, r, OCCUPIED);
                }
            }
        }
        grid
    }

    /// Minimum distance from `p` to any obstacle surface.
    pub fn clearance(&self, p: Vec2) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// How far before the front edge the pilot starts.
pub const START_SETBACK: f64 = 0.5;

/// Marks every cell whose centre lies laterally outside the rectangle
/// (beyond the side edges) as occupied. Cells beyond the front and back
/// edges are left alone so the start and goal stay reachable.
pub fn add_lateral_walls(grid: &mut Costmap, rect: &RectBoundary) {
    let half = rect.dims.width / 2.0;
    for r in 0..grid.height() {
        for c in 0..grid.width() {
            if rect.to_local(grid.cell_center(c, r)).y.abs() > half {
                grid.set(c, r, OCCUPIED);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DifficultyParams {
    /// Defaults per task: Forest 10, Sidewalk 4, Footpath 0.
    pub obstacle_count: Option<usize>,
    pub pilot_diameter: f64,
    /// Inflation radius used by the planner; obstacle spacing leaves a
    /// corridor of `pilot_diameter` between inflated obstacles.
    pub inflation_radius: f64,
    pub pole_radius: f64,
    /// Uniform yaw perturbation of the rectangle, degrees.
    pub yaw_jitter_deg: f64,
    /// Obstacle-free distance behind the front edge.
    pub start_clear: f64,
    pub length: Option<f64>,
    pub width: Option<f64>,
}

impl Default for DifficultyParams {
    fn default() -> Self {
        Self {
            obstacle_count: None,
            pilot_diameter: 0.5,
            inflation_radius: 0.3,
            pole_radius: 0.04,
            yaw_jitter_deg: 10.0,
            start_clear: 1.0,
            length: None,
            width: None,
        }
    }
}

impl DifficultyParams {
    pub fn min_gap(&self) -> f64 {
        self.pilot_diameter + 2.0 * self.inflation_radius
    }

    fn validate(&self) -> Result<(), SceneError> {
        let bad = |what: &'static str| Err(SceneError::InvalidParams(what));
        if !(self.pilot_diameter > 0.0 && self.pilot_diameter <= 2.0) {
            return bad("pilot_diameter must be in (0, 2]");
        }
        if !(0.0..=1.0).contains(&self.inflation_radius) {
            return bad("inflation_radius must be in [0, 1]");
        }
        if !(self.pole_radius > 0.0 && self.pole_radius <= 0.5) {
            return bad("pole_radius must be in (0, 0.5]");
        }
        if !(0.0..=45.0).contains(&self.yaw_jitter_deg) {
            return bad("yaw_jitter_deg must be in [0, 45]");
        }
        if self.obstacle_count.is_some_and(|n| n > 100) {
            return bad("obstacle_count must be at most 100");
        }
        if self.length.is_some_and(|l| !(l > 0.0 && l <= 50.0)) || self.width.is_some_and(|w| !(w > 0.0 && w <= 20.0)) {
            return bad("boundary dimensions must be positive and bounded");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("invalid difficulty parameters: {0}")]
    InvalidParams(&'static str),
    #[error("could not place {wanted} obstacles after {attempts} attempts")]
    PlacementFailed { wanted: usize, attempts: usize },
    #[error("no feasible path through the generated scene")]
    Infeasible,
}

pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;
const NAV_RESOLUTION: f64 = 0.05;

pub fn generate_scene(task: TaskKind, seed: u64, params: &DifficultyParams) -> Result<Scene, SceneError> {
    params.validate()?;
    let mut rng = seeding::rng(seed, 0x5CEE);
    let defaults = task.default_dims();
    let dims = RectDims::new(
        params.length.unwrap_or(defaults.length),
        params.width.unwrap_or(defaults.width),
    );
    let yaw = FRAC_PI_2 + rng.random_range(-1.0..=1.0) * params.yaw_jitter_deg.to_radians();
    // Front edge near the origin; the task extends along +y.
    let front = Vec2::new(rng.random_range(-0.2..=0.2), rng.random_range(-0.2..=0.2));
    let center = front + Vec2::from_angle(yaw) * (dims.length / 2.0);
    let boundary_pose = Pose2::new(center.x, center.y, yaw);
    let mut scene = Scene {
        task_kind: task,
        boundary_dims: dims,
        boundary_pose,
        obstacles: Vec::new(),
        payload: Payload::None,
        seed,
    };
    match task {
        TaskKind::Forest | TaskKind::Sidewalk | TaskKind::Footpath => {
            scene.obstacles = place_obstacles(&scene, params, &mut rng)?;
            if !is_feasible(&scene, params.inflation_radius) {
                return Err(SceneError::Infeasible);
            }
        }
        TaskKind::Doorbell => scene.payload = Payload::Doorbell(doorbell_payload(&mut rng)),
        TaskKind::Seats => scene.payload = Payload::Seats(seats_payload(&mut rng)),
        TaskKind::Grocery => scene.payload = Payload::Grocery(grocery_payload(&mut rng)),
        TaskKind::Colours => scene.payload = Payload::Colours(colours_payload(&mut rng)),
        TaskKind::Finder => scene.payload = Payload::Finder(finder_payload(&mut rng)),
        TaskKind::Touchscreen => scene.payload = Payload::Touchscreen(touchscreen_payload(&mut rng)),
    }
    Ok(scene)
}

fn place_obstacles(
    scene: &Scene,
    params: &DifficultyParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Obstacle>, SceneError> {
    let task = scene.task_kind;
    let wanted = params.obstacle_count.unwrap_or(match task {
        TaskKind::Forest => 10,
        TaskKind::Sidewalk => 4,
        _ => 0,
    });
    let rect = scene.boundary();
    let (len, half_w) = (rect.dims.length, rect.dims.width / 2.0);
    let x_range = params.start_clear..=(len - 0.5).max(params.start_clear);
    let min_gap = params.min_gap();
    let mut placed: Vec<Obstacle> = Vec::with_capacity(wanted);
    let mut attempts = 0;
    while placed.len() < wanted {
        if attempts >= MAX_PLACEMENT_ATTEMPTS {
            return Err(SceneError::PlacementFailed { wanted, attempts });
        }
        attempts += 1;
        let x = rng.random_range(x_range.clone());
        let candidate = match task {
            TaskKind::Forest => {
                let r = params.pole_radius;
                let y = rng.random_range(-(half_w - r)..=(half_w - r));
                Obstacle::Disc {
                    center: rect.from_local(Vec2::new(x, y)),
                    radius: r,
                }
            }
            _ => {
                if rng.random_bool(0.5) {
                    // Chair or bin.
                    let r = rng.random_range(0.2..=0.35);
                    let y = rng.random_range(-(half_w - r)..=(half_w - r));
                    Obstacle::Disc {
                        center: rect.from_local(Vec2::new(x, y)),
                        radius: r,
                    }
                } else {
                    // Parked scooter.
                    let l = rng.random_range(0.8..=1.2);
                    let theta = rng.random_range(-PI..PI);
                    let d = Vec2::from_angle(theta) * (l / 2.0);
                    let bound_y = (half_w - d.y.abs()).max(0.0);
                    let y = rng.random_range(-bound_y..=bound_y);
                    let bound_x = d.x.abs();
                    let c = Vec2::new(
                        x.clamp(
                            params.start_clear + bound_x,
                            (len - bound_x).max(params.start_clear + bound_x),
                        ),
                        y,
                    );
                    Obstacle::Segment {
                        a: rect.from_local(c - d),
                        b: rect.from_local(c + d),
                    }
                }
            }
        };
        if !candidate.points().iter().all(|&p| rect.contains(p)) {
            continue;
        }
        if placed.iter().all(|o| o.gap(&candidate) >= min_gap) {
            placed.push(candidate);
        }
    }
    Ok(placed)
}

/// Whether the planner finds a path from the start pose to the goal on the
/// truth map with lateral walls and the given inflation.
pub fn is_feasible(scene: &Scene, inflation_radius: f64) -> bool {
    let rect = scene.boundary();
    let mut grid = scene.truth_grid(NAV_RESOLUTION, 2.0);
    add_lateral_walls(&mut grid, &rect);
    let costmap = grid.inflate(inflation_radius, 0.5);
    planner::plan(
        &costmap,
        scene.start_pose().position,
        planner::compute_goal(&rect),
        &PlannerParams::default(),
    )
    .is_ok()
}

const SURNAMES: [&str; 24] = [
    "MUELLER",
    "MEIER",
    "SCHMID",
    "KELLER",
    "WEBER",
    "HUBER",
    "SCHNEIDER",
    "BRUNNER",
    "BAUMANN",
    "FISCHER",
    "GERBER",
    "FREI",
    "MOSER",
    "WYSS",
    "STEINER",
    "ZIMMERMANN",
    "BERGER",
    "GRAF",
    "FREY",
    "MEYER",
    "LEHMANN",
    "SUTER",
    "WIDMER",
    "KOCH",
];

fn doorbell_payload(rng: &mut ChaCha8Rng) -> DoorbellPayload {
    const SHAPES: [(usize, usize); 5] = [(2, 4), (3, 2), (3, 3), (4, 2), (2, 3)];
    let (rows, cols) = SHAPES[rng.random_range(0..SHAPES.len())];
    let mut pool: Vec<&str> = SURNAMES.to_vec();
    pool.shuffle(rng);
    let names: Vec<String> = pool[..rows * cols].iter().map(|s| s.to_string()).collect();
    let target = rng.random_range(0..names.len());
    DoorbellPayload {
        rows,
        cols,
        names,
        target,
    }
}

fn seats_payload(rng: &mut ChaCha8Rng) -> SeatsPayload {
    let occupied = rng.random_range(0..=4);
    let mut order: Vec<usize> = (0..6).collect();
    order.shuffle(rng);
    let mut seats = vec![SeatOccupant::Free; 6];
    for &i in &order[..occupied] {
        seats[i] = if rng.random_bool(0.5) {
            SeatOccupant::Person
        } else {
            SeatOccupant::Backpack
        };
    }
    SeatsPayload { seats }
}

/// Product catalogue with identifying keywords.
pub const PRODUCTS: [(&str, &[&str]); 10] = [
    ("chamomile tea", &["chamomile", "tea", "herbal"]),
    ("mint tea", &["mint", "tea", "fresh"]),
    ("rice", &["rice", "basmati", "grain"]),
    ("flour", &["flour", "wheat", "baking"]),
    ("pasta", &["pasta", "spaghetti", "durum"]),
    ("coffee", &["coffee", "arabica", "roast"]),
    ("sugar", &["sugar", "cane", "sweet"]),
    ("oats", &["oats", "porridge", "wholegrain"]),
    ("lentils", &["lentils", "red", "legumes"]),
    ("cocoa", &["cocoa", "chocolate", "powder"]),
];

fn grocery_payload(rng: &mut ChaCha8Rng) -> GroceryPayload {
    let (rows, cols) = (rng.random_range(2..=4), rng.random_range(2..=3));
    let dictionaries: Vec<(String, Vec<String>)> = PRODUCTS
        .iter()
        .map(|(p, kw)| (p.to_string(), kw.iter().map(|k| k.to_string()).collect()))
        .collect();
    let mut shelf = Vec::with_capacity(rows * cols);
    let mut pool: Vec<usize> = (0..PRODUCTS.len()).collect();
    pool.shuffle(rng);
    for i in 0..rows * cols {
        shelf.push(PRODUCTS[pool[i % pool.len()]].0.to_string());
    }
    // Keep the target unique on the shelf.
    let target_slot = rng.random_range(0..rows * cols);
    let target = shelf[target_slot].clone();
    for (i, s) in shelf.iter_mut().enumerate() {
        if i != target_slot && *s == target {
            *s = PRODUCTS[pool[(i + 1) % pool.len()]].0.to_string();
            if *s == target {
                *s = PRODUCTS[pool[(i + 2) % pool.len()]].0.to_string();
            }
        }
    }
    GroceryPayload {
        rows,
        cols,
        shelf,
        dictionaries,
        target,
    }
}

/// Predefined base-colour combinations (hue degrees), each sorted.
pub const COLOUR_COMBOS: [[f64; 2]; 4] = [[0.0, 220.0], [120.0, 280.0], [30.0, 180.0], [60.0, 330.0]];

fn colours_payload(rng: &mut ChaCha8Rng) -> ColoursPayload {
    let base_hues = COLOUR_COMBOS[rng.random_range(0..COLOUR_COMBOS.len())];
    let mut arrival: Vec<(u8, u8)> = (0..2u8).flat_map(|b| (1..=3u8).map(move |l| (b, l))).collect();
    arrival.shuffle(rng);
    ColoursPayload { base_hues, arrival }
}

pub const FINDER_LABELS: [&str; 8] = ["ball", "cup", "shoe", "book", "bottle", "teddy", "key", "phone"];

fn finder_payload(rng: &mut ChaCha8Rng) -> FinderPayload {
    let mut labels = FINDER_LABELS.to_vec();
    labels.shuffle(rng);
    let n = rng.random_range(3..=6);
    let objects: Vec<(String, f64)> = labels[..n]
        .iter()
        .map(|l| {
            // Keep clear of the image centre line.
            let side = if rng.random_bool(0.5) { 0.0 } else { 0.55 };
            (l.to_string(), side + rng.random_range(0.05..0.4))
        })
        .collect();
    let target = objects[rng.random_range(0..n)].0.clone();
    FinderPayload { objects, target }
}

fn touchscreen_payload(rng: &mut ChaCha8Rng) -> TouchscreenPayload {
    let (rows, cols) = (5, 5);
    let screen = (250.0, 150.0);
    let target = (rng.random_range(1..=rows), rng.random_range(1..=cols));
    let target_pt = Vec2::new(
        (target.1 as f64 - 0.5) * screen.0 / cols as f64,
        (target.0 as f64 - 0.5) * screen.1 / rows as f64,
    );
    // Start in the quadrant below and to the right of the target.
    let finger_start = Vec2::new(
        rng.random_range(target_pt.x..=screen.0),
        rng.random_range(target_pt.y..=screen.1),
    );
    TouchscreenPayload {
        rows,
        cols,
        screen,
        target,
        finger_start,
    }
}

/// Default angular spacing of simulated depth rays.
pub const DEPTH_RAY_STEP: f64 = 0.5 * PI / 180.0;

/// Ray-cast depth samples of obstacle surfaces. Noise is added along each
/// ray (range error), one ray every [`DEPTH_RAY_STEP`].
pub fn sample_depth_points(
    scene: &Scene,
    pose: &Pose2,
    fov: f64,
    max_range: f64,
    noise_sigma: f64,
    seed: u64,
) -> Vec<Vec2> {
    let rays = ((fov / DEPTH_RAY_STEP).round() as usize).max(1);
    let mut rng = seeding::rng(seed, 0xDE7);
    let noise = Normal::new(0.0, noise_sigma.max(0.0)).expect("finite sigma");
    let mut out = Vec::new();
    for i in 0..rays {
        let offset = if rays == 1 {
            0.0
        } else {
            -fov / 2.0 + fov * i as f64 / (rays - 1) as f64
        };
        // Full circle: avoid sampling the same direction twice.
        let offset = if fov >= 2.0 * PI - 1e-12 {
            -PI + 2.0 * PI * i as f64 / rays as f64
        } else {
            offset
        };
        let dir = Vec2::from_angle(pose.heading + offset);
        let hit = scene
            .obstacles
            .iter()
            .filter_map(|o| o.ray_hit(pose.position, dir))
            .fold(f64::INFINITY, f64::min);
        if hit <= max_range {
            let range = if noise_sigma > 0.0 {
                hit + noise.sample(&mut rng)
            } else {
                hit
            };
            out.push(pose.position + dir * range);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeSampling {
    pub count: usize,
    pub noise_sigma: f64,
    pub outlier_fraction: f64,
    /// Only edge samples within this distance of the pose are kept.
    pub max_range: Option<f64>,
}

impl Default for EdgeSampling {
    fn default() -> Self {
        Self {
            count: 500,
            noise_sigma: 0.02,
            outlier_fraction: 0.1,
            max_range: None,
        }
    }
}

/// Noisy samples of the chosen rectangle edges plus uniform outliers inside
/// the rectangle. Edges are chosen in proportion to their length.
pub fn sample_edge_points(
    scene: &Scene,
    pose: &Pose2,
    visible: &[Edge],
    sampling: &EdgeSampling,
    seed: u64,
) -> Vec<Vec2> {
    let rect = scene.boundary();
    let mut rng = seeding::rng(seed, 0xED6E);
    let noise = Normal::new(0.0, sampling.noise_sigma.max(0.0)).expect("finite sigma");
    let edges: Vec<(Vec2, Vec2)> = visible.iter().map(|&e| rect.edge(e)).collect();
    let lengths: Vec<f64> = edges.iter().map(|(a, b)| a.distance(*b)).collect();
    let total: f64 = lengths.iter().sum();
    let mut out = Vec::with_capacity(sampling.count);
    if edges.is_empty() {
        return out;
    }
    let in_range = |p: Vec2| sampling.max_range.is_none_or(|r| p.distance(pose.position) <= r);
    let mut guard = 0usize;
    while out.len() < sampling.count && guard < sampling.count * 100 {
        guard += 1;
        if rng.random_bool(sampling.outlier_fraction.clamp(0.0, 1.0)) {
            let local = Vec2::new(
                rng.random_range(-0.5..0.5) * rect.dims.length,
                rng.random_range(-0.5..0.5) * rect.dims.width,
            );
            out.push(rect.from_local(local));
            continue;
        }
        let mut pick = rng.random_range(0.0..total);
        let mut k = 0;
        while k + 1 < lengths.len() && pick >= lengths[k] {
            pick -= lengths[k];
            k += 1;
        }
        let (a, b) = edges[k];
        let p = a.lerp(b, rng.random_range(0.0..=1.0));
        if !in_range(p) {
            continue;
        }
        let p = if sampling.noise_sigma > 0.0 {
            p + Vec2::new(noise.sample(&mut rng), noise.sample(&mut rng))
        } else {
            p
        };
        out.push(p);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorParams {
    /// Walking speed when the centre-back unit vibrates, m/s.
    pub walk_speed: f64,
    /// Turning rate, rad/s.
    pub turn_rate: f64,
    /// Walking speed while turning, as a fraction of `walk_speed`.
    pub turn_speed_factor: f64,
    /// Seconds between a cue change and the pilot acting on it.
    pub reaction_delay: f64,
    /// Heading random walk, rad/√s.
    pub heading_jitter: f64,
    pub seed: u64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            walk_speed: 0.5,
            turn_rate: 1.0,
            turn_speed_factor: 0.3,
            reaction_delay: 0.3,
            heading_jitter: 0.02,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotState {
    pub pose: Pose2,
    pub forward_speed: f64,
    pub distance_traveled: f64,
    pub time: f64,
    /// Cue the pilot is currently acting on.
    pub perceived: BeltCue,
    /// Newer cue and the time it started.
    pub pending: Option<(BeltCue, f64)>,
    pub steps: u64,
}

impl PilotState {
    pub fn new(pose: Pose2) -> Self {
        Self {
            pose,
            forward_speed: 0.0,
            distance_traveled: 0.0,
            time: 0.0,
            perceived: BeltCue::None,
            pending: None,
            steps: 0,
        }
    }
}

/// Heading change the pilot aims for given a cue: the vibration marks the
/// world direction opposite the desired one.
pub fn cue_offset(cue: BeltCue) -> Option<f64> {
    cue.body_angle().map(|a| wrap_angle(a - PI))
}

fn act(state: &mut PilotState, cue: BeltCue, dt: f64, params: &BehaviorParams) {
    if dt <= 0.0 {
        return;
    }
    match cue {
        BeltCue::Unit(CENTER_BACK) => {
            state.forward_speed = params.walk_speed;
        }
        BeltCue::Unit(_) => {
            let offset = cue_offset(cue).unwrap_or(0.0);
            let turn = offset.signum() * (params.turn_rate * dt).min(offset.abs());
            state.pose.heading = wrap_angle(state.pose.heading + turn);
            state.forward_speed = params.walk_speed * params.turn_speed_factor;
        }
        BeltCue::All | BeltCue::None => {
            state.forward_speed = 0.0;
            return;
        }
    }
    let d = state.forward_speed * dt;
    state.pose.position += state.pose.forward() * d;
    state.distance_traveled += d;
}

/// Advances the pilot by `dt` seconds while `cue` vibrates.
pub fn step_pilot(state: &PilotState, cue: BeltCue, dt: f64, params: &BehaviorParams) -> PilotState {
    let mut s = *state;
    if cue == s.perceived {
        s.pending = None;
    } else if s.pending.is_none_or(|(p, _)| p != cue) {
        s.pending = Some((cue, s.time));
    }
    let end = s.time + dt;
    let mut now = s.time;
    if let Some((next, since)) = s.pending {
        let ready = since + params.reaction_delay;
        if ready <= end {
            let before = (ready - now).max(0.0);
            let perceived = s.perceived;
            act(&mut s, perceived, before, params);
            now += before;
            s.perceived = next;
            s.pending = None;
        }
    }
    let perceived = s.perceived;
    act(&mut s, perceived, end - now, params);
    if params.heading_jitter > 0.0 && s.forward_speed > 0.0 {
        let mut rng = seeding::rng(params.seed, s.steps);
        let n: f64 = Normal::new(0.0, params.heading_jitter * dt.sqrt())
            .expect("finite jitter")
            .sample(&mut rng);
        s.pose.heading = wrap_angle(s.pose.heading + n);
    }
    s.time = end;
    s.steps += 1;
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belt::heading_to_unit;

    #[test]
    fn forest_scene_is_reproducible_and_inside() {
        let a = generate_scene(TaskKind::Forest, 7, &DifficultyParams::default()).unwrap();
        let b = generate_scene(TaskKind::Forest, 7, &DifficultyParams::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.obstacles.len(), 10);
        let rect = a.boundary();
        for o in &a.obstacles {
            let Obstacle::Disc { center, .. } = o else {
                panic!("poles are discs")
            };
            assert!(rect.contains(*center));
        }
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn empty_sidewalk() {
        let p = DifficultyParams {
            obstacle_count: Some(0),
            ..DifficultyParams::default()
        };
        let s = generate_scene(TaskKind::Sidewalk, 1, &p).unwrap();
        assert!(s.obstacles.is_empty());
    }

    #[test]
    fn impossible_density_is_rejected() {
        let p = DifficultyParams {
            obstacle_count: Some(80),
            ..DifficultyParams::default()
        };
        assert!(matches!(
            generate_scene(TaskKind::Forest, 1, &p),
            Err(SceneError::PlacementFailed { .. })
        ));
    }

    fn one_disc(radius: f64) -> Scene {
        Scene {
            task_kind: TaskKind::Sidewalk,
            boundary_dims: RectDims::new(10.0, 4.0),
            boundary_pose: Pose2::new(0.0, 5.0, FRAC_PI_2),
            obstacles: vec![Obstacle::Disc {
                center: Vec2::new(0.0, 3.0),
                radius,
            }],
            payload: Payload::None,
            seed: 0,
        }
    }

    #[test]
    fn depth_visibility_and_exact_geometry() {
        let scene = one_disc(0.5);
        let away = Pose2::new(0.0, 0.0, -FRAC_PI_2);
        assert!(sample_depth_points(&scene, &away, FRAC_PI_2, 10.0, 0.0, 1).is_empty());
        let toward = Pose2::new(0.0, 0.0, FRAC_PI_2);
        let pts = sample_depth_points(&scene, &toward, FRAC_PI_2, 10.0, 0.0, 1);
        assert!(!pts.is_empty());
        for p in pts {
            assert!((p.distance(Vec2::new(0.0, 3.0)) - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn edge_points_exact_without_noise() {
        let scene = one_disc(0.1);
        let rect = scene.boundary();
        let s = EdgeSampling {
            count: 300,
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            max_range: None,
        };
        let pts = sample_edge_points(&scene, &scene.start_pose(), &Edge::ALL, &s, 3);
        assert_eq!(pts.len(), 300);
        assert!(pts.iter().all(|&p| rect.distance_to_outline(p) < 1e-9));
        let pts = sample_edge_points(
            &scene,
            &scene.start_pose(),
            &[Edge::Left, Edge::Right, Edge::Back],
            &s,
            3,
        );
        let (a, b) = rect.edge(Edge::Front);
        assert!(pts
            .iter()
            .all(|&p| point_segment_distance(p, a, b) > 0.1 || p.distance(a) < 0.1 || p.distance(b) < 0.1));
    }

    #[test]
    fn walk_on_center_back() {
        let p = BehaviorParams {
            walk_speed: 1.0,
            reaction_delay: 0.0,
            heading_jitter: 0.0,
            ..BehaviorParams::default()
        };
        let s = PilotState::new(Pose2::new(0.0, 0.0, 0.3));
        let next = step_pilot(&s, BeltCue::Unit(8), 1.0, &p);
        assert!((next.pose.position.distance(Vec2::from_angle(0.3))).abs() < 1e-12);
        assert!((next.distance_traveled - 1.0).abs() < 1e-12);
    }

    #[test]
    fn none_only_advances_time() {
        let p = BehaviorParams::default();
        let s = PilotState::new(Pose2::new(1.0, 2.0, 0.3));
        let next = step_pilot(&s, BeltCue::None, 0.5, &p);
        assert_eq!(next.pose, s.pose);
        assert_eq!(next.distance_traveled, 0.0);
        assert_eq!(next.time, 0.5);
    }

    #[test]
    fn reaction_delay_splits_the_step() {
        let p = BehaviorParams {
            walk_speed: 1.0,
            reaction_delay: 0.3,
            heading_jitter: 0.0,
            ..BehaviorParams::default()
        };
        let s = PilotState::new(Pose2::new(0.0, 0.0, 0.0));
        let next = step_pilot(&s, BeltCue::Unit(8), 1.0, &p);
        assert!((next.distance_traveled - 0.7).abs() < 1e-12);
    }

    #[test]
    fn left_cues_turn_counter_clockwise_until_centred() {
        let p = BehaviorParams {
            reaction_delay: 0.0,
            heading_jitter: 0.0,
            ..BehaviorParams::default()
        };
        let desired = 1.2;
        let mut s = PilotState::new(Pose2::new(0.0, 0.0, 0.0));
        let mut cue = heading_to_unit(desired - s.pose.heading);
        let mut steps = 0;
        while cue != BeltCue::Unit(8) {
            let before = s.pose.heading;
            s = step_pilot(&s, cue, 0.1, &p);
            assert!(s.pose.heading > before);
            cue = heading_to_unit(desired - s.pose.heading);
            steps += 1;
            assert!(steps < 100);
        }
        assert!((desired - s.pose.heading).abs() <= crate::belt::SECTOR / 2.0 + 1e-9);
    }

    #[test]
    fn payloads_for_every_task() {
        for task in TaskKind::ALL {
            let s = generate_scene(task, 11, &DifficultyParams::default()).unwrap();
            assert_eq!(s.task_kind, task);
            assert_eq!(task.is_navigation(), s.payload == Payload::None);
            assert_eq!(task.to_string().parse::<TaskKind>().unwrap(), task);
        }
    }
}
