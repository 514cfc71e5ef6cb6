//! Belt cue quantization, the 1 Hz guidance ticker and finish-line detection.
//!
//! Units are numbered 0..16 counter-clockwise starting at the body front, so
//! unit 4 sits on the left hip and unit 8 at the centre of the back. The
//! active unit is `wrap(diff + π)` quantized to 22.5° sectors, which keeps
//! the vibrating position fixed in the world while the pilot turns.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::RectBoundary;
use crate::geometry::{wrap_angle, Pose2, Vec2};
use crate::mapping::Costmap;
use crate::planner::{self, Path, PlanError, PlannerParams};

pub const UNIT_COUNT: u8 = 16;
pub const SECTOR: f64 = TAU / UNIT_COUNT as f64;
pub const CENTER_BACK: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeltCue {
    Unit(u8),
    All,
    None,
}

impl BeltCue {
    /// Body-frame angle of the vibrating unit (CCW from front), if a single
    /// unit is active.
    pub fn body_angle(self) -> Option<f64> {
        match self {
            BeltCue::Unit(i) => Some(wrap_angle(f64::from(i) * SECTOR)),
            _ => None,
        }
    }
}

impl fmt::Display for BeltCue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeltCue::Unit(i) => write!(f, "{i}"),
            BeltCue::All => f.write_str("ALL"),
            BeltCue::None => f.write_str("NONE"),
        }
    }
}

impl FromStr for BeltCue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ALL" => Ok(BeltCue::All),
            "NONE" => Ok(BeltCue::None),
            _ => match s.parse::<u8>() {
                Ok(i) if i < UNIT_COUNT => Ok(BeltCue::Unit(i)),
                _ => Err(format!("bad belt cue {s:?}")),
            },
        }
    }
}

/// Maps `desired − current` heading onto a belt unit. Exact sector
/// boundaries go to the lower index (unit 0 wins the 15/0 wrap).
pub fn heading_to_unit(heading_diff: f64) -> BeltCue {
    let cue_angle = wrap_angle(heading_diff + PI).rem_euclid(TAU);
    let scaled = cue_angle / SECTOR;
    let mut k = scaled.round();
    if (scaled - scaled.floor() - 0.5).abs() < 1e-9 {
        k = scaled.floor();
    }
    BeltCue::Unit((k as i64).rem_euclid(i64::from(UNIT_COUNT)) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FinishParams {
    pub hfov_deg: f64,
    pub max_range: f64,
    /// Forward distance after the end-line endpoints vanish.
    pub forward_threshold: f64,
    /// Fraction of the boundary length that must be walked in total.
    pub min_distance_fraction: f64,
    /// Fraction of the boundary length after which detection is armed.
    pub arm_fraction: f64,
}

impl Default for FinishParams {
    fn default() -> Self {
        Self {
            hfov_deg: 110.0,
            max_range: 6.0,
            forward_threshold: 1.0,
            min_distance_fraction: 0.75,
            arm_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FinishState {
    /// Position at the moment both endpoints left the view. Stays latched
    /// once set.
    pub hidden_at: Option<Vec2>,
}

/// Whether `p` projects into the simulated camera from `pose`.
pub fn in_frustum(pose: &Pose2, p: Vec2, params: &FinishParams) -> bool {
    let rel = pose.inverse_transform_point(p);
    rel.x > 0.0 && rel.norm() <= params.max_range && rel.y.atan2(rel.x).abs() <= params.hfov_deg.to_radians() / 2.0
}

pub fn finish_check(
    rect: &RectBoundary,
    pose: &Pose2,
    distance_traveled: f64,
    state: &mut FinishState,
    params: &FinishParams,
) -> bool {
    let length = rect.dims.length;
    if distance_traveled < params.arm_fraction * length {
        state.hidden_at = None;
        return false;
    }
    let since = match state.hidden_at {
        Some(p) => p,
        None => {
            let (a, b) = rect.edge(crate::boundary::Edge::Back);
            if in_frustum(pose, a, params) || in_frustum(pose, b, params) {
                return false;
            }
            log::debug!("end line out of view at {:?} after {distance_traveled:.2} m", pose);
            *state.hidden_at.insert(pose.position)
        }
    };
    let forward = (pose.position - since).dot(rect.forward());
    forward > params.forward_threshold && distance_traveled > params.min_distance_fraction * length
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceParams {
    pub period: f64,
    pub lookahead: f64,
    pub planner: PlannerParams,
    pub finish: FinishParams,
    /// Search radius for a non-lethal start cell when the pilot stands in
    /// inflated space.
    pub escape_radius: f64,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        Self {
            period: 1.0,
            lookahead: 1.0,
            planner: PlannerParams::default(),
            finish: FinishParams::default(),
            escape_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GuidanceStatus {
    Guiding,
    Finished,
    Halted(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceState {
    pub last_emit: Option<f64>,
    /// World-frame heading latched at the last tick.
    pub desired_heading: Option<f64>,
    pub path: Option<Path>,
    pub finish: FinishState,
    pub status: GuidanceStatus,
    all_sent: bool,
}

impl Default for GuidanceState {
    fn default() -> Self {
        Self {
            last_emit: None,
            desired_heading: None,
            path: None,
            finish: FinishState::default(),
            status: GuidanceStatus::Guiding,
            all_sent: false,
        }
    }
}

impl GuidanceState {
    /// The unit vibrating right now for a pilot facing `heading`. Between
    /// ticks the world direction stays latched, so the body unit follows
    /// the pilot's rotation.
    pub fn active_cue(&self, heading: f64) -> BeltCue {
        match (&self.status, self.desired_heading) {
            (GuidanceStatus::Guiding, Some(desired)) => heading_to_unit(desired - heading),
            _ => BeltCue::None,
        }
    }
}

fn replan(costmap: &Costmap, start: Vec2, goal: Vec2, params: &GuidanceParams) -> Result<Path, PlanError> {
    match planner::plan(costmap, start, goal, &params.planner) {
        Err(PlanError::LethalStart) => {
            let cell =
                planner::nearest_free_cell(costmap, start, params.planner.lethal_threshold, params.escape_radius)
                    .ok_or(PlanError::LethalStart)?;
            let goal_cell = costmap
                .world_to_cell(goal)
                .ok_or(PlanError::OutOfBounds(planner::Endpoint::Goal))?;
            planner::plan_cells(costmap, cell, goal_cell, &params.planner)
        }
        other => other,
    }
}

/// One guidance step at simulated time `t`. Returns `BeltCue::None` when
/// the rate limit suppresses emission.
#[allow(clippy::too_many_arguments)]
pub fn guidance_tick(
    costmap: &Costmap,
    rect: &RectBoundary,
    pose: &Pose2,
    distance_traveled: f64,
    t: f64,
    state: &mut GuidanceState,
    params: &GuidanceParams,
) -> BeltCue {
    if state.status == GuidanceStatus::Finished {
        if state.all_sent {
            return BeltCue::None;
        }
        state.all_sent = true;
        state.last_emit = Some(t);
        return BeltCue::All;
    }
    if state.last_emit.is_some_and(|last| t - last < params.period - 1e-9) {
        return BeltCue::None;
    }
    state.last_emit = Some(t);

    if finish_check(rect, pose, distance_traveled, &mut state.finish, &params.finish) {
        state.status = GuidanceStatus::Finished;
        state.desired_heading = None;
        state.all_sent = true;
        return BeltCue::All;
    }

    let goal = planner::compute_goal(rect);
    match replan(costmap, pose.position, goal, params) {
        Ok(path) => {
            let desired = planner::desired_heading(&path, pose, params.lookahead);
            state.desired_heading = Some(desired);
            state.path = Some(path);
            state.status = GuidanceStatus::Guiding;
            heading_to_unit(desired - pose.heading)
        }
        Err(e) => {
            log::debug!("guidance halted at t={t:.2}: {e}");
            state.status = GuidanceStatus::Halted(e.to_string());
            state.desired_heading = None;
            BeltCue::None
        }
    }
}

/// Renders a `(t, cue)` log as CSV.
pub fn cue_log_csv(log: &[(f64, BeltCue)]) -> String {
    let mut s = String::from("t,cue\n");
    for (t, cue) in log {
        s.push_str(&format!("{t:.3},{cue}\n"));
    }
    s
}
