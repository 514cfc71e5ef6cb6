//! Closed navigation loop: sense, map, plan, cue, walk.

use serde::{Deserialize, Serialize};

use super::run::RunConfig;
use crate::belt::{guidance_tick, BeltCue, GuidanceParams, GuidanceState, GuidanceStatus};
use crate::boundary::{detect_boundary, BoundaryParams, Edge, RectBoundary};
use crate::mapping::{OccupancyGrid, INSCRIBED};
use crate::seeding;
use crate::world::{
    add_lateral_walls, sample_depth_points, sample_edge_points, step_pilot, PilotState, Scene, TaskKind,
};

pub const NAV_DT: f64 = 0.1;
pub const NAV_RESOLUTION: f64 = 0.05;
const MAP_MARGIN: f64 = 2.0;
const DEPTH_FOV_DEG: f64 = 100.0;
const DEPTH_RANGE: f64 = 4.0;
/// Consecutive guidance ticks without a path before the run is abandoned.
const MAX_HALTED_TICKS: usize = 5;
/// How far short of the true end line a declared finish may stop.
const FINISH_SLACK: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavOutcome {
    pub success: bool,
    pub failure_reason: Option<String>,
    pub duration_s: f64,
    pub collided: bool,
    pub final_pilot: PilotState,
    pub detected: Option<RectBoundary>,
    /// Cues actually emitted by the guidance ticker.
    pub cues: Vec<(f64, BeltCue)>,
}

fn fail(
    reason: impl Into<String>,
    t: f64,
    pilot: PilotState,
    detected: Option<RectBoundary>,
    cues: Vec<(f64, BeltCue)>,
    collided: bool,
) -> NavOutcome {
    NavOutcome {
        success: false,
        failure_reason: Some(reason.into()),
        duration_s: t,
        collided,
        final_pilot: pilot,
        detected,
        cues,
    }
}

fn grid_around(rect: &RectBoundary) -> OccupancyGrid {
    let xs = rect.corners.map(|c| c.x);
    let ys = rect.corners.map(|c| c.y);
    let min = crate::geometry::Vec2::new(
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        ys.iter().copied().fold(f64::INFINITY, f64::min),
    );
    let max = crate::geometry::Vec2::new(
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let m = crate::geometry::Vec2::new(MAP_MARGIN, MAP_MARGIN);
    OccupancyGrid::covering(min - m, max + m, NAV_RESOLUTION).expect("boundary extent is finite")
}

/// Runs one navigation task from the scene's start pose until the finish
/// is declared, the pilot collides or leaves the path, guidance gives up,
/// or the timeout passes.
pub fn run_navigation(scene: &Scene, config: &RunConfig, seed: u64) -> NavOutcome {
    let start = scene.start_pose();
    let mut pilot = PilotState::new(start);
    let truth_rect = scene.boundary();

    let edges = sample_edge_points(
        scene,
        &start,
        &[Edge::Left, Edge::Right, Edge::Back],
        &config.edge_sampling,
        seeding::derive(seed, 0xB0),
    );
    let bparams = BoundaryParams {
        seed: seeding::derive(seed, 0xB1),
        ..BoundaryParams::default()
    };
    let rect = match detect_boundary(&edges, scene.boundary_dims, start.position, &bparams) {
        Ok(d) => d.rect,
        Err(e) => return fail(format!("boundary: {e}"), 0.0, pilot, None, Vec::new(), false),
    };

    let collision_map = scene
        .truth_grid(NAV_RESOLUTION, MAP_MARGIN)
        .inflate(config.pilot_radius, 0.0);
    let mut map = grid_around(&rect);
    let mut guidance = GuidanceState::default();
    let gparams = GuidanceParams::default();
    let behavior = crate::world::BehaviorParams {
        seed: seeding::derive(seed, 0xB2),
        ..config.behavior
    };
    let mut cues = Vec::new();
    let mut halted = 0usize;
    let steps = (config.timeout_s / NAV_DT).ceil() as u64;

    for step in 0..steps {
        let t = step as f64 * NAV_DT;
        let pose = pilot.pose;
        let seen = sample_depth_points(
            scene,
            &pose,
            DEPTH_FOV_DEG.to_radians(),
            DEPTH_RANGE,
            config.depth_noise,
            seeding::derive(seed, 0x1000 + step),
        );
        map.integrate_points(&seen);

        let due = guidance.status == GuidanceStatus::Finished
            || guidance.last_emit.is_none_or(|last| t - last >= gparams.period - 1e-9);
        if due {
            let mut grid = map.clone();
            grid.crop_to_boundary(&rect);
            add_lateral_walls(&mut grid, &rect);
            let costmap = grid.inflate(config.inflation_radius, 0.5);
            let cue = guidance_tick(
                &costmap,
                &rect,
                &pose,
                pilot.distance_traveled,
                t,
                &mut guidance,
                &gparams,
            );
            if cue != BeltCue::None {
                cues.push((t, cue));
            }
            match &guidance.status {
                GuidanceStatus::Finished => {
                    let x = truth_rect.to_local(pose.position).x;
                    if x < truth_rect.dims.length / 2.0 - FINISH_SLACK {
                        return fail(
                            "finish declared short of the end line",
                            t,
                            pilot,
                            Some(rect),
                            cues,
                            false,
                        );
                    }
                    return NavOutcome {
                        success: true,
                        failure_reason: None,
                        duration_s: t,
                        collided: false,
                        final_pilot: pilot,
                        detected: Some(rect),
                        cues,
                    };
                }
                GuidanceStatus::Halted(reason) => {
                    halted += 1;
                    if halted >= MAX_HALTED_TICKS {
                        return fail(format!("guidance halted: {reason}"), t, pilot, Some(rect), cues, false);
                    }
                }
                GuidanceStatus::Guiding => halted = 0,
            }
        }

        let cue = guidance.active_cue(pilot.pose.heading);
        pilot = step_pilot(&pilot, cue, NAV_DT, &behavior);
        let t_next = t + NAV_DT;
        if collision_map.value_at(pilot.pose.position) >= INSCRIBED {
            return fail("collision", t_next, pilot, Some(rect), cues, true);
        }
        let local = truth_rect.to_local(pilot.pose.position);
        if scene.task_kind == TaskKind::Footpath && local.y.abs() > truth_rect.dims.width / 2.0 {
            return fail("left the path", t_next, pilot, Some(rect), cues, false);
        }
        // Walking back out through the start line or far past the end.
        if local.x < -truth_rect.dims.length / 2.0 - 2.0 || local.x > truth_rect.dims.length / 2.0 + 3.0 {
            return fail("left the task area", t_next, pilot, Some(rect), cues, false);
        }
    }
    fail("timeout", steps as f64 * NAV_DT, pilot, Some(rect), cues, false)
}
