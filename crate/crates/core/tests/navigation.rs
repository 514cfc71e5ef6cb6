mod common;

use std::f64::consts::PI;

use common::{blocked_ahead_open_left, rng};
use rand::Rng;
use sightsim::belt::{heading_to_unit, BeltCue, CENTER_BACK, SECTOR};
use sightsim::geometry::{wrap_angle, Pose2};
use sightsim::harness::{run_navigation, RunConfig, Scenario};
use sightsim::mapping::INSCRIBED;
use sightsim::world::{step_pilot, BehaviorParams, Obstacle, PilotState, Scene, TaskKind};

fn scene(task: TaskKind, seed: u64) -> Scene {
    let json = format!(r#"{{"task":"{}","seed":{seed}}}"#, task.name());
    Scenario::from_json(&json, "test").unwrap().build_scene(seed).unwrap()
}

fn unit(c: BeltCue) -> u8 {
    match c {
        BeltCue::Unit(u) => u,
        other => panic!("expected a unit, got {other:?}"),
    }
}

#[test]
fn free_left_turns_the_pilot_counter_clockwise() {
    let diff = blocked_ahead_open_left();
    assert!(diff > 0.0, "planner should veer left, diff {diff}");
    let u = unit(heading_to_unit(diff));
    // The vibration sits opposite the desired direction, on the right side.
    assert!((9..=15).contains(&u), "unit {u}");
    let params = BehaviorParams {
        heading_jitter: 0.0,
        ..BehaviorParams::default()
    };
    let mut pilot = PilotState::new(Pose2::new(0.0, 0.0, PI / 2.0));
    let desired = PI / 2.0 + diff;
    let mut last = pilot.pose.heading;
    for _ in 0..100 {
        let cue = heading_to_unit(desired - pilot.pose.heading);
        if cue == BeltCue::Unit(CENTER_BACK) {
            break;
        }
        pilot = step_pilot(&pilot, cue, 0.1, &params);
        assert!(pilot.pose.heading >= last - 1e-12);
        last = pilot.pose.heading;
    }
    assert!(last > PI / 2.0);
    assert!(wrap_angle(desired - last).abs() <= SECTOR / 2.0 + 1e-9);
}

#[test]
fn straight_walk_covers_speed_times_time() {
    let params = BehaviorParams {
        walk_speed: 1.0,
        heading_jitter: 0.0,
        reaction_delay: 0.0,
        ..BehaviorParams::default()
    };
    let s = step_pilot(
        &PilotState::new(Pose2::new(0.0, 0.0, 0.3)),
        BeltCue::Unit(CENTER_BACK),
        1.0,
        &params,
    );
    assert!((s.pose.position.norm() - 1.0).abs() < 1e-12);
    assert!((s.pose.heading - 0.3).abs() < 1e-12);
}

#[test]
fn global_cue_direction_survives_rotation_by_whole_sectors() {
    let mut r = rng(21);
    for _ in 0..500 {
        let diff = r.random_range(-PI..PI);
        let k = r.random_range(0..16u8);
        let before = unit(heading_to_unit(diff));
        let after = unit(heading_to_unit(diff - f64::from(k) * SECTOR));
        assert_eq!(after, (before + 16 - k) % 16);
    }
}

#[test]
fn navigation_tasks_reach_the_end_line() {
    let config = RunConfig::default();
    for task in [TaskKind::Footpath, TaskKind::Sidewalk, TaskKind::Forest] {
        let mut ok = 0;
        for seed in 0..6 {
            let scene = scene(task, seed);
            let out = run_navigation(&scene, &config, seed);
            if out.success {
                ok += 1;
                let rect = scene.boundary();
                assert!(rect.to_local(out.final_pilot.pose.position).x >= rect.dims.length / 2.0 - 1.0);
                assert_eq!(out.cues.last().map(|c| c.1), Some(BeltCue::All));
                assert_eq!(out.cues.iter().filter(|c| c.1 == BeltCue::All).count(), 1);
            }
        }
        assert!(ok >= 5, "{task:?}: {ok}/6");
    }
}

#[test]
fn successful_runs_keep_clear_of_poles() {
    let config = RunConfig::default();
    for seed in 40..45 {
        let scene = scene(TaskKind::Forest, seed);
        let out = run_navigation(&scene, &config, seed);
        if !out.success {
            continue;
        }
        assert!(!out.collided);
        let lethal = scene.truth_grid(0.05, 2.0).inflate(config.pilot_radius, 0.0);
        assert!(lethal.value_at(out.final_pilot.pose.position) < INSCRIBED);
        for o in &scene.obstacles {
            if let Obstacle::Disc { .. } = o {
                assert!(o.distance(out.final_pilot.pose.position) > 0.0);
            }
        }
    }
}

#[test]
fn cue_ticks_are_at_least_a_second_apart() {
    let scene = scene(TaskKind::Forest, 3);
    let out = run_navigation(&scene, &RunConfig::default(), 3);
    let units: Vec<f64> = out
        .cues
        .iter()
        .filter(|c| matches!(c.1, BeltCue::Unit(_)))
        .map(|c| c.0)
        .collect();
    assert!(units.windows(2).all(|w| w[1] - w[0] >= 1.0 - 1e-9));
}
