mod common;

use common::rng;
use rand::Rng;
use sightsim::geometry::Vec2;
use sightsim::touch::{
    apply_homography, fingertip, homography_from_corners, obey, Phase, ScreenGrid, TouchCue, TouchError, TouchGuidance,
    GUIDANCE_PERIOD,
};

fn grid() -> ScreenGrid {
    ScreenGrid {
        size: (250.0, 160.0),
        rows: 5,
        cols: 5,
    }
}

/// Runs a noiseless finger until Select; returns the tick count.
fn ticks_to_select(target: Vec2, start: Vec2, tol: (f64, f64), step: f64, cap: usize) -> Option<usize> {
    let mut g = TouchGuidance::new(target, tol);
    let mut finger = start;
    for k in 0..cap {
        let cue = g.step(finger, k as f64 * GUIDANCE_PERIOD).expect("one call per window");
        if cue == TouchCue::Select {
            return Some(k + 1);
        }
        finger = obey(finger, cue, step);
    }
    None
}

#[test]
fn convergence_from_every_lower_right_cell() {
    let g = grid();
    let tol = g.tolerance();
    for row in 3..=5 {
        for col in 3..=5 {
            let start = g.item_center(row, col) + Vec2::new(3.0, 2.0);
            for (tr, tc) in [(1, 1), (3, 3), (2, 5), (5, 1)] {
                let target = g.item_center(tr, tc);
                let bound =
                    ((target.x - start.x).abs()).ceil() as usize + ((target.y - start.y).abs()).ceil() as usize + 2;
                let n = ticks_to_select(target, start, tol, 1.0, 10_000).unwrap();
                assert!(n <= bound, "start cell ({row},{col}) target ({tr},{tc}): {n} > {bound}");
            }
        }
    }
}

#[test]
fn target_never_moves_while_guiding() {
    let g = grid();
    let target = g.item_center(2, 2);
    let mut guide = TouchGuidance::new(target, g.tolerance());
    let mut finger = Vec2::new(240.0, 150.0);
    for k in 0..400 {
        if let Some(cue) = guide.step(finger, k as f64 * GUIDANCE_PERIOD) {
            finger = obey(finger, cue, 2.0);
        }
        assert_eq!(guide.target, target);
    }
}

#[test]
fn rate_limit_drops_calls_inside_the_window() {
    let mut g = TouchGuidance::new(Vec2::new(10.0, 10.0), (2.0, 2.0));
    assert!(g.step(Vec2::new(50.0, 50.0), 0.0).is_some());
    assert!(g.step(Vec2::new(50.0, 50.0), 0.1).is_none());
    assert!(g.step(Vec2::new(50.0, 50.0), 0.2).is_some());
    assert_eq!(g.trace.len(), 2);
}

#[test]
fn select_then_confirm_then_silence() {
    let mut g = TouchGuidance::new(Vec2::new(10.0, 10.0), (2.0, 2.0));
    assert_eq!(g.step(Vec2::new(11.0, 10.5), 0.0), Some(TouchCue::Select));
    assert!(g.confirm());
    assert_eq!(g.phase, Phase::Done);
    assert_eq!(g.step(Vec2::new(11.0, 10.5), 1.0), Some(TouchCue::Silent));
}

#[test]
fn overshoot_upwards_is_cued_down() {
    let mut g = TouchGuidance::new(Vec2::new(50.0, 50.0), (4.0, 4.0));
    g.step(Vec2::new(50.0, 90.0), 0.0);
    assert_eq!(g.phase, Phase::AlignY);
    assert!(matches!(g.step(Vec2::new(50.0, 30.0), 0.2), Some(TouchCue::Down(_))));
}

#[test]
fn corners_map_exactly_and_interior_round_trips() {
    let mut r = rng(12);
    for _ in 0..200 {
        let src = grid().corners();
        let dst: [Vec2; 4] = std::array::from_fn(|i| {
            src[i] * 3.0 + Vec2::new(r.random_range(-60.0..60.0), r.random_range(-60.0..60.0)) + Vec2::new(400.0, 300.0)
        });
        let h = homography_from_corners(&src, &dst).unwrap();
        for i in 0..4 {
            assert!(apply_homography(&h, src[i]).unwrap().distance(dst[i]) < 1e-8);
        }
        let inv = h.inverse().unwrap();
        let p = Vec2::new(r.random_range(0.0..250.0), r.random_range(0.0..160.0));
        let back = apply_homography(&inv, apply_homography(&h, p).unwrap()).unwrap();
        assert!(back.distance(p) < 1e-9);
    }
}

#[test]
fn degenerate_quads_and_empty_masks_are_errors() {
    let sq = grid().corners();
    let line = [
        Vec2::new(0.0, 0.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(2.0, 2.0),
        Vec2::new(0.0, 5.0),
    ];
    assert_eq!(homography_from_corners(&line, &sq), Err(TouchError::DegenerateCorners));
    assert_eq!(fingertip(&[]), Err(TouchError::EmptyMask));
    let tip = fingertip(&[Vec2::new(4.0, 9.0), Vec2::new(3.0, 2.0), Vec2::new(1.0, 2.0)]).unwrap();
    assert_eq!(tip, Vec2::new(1.0, 2.0));
}
