mod common;

use common::{boundary_scene, corner_rms, grid_search_rect};
use sightsim::boundary::{detect_boundary, BoundaryError, BoundaryParams, Edge};
use sightsim::geometry::Vec2;
use sightsim::world::{sample_edge_points, EdgeSampling};

const ALL_EDGES: [Edge; 4] = [Edge::Front, Edge::Right, Edge::Back, Edge::Left];
const NO_BACK: [Edge; 3] = [Edge::Front, Edge::Right, Edge::Left];

fn points(seed: u64, edges: &[Edge]) -> (sightsim::world::Scene, Vec<Vec2>) {
    let scene = boundary_scene(seed);
    let pts = sample_edge_points(&scene, &scene.start_pose(), edges, &EdgeSampling::default(), seed);
    (scene, pts)
}

#[test]
fn detection_agrees_with_pose_grid_search() {
    for seed in 0..8 {
        let (scene, pts) = points(seed, &ALL_EDGES);
        let truth = scene.boundary();
        let params = BoundaryParams {
            seed,
            ..BoundaryParams::default()
        };
        let det = detect_boundary(&pts, scene.boundary_dims, scene.start_pose().position, &params).unwrap();
        let oracle = grid_search_rect(&pts, &truth, 0.06, 2.0, params.inlier_tol);
        assert!(corner_rms(&oracle, &truth) < 0.05, "oracle itself off, seed {seed}");
        let rms = corner_rms(&det.rect, &oracle);
        assert!(rms < 0.05, "seed {seed}: rms to oracle {rms}");
    }
}

#[test]
fn three_edges_still_locate_the_rectangle() {
    let mut good = 0;
    for seed in 100..130 {
        let (scene, pts) = points(seed, &NO_BACK);
        let params = BoundaryParams {
            seed,
            ..BoundaryParams::default()
        };
        if let Ok(det) = detect_boundary(&pts, scene.boundary_dims, scene.start_pose().position, &params) {
            if corner_rms(&det.rect, &scene.boundary()) < 0.08 {
                good += 1;
            }
        }
    }
    assert!(good >= 27, "{good}/30");
}

#[test]
fn front_is_the_edge_nearer_the_viewpoint() {
    let (scene, pts) = points(7, &ALL_EDGES);
    let truth = scene.boundary();
    // Observed from beyond the back edge the labelling flips.
    let far = truth.back_mid() + truth.forward() * 0.5;
    let det = detect_boundary(&pts, scene.boundary_dims, far, &BoundaryParams::default()).unwrap();
    assert!(det.rect.front_mid().distance(truth.back_mid()) < 0.05);
}

#[test]
fn same_seed_same_rectangle() {
    let (scene, pts) = points(3, &ALL_EDGES);
    let p = BoundaryParams::default();
    let a = detect_boundary(&pts, scene.boundary_dims, scene.start_pose().position, &p).unwrap();
    let b = detect_boundary(&pts, scene.boundary_dims, scene.start_pose().position, &p).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pure_clutter_is_rejected() {
    let (scene, _) = points(11, &ALL_EDGES);
    let clutter = sample_edge_points(
        &scene,
        &scene.start_pose(),
        &ALL_EDGES,
        &EdgeSampling {
            outlier_fraction: 1.0,
            ..EdgeSampling::default()
        },
        11,
    );
    let r = detect_boundary(
        &clutter,
        scene.boundary_dims,
        scene.start_pose().position,
        &BoundaryParams::default(),
    );
    assert!(r.is_err());
    assert!(matches!(
        detect_boundary(
            &clutter[..1],
            scene.boundary_dims,
            Vec2::ZERO,
            &BoundaryParams::default()
        ),
        Err(BoundaryError::TooFewPoints { .. })
    ));
}
