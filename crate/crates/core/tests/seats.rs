mod common;

use common::{seat_layout, seat_rect};
use sightsim::geometry::Vec3;
use sightsim::seats::{
    analyze_seats, expected_free, seats_points, statistical_outlier_filter, SeatsError, SeatsParams, SeatsSynth,
};
use sightsim::structuring::GridCell;
use sightsim::world::SeatOccupant;

#[test]
fn free_seats_found_across_layouts_and_poses() {
    let mut exact = 0;
    for seed in 1000..1060 {
        let layout = seat_layout(seed);
        let rect = seat_rect(seed);
        let pts = seats_points(&layout, &rect, &SeatsSynth::default(), seed);
        let report = analyze_seats(&pts, &rect, &SeatsParams::default()).unwrap();
        if report.free == expected_free(&layout) {
            exact += 1;
        }
    }
    assert!(exact >= 59, "{exact}/60");
}

#[test]
fn heavy_spill_only_confuses_whole_cell_counting() {
    use SeatOccupant::*;
    let layout = vec![Free, Person, Free, Backpack, Free, Person];
    let rect = seat_rect(3);
    let synth = SeatsSynth {
        leak_points: 300,
        ..SeatsSynth::default()
    };
    let pts = seats_points(&layout, &rect, &synth, 3);
    let central = analyze_seats(&pts, &rect, &SeatsParams::default()).unwrap();
    assert_eq!(central.free, expected_free(&layout));
    let whole = analyze_seats(
        &pts,
        &rect,
        &SeatsParams {
            central_fraction: 1.0,
            ..SeatsParams::default()
        },
    )
    .unwrap();
    assert!(whole.free.len() < central.free.len(), "{:?}", whole.free);
}

#[test]
fn rows_count_from_the_front_and_columns_from_the_left() {
    use SeatOccupant::*;
    let layout = vec![Person, Free, Free, Free, Free, Backpack];
    let rect = seat_rect(8);
    let pts = seats_points(&layout, &rect, &SeatsSynth::default(), 8);
    let free = analyze_seats(&pts, &rect, &SeatsParams::default()).unwrap().free;
    assert!(!free.contains(&GridCell::new(1, 1)));
    assert!(!free.contains(&GridCell::new(2, 3)));
    assert_eq!(free.len(), 4);
}

#[test]
fn empty_room_reports_missing_rows() {
    let rect = seat_rect(1);
    assert_eq!(
        analyze_seats(&[], &rect, &SeatsParams::default()),
        Err(SeatsError::RowsNotFound { found: 0 })
    );
}

#[test]
fn outlier_filter_keeps_dense_cloud() {
    let mut pts: Vec<Vec3> = (0..400)
        .map(|i| Vec3::new((i % 20) as f64 * 0.01, (i / 20) as f64 * 0.01, 0.5))
        .collect();
    pts.push(Vec3::new(3.0, 3.0, 3.0));
    let kept = statistical_outlier_filter(&pts, 8, 2.0);
    assert!(!kept.contains(&400));
    assert!(kept.len() >= 380);
}
