//! Free-seat analysis on a labelled 3D point map of two rows of three chairs.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::RectBoundary;
use crate::geometry::{Vec2, Vec3};
use crate::seeding;
use crate::structuring::GridCell;
use crate::world::SeatOccupant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticLabel {
    Chair,
    Person,
    Backpack,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticPoint {
    pub position: Vec3,
    pub label: SemanticLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeatsParams {
    pub z_band: (f64, f64),
    pub occupancy_ratio_threshold: f64,
    pub raster_res: f64,
    pub k_neighbors: usize,
    pub std_multiplier: f64,
    pub min_component_points: usize,
    /// Linear fraction of each cell, per axis, that is evaluated.
    pub central_fraction: f64,
}

impl Default for SeatsParams {
    fn default() -> Self {
        Self {
            z_band: (0.4, 1.9),
            occupancy_ratio_threshold: 0.2,
            raster_res: 0.05,
            k_neighbors: 8,
            std_multiplier: 2.0,
            min_component_points: 50,
            central_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatReport {
    /// Free cells, row-major.
    pub free: Vec<GridCell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeatsError {
    #[error("expected two chair rows, found {found}")]
    RowsNotFound { found: usize },
}

/// Indices of the points kept by the statistical outlier filter: a point is
/// dropped when its mean distance to its `k` nearest neighbours exceeds the
/// global mean of that statistic plus `std_multiplier` sample deviations.
pub fn statistical_outlier_filter(points: &[Vec3], k: usize, std_multiplier: f64) -> Vec<usize> {
    let n = points.len();
    if n <= k || k == 0 {
        return (0..n).collect();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x).then(a.cmp(&b)));
    let mut stat = vec![0.0; n];
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    for (pos, &i) in order.iter().enumerate() {
        best.clear();
        let p = points[i];
        let consider = |j: usize, best: &mut Vec<f64>| -> bool {
            let dx = points[j].x - p.x;
            if best.len() == k && dx * dx >= best[k - 1] {
                return false;
            }
            let d = p.distance_squared(points[j]);
            if best.len() < k || d < best[k - 1] {
                let at = best.partition_point(|&b| b <= d);
                best.insert(at, d);
                best.truncate(k);
            }
            true
        };
        let (mut lo, mut hi) = (pos, pos + 1);
        let (mut left_open, mut right_open) = (true, true);
        while left_open || right_open {
            if left_open {
                if lo == 0 {
                    left_open = false;
                } else {
                    lo -= 1;
                    left_open = consider(order[lo], &mut best);
                }
            }
            if right_open {
                if hi >= n {
                    right_open = false;
                } else {
                    right_open = consider(order[hi], &mut best);
                    hi += 1;
                }
            }
        }
        stat[i] = best.iter().map(|d| d.sqrt()).sum::<f64>() / k as f64;
    }
    let mean = stat.iter().sum::<f64>() / n as f64;
    let var = stat.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
    let cut = mean + std_multiplier * var.sqrt();
    (0..n).filter(|&i| stat[i] <= cut).collect()
}

/// 8-connected components of occupied raster cells, as lists of point
/// indices, largest first (ties by first cell in row-major order).
fn raster_components(local: &[Vec2], origin: Vec2, res: f64) -> Vec<Vec<usize>> {
    use std::collections::{HashMap, HashSet};
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in local.iter().enumerate() {
        let key = (
            ((p.x - origin.x) / res).floor() as i64,
            ((p.y - origin.y) / res).floor() as i64,
        );
        cells.entry(key).or_default().push(i);
    }
    let mut keys: Vec<(i64, i64)> = cells.keys().copied().collect();
    keys.sort_by_key(|&(x, y)| (y, x));
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &start in &keys {
        if seen.contains(&start) {
            continue;
        }
        let mut members = Vec::new();
        let mut stack = vec![start];
        seen.insert(start);
        while let Some((x, y)) = stack.pop() {
            members.extend_from_slice(&cells[&(x, y)]);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let nb = (x + dx, y + dy);
                    if cells.contains_key(&nb) && seen.insert(nb) {
                        stack.push(nb);
                    }
                }
            }
        }
        members.sort_unstable();
        comps.push(members);
    }
    // Stable sort keeps discovery order among equal sizes.
    comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
    comps
}

/// Reports which of the six seats are free. Rows are numbered from the
/// rectangle's front edge, columns from the left of a pilot facing along
/// the rectangle.
pub fn analyze_seats(
    points: &[SemanticPoint],
    rect: &RectBoundary,
    params: &SeatsParams,
) -> Result<SeatReport, SeatsError> {
    let cropped: Vec<&SemanticPoint> = points.iter().filter(|p| rect.contains(p.position.xy())).collect();
    let xyz: Vec<Vec3> = cropped.iter().map(|p| p.position).collect();
    let kept = statistical_outlier_filter(&xyz, params.k_neighbors, params.std_multiplier);
    let band: Vec<&SemanticPoint> = kept
        .into_iter()
        .map(|i| cropped[i])
        .filter(|p| p.position.z >= params.z_band.0 && p.position.z <= params.z_band.1)
        .collect();
    let local: Vec<Vec2> = band.iter().map(|p| rect.to_local(p.position.xy())).collect();
    let origin = Vec2::new(-rect.dims.length / 2.0, -rect.dims.width / 2.0);
    let comps: Vec<Vec<usize>> = raster_components(&local, origin, params.raster_res)
        .into_iter()
        .filter(|c| c.len() >= params.min_component_points)
        .collect();
    if comps.len() < 2 {
        return Err(SeatsError::RowsNotFound { found: comps.len() });
    }
    let rows: Vec<usize> = comps[0].iter().chain(&comps[1]).copied().collect();
    let (mut lo, mut hi) = (
        Vec2::new(f64::INFINITY, f64::INFINITY),
        Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for &i in &rows {
        let p = local[i];
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    // Row 1 spans the half nearer the front edge (smaller local x); col 1
    // the third with the largest local y (pilot's left).
    let depth = (hi.x - lo.x) / 2.0;
    let span = (hi.y - lo.y) / 3.0;
    let mut free = Vec::new();
    for row in 1..=2 {
        for col in 1..=3 {
            let cx = lo.x + depth * (row as f64 - 0.5);
            let cy = hi.y - span * (col as f64 - 0.5);
            let (hx, hy) = (
                depth * params.central_fraction / 2.0,
                span * params.central_fraction / 2.0,
            );
            let (mut total, mut taken) = (0usize, 0usize);
            for (p, l) in band.iter().zip(&local) {
                if (l.x - cx).abs() <= hx && (l.y - cy).abs() <= hy {
                    total += 1;
                    if p.label != SemanticLabel::Chair {
                        taken += 1;
                    }
                }
            }
            let ratio = if total == 0 { 0.0 } else { taken as f64 / total as f64 };
            if ratio <= params.occupancy_ratio_threshold {
                free.push(GridCell::new(row, col));
            }
        }
    }
    Ok(SeatReport { free })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeatsSynth {
    /// Local x of the two row centres.
    pub row_offsets: (f64, f64),
    pub col_pitch: f64,
    pub chair_width: f64,
    pub chair_depth: f64,
    pub chair_points: usize,
    pub person_points: usize,
    pub backpack_points: usize,
    /// Person points spilled into the outer ring of free neighbouring seats.
    pub leak_points: usize,
    /// Isolated spurious points anywhere in the rectangle.
    pub clutter_points: usize,
    pub noise_sigma: f64,
}

impl Default for SeatsSynth {
    fn default() -> Self {
        Self {
            row_offsets: (-0.35, 0.35),
            col_pitch: 0.6,
            chair_width: 0.58,
            chair_depth: 0.55,
            chair_points: 450,
            person_points: 400,
            backpack_points: 220,
            leak_points: 25,
            clutter_points: 15,
            noise_sigma: 0.005,
        }
    }
}

/// Synthetic semantic point map for a row-major 2×3 seat layout.
pub fn seats_points(seats: &[SeatOccupant], rect: &RectBoundary, synth: &SeatsSynth, seed: u64) -> Vec<SemanticPoint> {
    let mut rng = seeding::rng(seed, 0x5EA7);
    let mut out = Vec::new();
    let noise = synth.noise_sigma;
    let push = |rng: &mut rand_chacha::ChaCha8Rng, local: Vec3, label: SemanticLabel, out: &mut Vec<SemanticPoint>| {
        let jitter = |rng: &mut rand_chacha::ChaCha8Rng| rng.random_range(-noise..=noise);
        let xy = rect.from_local(Vec2::new(local.x + jitter(rng), local.y + jitter(rng)));
        out.push(SemanticPoint {
            position: Vec3::new(xy.x, xy.y, local.z + jitter(rng)),
            label,
        });
    };
    let (hw, hd) = (synth.chair_width / 2.0, synth.chair_depth / 2.0);
    for (idx, occ) in seats.iter().enumerate().take(6) {
        let (row, col) = (idx / 3, idx % 3);
        let cx = if row == 0 {
            synth.row_offsets.0
        } else {
            synth.row_offsets.1
        };
        let cy = synth.col_pitch * (1.0 - col as f64);
        for _ in 0..synth.chair_points {
            let x = cx + rng.random_range(-hd..=hd);
            let y = cy + rng.random_range(-hw..=hw);
            // Seat surface, backrest on the far side, a few leg points.
            let z = match rng.random_range(0..10) {
                0..=5 => 0.45,
                6..=8 => rng.random_range(0.45..0.9),
                _ => rng.random_range(0.0..0.45),
            };
            let x = if z > 0.45 {
                cx + hd - rng.random_range(0.0..0.05)
            } else {
                x
            };
            push(&mut rng, Vec3::new(x, y, z), SemanticLabel::Chair, &mut out);
        }
        // Row frame joining neighbouring chairs.
        for _ in 0..40 {
            let y = cy + rng.random_range(-synth.col_pitch / 2.0..=synth.col_pitch / 2.0);
            push(&mut rng, Vec3::new(cx, y, 0.42), SemanticLabel::Chair, &mut out);
        }
        match occ {
            SeatOccupant::Free => {}
            SeatOccupant::Person => {
                for _ in 0..synth.person_points {
                    let p = Vec3::new(
                        cx + rng.random_range(-0.18..=0.18),
                        cy + rng.random_range(-0.18..=0.18),
                        rng.random_range(0.5..1.35),
                    );
                    push(&mut rng, p, SemanticLabel::Person, &mut out);
                }
            }
            SeatOccupant::Backpack => {
                for _ in 0..synth.backpack_points {
                    let p = Vec3::new(
                        cx + rng.random_range(-0.1..=0.1),
                        cy + rng.random_range(-0.15..=0.15),
                        rng.random_range(0.47..0.8),
                    );
                    push(&mut rng, p, SemanticLabel::Backpack, &mut out);
                }
            }
        }
    }
    // Leaks: a neighbour's arm or bag strap reaching into the outer band of
    // a free seat, always outside its central half.
    for (idx, occ) in seats.iter().enumerate().take(6) {
        if *occ != SeatOccupant::Free {
            continue;
        }
        let (row, col) = (idx / 3, idx % 3);
        let cx = if row == 0 {
            synth.row_offsets.0
        } else {
            synth.row_offsets.1
        };
        let cy = synth.col_pitch * (1.0 - col as f64);
        for _ in 0..synth.leak_points {
            let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let dy = side * rng.random_range(0.2..0.27);
            let p = Vec3::new(cx + rng.random_range(-0.1..=0.1), cy + dy, rng.random_range(0.6..1.0));
            push(&mut rng, p, SemanticLabel::Person, &mut out);
        }
    }
    for _ in 0..synth.clutter_points {
        let p = Vec3::new(
            rng.random_range(-0.5..0.5) * rect.dims.length,
            rng.random_range(-0.5..0.5) * rect.dims.width,
            rng.random_range(0.0..2.0),
        );
        let label = if rng.random_bool(0.5) {
            SemanticLabel::Person
        } else {
            SemanticLabel::Chair
        };
        push(&mut rng, p, label, &mut out);
    }
    out
}

/// Row-major free cells implied by a layout.
pub fn expected_free(seats: &[SeatOccupant]) -> Vec<GridCell> {
    seats
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == SeatOccupant::Free)
        .map(|(i, _)| GridCell::new(i / 3 + 1, i % 3 + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::RectDims;
    use crate::geometry::Pose2;

    fn rect() -> RectBoundary {
        RectBoundary::from_pose(Vec2::new(1.0, 2.0), 1.3, RectDims::new(4.0, 3.0))
    }

    #[test]
    fn far_point_removed() {
        let mut pts: Vec<Vec3> = (0..50)
            .map(|i| Vec3::new((i % 5) as f64 * 0.01, (i / 5) as f64 * 0.01, 0.0))
            .collect();
        pts.push(Vec3::new(10.0, 0.0, 0.0));
        let kept = statistical_outlier_filter(&pts, 5, 1.0);
        assert!(!kept.contains(&50));
        assert_eq!(statistical_outlier_filter(&pts[..3], 5, 1.0), vec![0, 1, 2]);
    }

    #[test]
    fn knn_statistic_matches_brute_force() {
        let mut rng = seeding::rng(3, 3);
        let pts: Vec<Vec3> = (0..300)
            .map(|_| {
                Vec3::new(
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.0..1.0),
                    rng.random_range(0.0..1.0),
                )
            })
            .collect();
        let k = 6;
        let stat: Vec<f64> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut d: Vec<f64> = pts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, q)| p.distance_squared(*q).sqrt())
                    .collect();
                d.sort_by(f64::total_cmp);
                d[..k].iter().sum::<f64>() / k as f64
            })
            .collect();
        let mean = stat.iter().sum::<f64>() / 300.0;
        let sd = (stat.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / 299.0).sqrt();
        let expected: Vec<usize> = (0..300).filter(|&i| stat[i] <= mean + 1.0 * sd).collect();
        assert_eq!(statistical_outlier_filter(&pts, k, 1.0), expected);
    }

    #[test]
    fn all_chairs_free() {
        let r = rect();
        let pts = seats_points(&[SeatOccupant::Free; 6], &r, &SeatsSynth::default(), 1);
        let report = analyze_seats(&pts, &r, &SeatsParams::default()).unwrap();
        assert_eq!(report.free.len(), 6);
    }

    #[test]
    fn person_in_row1_col2() {
        let r = rect();
        let mut layout = [SeatOccupant::Free; 6];
        layout[1] = SeatOccupant::Person;
        let pts = seats_points(&layout, &r, &SeatsSynth::default(), 2);
        let report = analyze_seats(&pts, &r, &SeatsParams::default()).unwrap();
        assert_eq!(report.free, expected_free(&layout));
        assert!(!report.free.contains(&GridCell::new(1, 2)));
    }

    #[test]
    fn rigid_motion_invariance() {
        let r = rect();
        let mut layout = [SeatOccupant::Free; 6];
        layout[4] = SeatOccupant::Backpack;
        let pts = seats_points(&layout, &r, &SeatsSynth::default(), 5);
        let pose = Pose2::new(-3.0, 7.0, 2.1);
        let moved: Vec<SemanticPoint> = pts
            .iter()
            .map(|p| {
                let xy = pose.transform_point(p.position.xy());
                SemanticPoint {
                    position: Vec3::new(xy.x, xy.y, p.position.z),
                    label: p.label,
                }
            })
            .collect();
        let a = analyze_seats(&pts, &r, &SeatsParams::default()).unwrap();
        let b = analyze_seats(&moved, &r.transformed(&pose), &SeatsParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_rows() {
        let r = rect();
        assert_eq!(
            analyze_seats(&[], &r, &SeatsParams::default()),
            Err(SeatsError::RowsNotFound { found: 0 })
        );
    }
}
