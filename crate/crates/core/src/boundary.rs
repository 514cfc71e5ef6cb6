//! Task-boundary estimation: ground-plane fitting and RANSAC fitting of a
//! rectangle of known dimensions to noisy edge points.
//!
//! The rectangle model is rigid (2-DoF translation + 1-DoF rotation), so the
//! returned corners always form an exact rectangle. Validation follows two
//! rules: every visible edge must be close to perpendicular to its
//! neighbours after a per-edge line refit, and each edge must collect at
//! least `min_edge_points` inliers. Either the front or the back edge may
//! fall short of that count, which lets the detector work when only three
//! edges are in view.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, Vec2, Vec3};
use crate::seeding;

/// Length runs along the walking direction (front → back), width across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectDims {
    pub length: f64,
    pub width: f64,
}

impl RectDims {
    pub fn new(length: f64, width: f64) -> Self {
        Self { length, width }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Front,
    Right,
    Back,
    Left,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Front, Edge::Right, Edge::Back, Edge::Left];

    fn index(self) -> usize {
        match self {
            Edge::Front => 0,
            Edge::Right => 1,
            Edge::Back => 2,
            Edge::Left => 3,
        }
    }

    fn is_side(self) -> bool {
        matches!(self, Edge::Left | Edge::Right)
    }
}

/// Four world-frame corners ordered front-left, front-right, back-right,
/// back-left (counter-clockwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectBoundary {
    pub corners: [Vec2; 4],
    pub dims: RectDims,
}

impl RectBoundary {
    /// Builds the rectangle centred at `center` whose front → back axis
    /// points along `yaw`.
    pub fn from_pose(center: Vec2, yaw: f64, dims: RectDims) -> Self {
        let f = Vec2::from_angle(yaw);
        let l = f.perp();
        let (hl, hw) = (dims.length * 0.5, dims.width * 0.5);
        Self {
            corners: [
                center - f * hl + l * hw,
                center - f * hl - l * hw,
                center + f * hl - l * hw,
                center + f * hl + l * hw,
            ],
            dims,
        }
    }

    pub fn center(&self) -> Vec2 {
        (self.corners[0] + self.corners[1] + self.corners[2] + self.corners[3]) * 0.25
    }

    /// Unit vector from the front edge towards the back edge.
    pub fn forward(&self) -> Vec2 {
        (self.back_mid() - self.front_mid()).normalized()
    }

    pub fn yaw(&self) -> f64 {
        self.forward().angle()
    }

    pub fn left(&self) -> Vec2 {
        self.forward().perp()
    }

    pub fn front_mid(&self) -> Vec2 {
        (self.corners[0] + self.corners[1]) * 0.5
    }

    pub fn back_mid(&self) -> Vec2 {
        (self.corners[2] + self.corners[3]) * 0.5
    }

    pub fn edge(&self, edge: Edge) -> (Vec2, Vec2) {
        let c = &self.corners;
        match edge {
            Edge::Front => (c[0], c[1]),
            Edge::Right => (c[1], c[2]),
            Edge::Back => (c[2], c[3]),
            Edge::Left => (c[3], c[0]),
        }
    }

    /// Coordinates relative to the centre: `x` along forward, `y` along left.
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        let d = p - self.center();
        Vec2::new(d.dot(self.forward()), d.dot(self.left()))
    }

    pub fn from_local(&self, local: Vec2) -> Vec2 {
        self.center() + self.forward() * local.x + self.left() * local.y
    }

    /// Closed containment test using the four half-planes of the CCW outline.
    pub fn contains(&self, p: Vec2) -> bool {
        (0..4).all(|i| {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            (b - a).cross(p - a) >= -1e-12
        })
    }

    /// Euclidean distance from `p` to the rectangle outline.
    pub fn distance_to_outline(&self, p: Vec2) -> f64 {
        Edge::ALL
            .iter()
            .map(|&e| {
                let (a, b) = self.edge(e);
                crate::geometry::point_segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn transformed(&self, pose: &crate::geometry::Pose2) -> Self {
        let mut corners = self.corners;
        for c in corners.iter_mut() {
            *c = pose.transform_point(*c);
        }
        Self {
            corners,
            dims: self.dims,
        }
    }

    /// Checks the rectangle invariants: CCW order, opposite sides of equal
    /// length, right interior angles.
    pub fn is_valid(&self, length_tol: f64, angle_tol: f64) -> bool {
        let c = &self.corners;
        let sides: Vec<Vec2> = (0..4).map(|i| c[(i + 1) % 4] - c[i]).collect();
        let ccw = crate::geometry::polygon_signed_area(c) > 0.0;
        let opposite = (sides[0].norm() - sides[2].norm()).abs() <= length_tol
            && (sides[1].norm() - sides[3].norm()).abs() <= length_tol;
        let right_angles = (0..4).all(|i| {
            let a = sides[i];
            let b = sides[(i + 1) % 4];
            let cos = a.dot(b) / (a.norm() * b.norm());
            (cos.acos() - FRAC_PI_2).abs() <= angle_tol
        });
        ccw && opposite && right_angles
    }
}

/// Plane `normal · p = offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.x * p.x + self.normal.y * p.y + self.normal.z * p.z - self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub plane: Plane,
    /// Root-mean-square orthogonal residual of the input points.
    pub rms: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum BoundaryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("need at least {needed} edge points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("no valid boundary hypothesis (best inlier count {best_inliers})")]
    NotFound { best_inliers: usize },
}

/// Total-least-squares plane through the points.
pub fn fit_ground_plane(points: &[Vec3]) -> Result<PlaneFit, BoundaryError> {
    if points.len() < 3 {
        return Err(BoundaryError::DegenerateInput("fewer than three points"));
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc: Vector3<f64>, p| {
        acc + Vector3::new(p.x, p.y, p.z)
    }) / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = Vector3::new(p.x, p.y, p.z) - centroid;
        cov += d * d.transpose();
    }
    cov /= n;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let largest = eig.eigenvalues[order[2]];
    let middle = eig.eigenvalues[order[1]];
    if largest <= f64::EPSILON || middle <= largest * 1e-12 {
        return Err(BoundaryError::DegenerateInput("points are collinear"));
    }

    let mut normal: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned();
    normal /= normal.norm();
    // Orient towards +z; for vertical planes fall back to the first non-zero axis.
    let flip = if normal.z.abs() > 1e-12 {
        normal.z < 0.0
    } else if normal.y.abs() > 1e-12 {
        normal.y < 0.0
    } else {
        normal.x < 0.0
    };
    if flip {
        normal = -normal;
    }
    let offset = normal.dot(&centroid);
    let plane = Plane {
        normal: Vec3::new(normal.x, normal.y, normal.z),
        offset,
    };
    let rms = (points.iter().map(|p| plane.signed_distance(*p).powi(2)).sum::<f64>() / n).sqrt();
    Ok(PlaneFit { plane, rms })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryParams {
    pub iterations: usize,
    /// Perpendicular distance (m) within which a point belongs to an edge.
    pub inlier_tol: f64,
    pub min_edge_points: usize,
    pub angle_tol_deg: f64,
    /// Minimum distance between the two sampled points of a hypothesis.
    pub min_sample_separation: f64,
    pub seed: u64,
}

impl Default for BoundaryParams {
    fn default() -> Self {
        Self {
            iterations: 500,
            inlier_tol: 0.05,
            min_edge_points: 20,
            angle_tol_deg: 5.0,
            min_sample_separation: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDetection {
    pub rect: RectBoundary,
    pub inliers: usize,
    /// Inlier counts indexed front, right, back, left.
    pub edge_counts: [usize; 4],
    /// Largest deviation from 90° between refit edge lines (degrees).
    pub max_angle_error_deg: f64,
}

/// Assigns `local` (rectangle frame, see [`RectBoundary::to_local`]) to the
/// nearest edge whose extent covers it and whose perpendicular distance is
/// within `tol`.
fn classify_local(local: Vec2, dims: RectDims, tol: f64) -> Option<Edge> {
    let (hl, hw) = (dims.length * 0.5, dims.width * 0.5);
    let mut best: Option<(f64, Edge)> = None;
    let mut consider = |dist: f64, edge: Edge| {
        if dist <= tol && best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, edge));
        }
    };
    if local.y.abs() <= hw + tol {
        consider((local.x + hl).abs(), Edge::Front);
        consider((local.x - hl).abs(), Edge::Back);
    }
    if local.x.abs() <= hl + tol {
        consider((local.y + hw).abs(), Edge::Right);
        consider((local.y - hw).abs(), Edge::Left);
    }
    best.map(|(_, e)| e)
}

fn edge_counts(rect: &RectBoundary, points: &[Vec2], tol: f64) -> [usize; 4] {
    let mut counts = [0usize; 4];
    for p in points {
        if let Some(e) = classify_local(rect.to_local(*p), rect.dims, tol) {
            counts[e.index()] += 1;
        }
    }
    counts
}

fn counts_pass(counts: &[usize; 4], min_edge_points: usize) -> bool {
    let ok = |e: Edge| counts[e.index()] >= min_edge_points;
    ok(Edge::Left) && ok(Edge::Right) && (ok(Edge::Front) || ok(Edge::Back))
}

/// Relabels front/back so the front edge is the short edge nearer `viewpoint`.
fn orient_towards(rect: RectBoundary, viewpoint: Vec2) -> RectBoundary {
    if viewpoint.distance(rect.back_mid()) < viewpoint.distance(rect.front_mid()) {
        RectBoundary::from_pose(rect.center(), wrap_angle(rect.yaw() + PI), rect.dims)
    } else {
        rect
    }
}

/// Best front-edge offset along `f` for a rectangle whose lateral centre is
/// fixed. Returns `(inlier_count, offset)`.
fn slide_along(
    points: &[Vec2],
    f: Vec2,
    l: Vec2,
    lateral_center: f64,
    dims: RectDims,
    tol: f64,
    events: &mut Vec<(f64, i32)>,
) -> (usize, f64) {
    let hw = dims.width * 0.5;
    let len = dims.length;
    events.clear();
    for p in points {
        let u = p.dot(f);
        let b = p.dot(l) - lateral_center;
        if (b.abs() - hw).abs() <= tol {
            events.push((u - len - tol, 1));
            events.push((u + tol, -1));
        } else if b.abs() <= hw + tol {
            events.push((u - tol, 1));
            events.push((u + tol, -1));
            events.push((u - len - tol, 1));
            events.push((u - len + tol, -1));
        }
    }
    if events.is_empty() {
        return (0, 0.0);
    }
    // Closed intervals: process starts before ends at equal coordinates.
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut count = 0i32;
    let mut best = (0i32, events[0].0);
    for i in 0..events.len() {
        count += events[i].1;
        if count > best.0 {
            let next = events.get(i + 1).map_or(events[i].0, |e| e.0);
            best = (count, 0.5 * (events[i].0 + next));
        }
    }
    (best.0.max(0) as usize, best.1)
}

struct SearchOutcome {
    best: Option<(usize, RectBoundary)>,
    best_any: usize,
    /// Inlier count of every hypothesis that passed the edge-count check.
    tested_valid: Vec<usize>,
}

fn ransac_search(points: &[Vec2], dims: RectDims, viewpoint: Vec2, params: &BoundaryParams) -> SearchOutcome {
    let mut rng = seeding::rng(params.seed, 0xB0D4);
    let mut events = Vec::with_capacity(points.len() * 4);
    let mut outcome = SearchOutcome {
        best: None,
        best_any: 0,
        tested_valid: Vec::new(),
    };
    let n = points.len();
    for _ in 0..params.iterations {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let (p, q) = (points[i], points[j]);
        if p.distance(q) < params.min_sample_separation {
            continue;
        }
        let f = (q - p).normalized();
        let l = f.perp();
        let line_offset = p.dot(l);
        for side in [1.0, -1.0] {
            let lateral_center = line_offset + side * dims.width * 0.5;
            let (count, front) = slide_along(points, f, l, lateral_center, dims, params.inlier_tol, &mut events);
            outcome.best_any = outcome.best_any.max(count);
            if outcome.best.as_ref().is_some_and(|(c, _)| count <= *c) {
                continue;
            }
            let center = f * (front + dims.length * 0.5) + l * lateral_center;
            let rect = orient_towards(RectBoundary::from_pose(center, f.angle(), dims), viewpoint);
            let counts = edge_counts(&rect, points, params.inlier_tol);
            if counts_pass(&counts, params.min_edge_points) {
                outcome.tested_valid.push(count);
                outcome.best = Some((count, rect));
            }
        }
    }
    outcome
}

/// Gauss-Newton refinement of the rigid pose against point-to-edge
/// distances of the current inliers.
fn refine(rect: RectBoundary, points: &[Vec2], tol: f64) -> RectBoundary {
    let dims = rect.dims;
    let (hl, hw) = (dims.length * 0.5, dims.width * 0.5);
    let mut center = rect.center();
    let mut yaw = rect.yaw();
    for _ in 0..15 {
        let current = RectBoundary::from_pose(center, yaw, dims);
        let f = current.forward();
        let l = current.left();
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for p in points {
            let d = *p - center;
            let local = Vec2::new(d.dot(f), d.dot(l));
            let Some(edge) = classify_local(local, dims, tol) else {
                continue;
            };
            // Residual and its gradient w.r.t. (cx, cy, yaw).
            let (r, g) = match edge {
                Edge::Front => (local.x + hl, Vector3::new(-f.x, -f.y, local.y)),
                Edge::Back => (local.x - hl, Vector3::new(-f.x, -f.y, local.y)),
                Edge::Right => (local.y + hw, Vector3::new(-l.x, -l.y, -local.x)),
                Edge::Left => (local.y - hw, Vector3::new(-l.x, -l.y, -local.x)),
            };
            jtj += g * g.transpose();
            jtr += g * r;
        }
        let Some(step) = jtj.lu().solve(&(-jtr)) else {
            break;
        };
        center += Vec2::new(step.x, step.y);
        yaw = wrap_angle(yaw + step.z);
        if step.norm() < 1e-12 {
            break;
        }
    }
    RectBoundary::from_pose(center, yaw, dims)
}

/// Direction (radians, modulo π) of the total-least-squares line.
fn line_direction(points: &[Vec2]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vec2::ZERO, |a, p| a + *p) * (1.0 / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - mean;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    if sxx + syy <= f64::EPSILON {
        return None;
    }
    Some(0.5 * (2.0 * sxy).atan2(sxx - syy))
}

/// Largest deviation from a right angle between each side line and each
/// short-edge line, over edges with enough support.
fn max_corner_angle_error(rect: &RectBoundary, points: &[Vec2], params: &BoundaryParams) -> f64 {
    let mut per_edge: [Vec<Vec2>; 4] = Default::default();
    for p in points {
        if let Some(e) = classify_local(rect.to_local(*p), rect.dims, params.inlier_tol) {
            per_edge[e.index()].push(*p);
        }
    }
    let min_support = params.min_edge_points.max(2);
    let direction = |e: Edge| {
        let pts = &per_edge[e.index()];
        (pts.len() >= min_support).then(|| line_direction(pts)).flatten()
    };
    let mut worst: f64 = 0.0;
    for side in Edge::ALL.into_iter().filter(|e| e.is_side()) {
        for short in Edge::ALL.into_iter().filter(|e| !e.is_side()) {
            if let (Some(a), Some(b)) = (direction(side), direction(short)) {
                let between = wrap_angle(a - b).abs();
                let acute = between.min(PI - between);
                worst = worst.max((FRAC_PI_2 - acute).abs().to_degrees());
            }
        }
    }
    worst
}

/// Fits the known-dimension rectangle to `points`. `viewpoint` is where the
/// observer stands; the short edge nearer to it is labelled front.
pub fn detect_boundary(
    points: &[Vec2],
    dims: RectDims,
    viewpoint: Vec2,
    params: &BoundaryParams,
) -> Result<BoundaryDetection, BoundaryError> {
    if points.len() < 2 {
        return Err(BoundaryError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    if !(dims.length > 0.0 && dims.width > 0.0) {
        return Err(BoundaryError::DegenerateInput("rectangle dims must be positive"));
    }
    let outcome = ransac_search(points, dims, viewpoint, params);
    let Some((_, hypothesis)) = outcome.best else {
        return Err(BoundaryError::NotFound {
            best_inliers: outcome.best_any,
        });
    };

    let rect = orient_towards(refine(hypothesis, points, params.inlier_tol), viewpoint);
    let counts = edge_counts(&rect, points, params.inlier_tol);
    let angle_error = max_corner_angle_error(&rect, points, params);
    if !counts_pass(&counts, params.min_edge_points) || angle_error > params.angle_tol_deg {
        return Err(BoundaryError::NotFound {
            best_inliers: outcome.best_any,
        });
    }
    Ok(BoundaryDetection {
        rect,
        inliers: counts.iter().sum(),
        edge_counts: counts,
        max_angle_error_deg: angle_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose2;
    use rand_distr::{Distribution, Normal};

    fn outline_points(rect: &RectBoundary, edges: &[Edge], per_edge: usize) -> Vec<Vec2> {
        let mut pts = Vec::new();
        for &e in edges {
            let (a, b) = rect.edge(e);
            for k in 0..per_edge {
                pts.push(a.lerp(b, (k as f64 + 0.5) / per_edge as f64));
            }
        }
        pts
    }

    #[test]
    fn rect_from_pose_is_ccw_rectangle() {
        let r = RectBoundary::from_pose(Vec2::new(1.0, 3.0), FRAC_PI_2, RectDims::new(6.0, 2.0));
        assert!(r.is_valid(1e-12, 1e-12));
        assert!(r.corners[0].distance(Vec2::new(0.0, 0.0)) < 1e-12);
        assert!(r.corners[2].distance(Vec2::new(2.0, 6.0)) < 1e-12);
        assert!(r.contains(Vec2::new(1.0, 3.0)));
        assert!(!r.contains(Vec2::new(2.1, 3.0)));
    }

    #[test]
    fn plane_on_z0() {
        let pts: Vec<Vec3> = (0..20)
            .map(|i| Vec3::new((i % 5) as f64, (i / 5) as f64 * 0.7, 0.0))
            .collect();
        let fit = fit_ground_plane(&pts).unwrap();
        assert!((fit.plane.normal.z - 1.0).abs() < 1e-12);
        assert!(fit.plane.offset.abs() < 1e-12);
        assert!(fit.rms < 1e-12);
    }

    #[test]
    fn plane_three_exact_points_matches_cross_product() {
        let a = Vec3::new(0.3, -1.0, 0.2);
        let b = Vec3::new(2.0, 0.5, 0.9);
        let c = Vec3::new(-1.0, 1.5, -0.4);
        let u = Vector3::new(b.x - a.x, b.y - a.y, b.z - a.z);
        let v = Vector3::new(c.x - a.x, c.y - a.y, c.z - a.z);
        let mut n = u.cross(&v).normalize();
        if n.z < 0.0 {
            n = -n;
        }
        let d = n.dot(&Vector3::new(a.x, a.y, a.z));
        let fit = fit_ground_plane(&[a, b, c]).unwrap();
        assert!((fit.plane.normal.x - n.x).abs() < 1e-9);
        assert!((fit.plane.normal.y - n.y).abs() < 1e-9);
        assert!((fit.plane.normal.z - n.z).abs() < 1e-9);
        assert!((fit.plane.offset - d).abs() < 1e-9);
    }

    #[test]
    fn plane_noisy_offset() {
        let mut rng = seeding::rng(3, 0);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let pts: Vec<Vec3> = (0..400)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    0.5 + noise.sample(&mut rng),
                )
            })
            .collect();
        let fit = fit_ground_plane(&pts).unwrap();
        assert!((0.49..=0.51).contains(&fit.plane.offset), "{}", fit.plane.offset);
    }

    #[test]
    fn plane_collinear_is_degenerate() {
        let pts: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert_eq!(
            fit_ground_plane(&pts),
            Err(BoundaryError::DegenerateInput("points are collinear"))
        );
    }

    #[test]
    fn noiseless_four_edges_exact() {
        let truth = RectBoundary::from_pose(Vec2::new(1.0, 3.0), FRAC_PI_2, RectDims::new(6.0, 2.0));
        let pts = outline_points(&truth, &Edge::ALL, 60);
        let det = detect_boundary(&pts, truth.dims, Vec2::new(1.0, -1.0), &BoundaryParams::default()).unwrap();
        for (a, b) in det.rect.corners.iter().zip(truth.corners.iter()) {
            assert!(a.distance(*b) < 1e-6, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn front_is_edge_nearest_viewpoint() {
        let truth = RectBoundary::from_pose(Vec2::new(0.0, 0.0), 0.3, RectDims::new(5.0, 2.0));
        let pts = outline_points(&truth, &Edge::ALL, 50);
        let behind = truth.back_mid() + truth.forward() * 2.0;
        let det = detect_boundary(&pts, truth.dims, behind, &BoundaryParams::default()).unwrap();
        assert!(det.rect.front_mid().distance(truth.back_mid()) < 1e-6);
    }

    #[test]
    fn outliers_only_is_not_found() {
        let mut rng = seeding::rng(1, 1);
        let pts: Vec<Vec2> = (0..200)
            .map(|_| Vec2::new(rng.random_range(0.0..6.0), rng.random_range(0.0..6.0)))
            .collect();
        let err = detect_boundary(&pts, RectDims::new(6.0, 2.0), Vec2::ZERO, &BoundaryParams::default()).unwrap_err();
        assert!(matches!(err, BoundaryError::NotFound { .. }));
    }

    #[test]
    fn single_point_is_rejected() {
        let err = detect_boundary(
            &[Vec2::ZERO],
            RectDims::new(1.0, 1.0),
            Vec2::ZERO,
            &BoundaryParams::default(),
        )
        .unwrap_err();
        assert_eq!(err, BoundaryError::TooFewPoints { needed: 2, got: 1 });
    }

    #[test]
    fn best_so_far_is_monotone() {
        let truth = RectBoundary::from_pose(Vec2::new(0.0, 3.0), 1.4, RectDims::new(6.0, 2.0));
        let mut pts = outline_points(&truth, &[Edge::Left, Edge::Right, Edge::Back], 40);
        let mut rng = seeding::rng(9, 0);
        for _ in 0..30 {
            pts.push(truth.from_local(Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0))));
        }
        let out = ransac_search(&pts, truth.dims, truth.front_mid(), &BoundaryParams::default());
        let (best, _) = out.best.unwrap();
        assert!(out.tested_valid.windows(2).all(|w| w[0] < w[1]));
        assert!(out.tested_valid.iter().all(|&c| c <= best));
    }

    #[test]
    fn rigid_motion_equivariance() {
        let truth = RectBoundary::from_pose(Vec2::new(0.5, 3.0), 1.5, RectDims::new(6.0, 2.0));
        let pts = outline_points(&truth, &Edge::ALL, 40);
        let view = truth.front_mid() - truth.forward();
        let params = BoundaryParams::default();
        let a = detect_boundary(&pts, truth.dims, view, &params).unwrap();
        let motion = Pose2::new(4.0, -2.0, 0.9);
        let moved: Vec<Vec2> = pts.iter().map(|p| motion.transform_point(*p)).collect();
        let b = detect_boundary(&moved, truth.dims, motion.transform_point(view), &params).unwrap();
        let expected = a.rect.transformed(&motion);
        for (x, y) in b.rect.corners.iter().zip(expected.corners.iter()) {
            assert!(x.distance(*y) < 1e-6);
        }
    }
}
