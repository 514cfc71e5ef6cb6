use rand::seq::index::sample;

use super::{GridCell, StructuringError};
use crate::geometry::{convex_hull, Vec2};
use crate::seeding;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Sorted member indices.
    pub members: Vec<usize>,
    pub centroid: Vec2,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the graph linking centres at most `eps` apart.
/// Clusters are ordered by their smallest member.
pub fn cluster_detections(centers: &[Vec2], eps: f64) -> Vec<Cluster> {
    let n = centers.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if centers[i].distance(centers[j]) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
        .into_iter()
        .map(|members| {
            let sum = members.iter().fold(Vec2::ZERO, |acc, &i| acc + centers[i]);
            let centroid = sum * (1.0 / members.len() as f64);
            Cluster { members, centroid }
        })
        .collect()
}

/// Normalizes points by their minimum-area oriented bounding box: the box
/// is rotated upright (tilt in (−45°, 45°]) and stretched to the unit square.
pub fn rectify_centers(points: &[Vec2]) -> Result<Vec<Vec2>, StructuringError> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(StructuringError::DegenerateInput("centres are collinear"));
    }
    let scale = hull.iter().map(|p| p.distance(hull[0])).fold(0.0, f64::max);
    let mut best: Option<(f64, f64)> = None;
    for i in 0..hull.len() {
        let e = hull[(i + 1) % hull.len()] - hull[i];
        let angle = e.angle();
        let (lo, hi) = extent(&hull, -angle);
        let area = (hi.x - lo.x) * (hi.y - lo.y);
        if best.is_none_or(|(a, _)| area < a - 1e-12 * scale * scale) {
            best = Some((area, angle));
        }
    }
    let (area, angle) = best.expect("hull is non-empty");
    if area <= 1e-12 * scale * scale {
        return Err(StructuringError::DegenerateInput("centres are collinear"));
    }
    // Any box edge direction works; pick the one closest to the image axes.
    let quarter = std::f64::consts::FRAC_PI_2;
    let mut tilt = angle.rem_euclid(quarter);
    if tilt > quarter / 2.0 {
        tilt -= quarter;
    }
    let (lo, hi) = extent(points, -tilt);
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    Ok(points
        .iter()
        .map(|p| {
            let r = p.rotated(-tilt);
            Vec2::new((r.x - lo.x) / w, (r.y - lo.y) / h)
        })
        .collect())
}

fn extent(points: &[Vec2], rotation: f64) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        let r = p.rotated(rotation);
        lo = Vec2::new(lo.x.min(r.x), lo.y.min(r.y));
        hi = Vec2::new(hi.x.max(r.x), hi.y.max(r.y));
    }
    (lo, hi)
}

const KMEANS_RESTARTS: usize = 100;
const LLOYD_ITERATIONS: usize = 100;

fn lloyd(values: &[f64], mut centers: Vec<f64>) -> Option<(Vec<f64>, Vec<usize>)> {
    let k = centers.len();
    let mut labels = vec![usize::MAX; values.len()];
    for _ in 0..LLOYD_ITERATIONS {
        let mut changed = false;
        for (i, &v) in values.iter().enumerate() {
            let mut best = 0;
            for c in 1..k {
                if (v - centers[c]).abs() < (v - centers[best]).abs() {
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&v, &l) in values.iter().zip(&labels) {
            sums[l] += v;
            counts[l] += 1;
        }
        if counts.contains(&0) {
            return None;
        }
        for c in 0..k {
            centers[c] = sums[c] / counts[c] as f64;
        }
        if !changed {
            break;
        }
    }
    // Sort centres and relabel.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centers[a].total_cmp(&centers[b]).then(a.cmp(&b)));
    let mut rank = vec![0; k];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    let sorted: Vec<f64> = order.iter().map(|&c| centers[c]).collect();
    Some((sorted, labels.iter().map(|&l| rank[l]).collect()))
}

/// One-dimensional k-means: quantile seeding, then seeded random restarts
/// while a cluster ends up empty. Returns ascending centres and the
/// centre rank of every value.
pub fn kmeans_1d(values: &[f64], k: usize, seed: u64) -> Option<(Vec<f64>, Vec<usize>)> {
    let n = values.len();
    if k == 0 || n < k {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let init: Vec<f64> = (0..k).map(|i| sorted[((2 * i + 1) * n) / (2 * k)]).collect();
    if let Some(r) = lloyd(values, init) {
        return Some(r);
    }
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < k {
        return None;
    }
    let mut rng = seeding::rng(seed, 0x6EA5);
    for _ in 0..KMEANS_RESTARTS {
        let init: Vec<f64> = sample(&mut rng, n, k).iter().map(|i| values[i]).collect();
        if let Some(r) = lloyd(values, init) {
            return Some(r);
        }
    }
    None
}

/// Row and column of each rectified point from independent k-means on the
/// vertical and horizontal coordinates (rows top to bottom, y down).
pub fn assign_rows_cols(
    points: &[Vec2],
    n_rows: usize,
    n_cols: usize,
    seed: u64,
) -> Result<Vec<GridCell>, StructuringError> {
    if n_rows == 0 || n_cols == 0 {
        return Err(StructuringError::DegenerateInput(
            "grid needs at least one row and column",
        ));
    }
    if points.len() > n_rows * n_cols {
        return Err(StructuringError::DegenerateInput("more points than grid cells"));
    }
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let (_, rows) = kmeans_1d(&ys, n_rows, seed).ok_or(StructuringError::ClusterCollapse { axis: "vertical" })?;
    let (_, cols) = kmeans_1d(&xs, n_cols, seeding::derive(seed, 1))
        .ok_or(StructuringError::ClusterCollapse { axis: "horizontal" })?;
    Ok(rows
        .iter()
        .zip(&cols)
        .map(|(&r, &c)| GridCell::new(r + 1, c + 1))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DbscanLabel {
    Cluster(usize),
    Noise,
}

impl DbscanLabel {
    /// Cluster id, or −1 for noise.
    pub fn id(self) -> i64 {
        match self {
            DbscanLabel::Cluster(c) => c as i64,
            DbscanLabel::Noise => -1,
        }
    }
}

/// DBSCAN on scalars. Clusters are numbered in order of discovery while
/// scanning the input order.
pub fn dbscan_1d(values: &[f64], eps: f64, min_pts: usize) -> Vec<DbscanLabel> {
    let n = values.len();
    let neighbours = |i: usize| -> Vec<usize> { (0..n).filter(|&j| (values[i] - values[j]).abs() <= eps).collect() };
    let mut labels: Vec<Option<DbscanLabel>> = vec![None; n];
    let mut next = 0;
    for i in 0..n {
        if labels[i].is_some() {
            continue;
        }
        let nb = neighbours(i);
        if nb.len() < min_pts {
            labels[i] = Some(DbscanLabel::Noise);
            continue;
        }
        let id = next;
        next += 1;
        labels[i] = Some(DbscanLabel::Cluster(id));
        let mut queue = nb;
        while let Some(j) = queue.pop() {
            match labels[j] {
                Some(DbscanLabel::Noise) => labels[j] = Some(DbscanLabel::Cluster(id)),
                None => {
                    labels[j] = Some(DbscanLabel::Cluster(id));
                    let nj = neighbours(j);
                    if nj.len() >= min_pts {
                        queue.extend(nj);
                    }
                }
                Some(DbscanLabel::Cluster(_)) => {}
            }
        }
    }
    labels.into_iter().map(|l| l.expect("every value is visited")).collect()
}
