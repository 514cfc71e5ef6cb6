//! Screen rectification, fingertip extraction and the finger guidance
//! state machine.

use std::fmt;
use std::fmt::Write as _;

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TouchError {
    #[error("three of the four corners are collinear")]
    DegenerateCorners,
    #[error("point maps to infinity")]
    PointAtInfinity,
    #[error("hand mask is empty")]
    EmptyMask,
}

/// Projective map normalized so the bottom-right entry is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(pub Matrix3<f64>);

impl Homography {
    pub fn identity() -> Self {
        Homography(Matrix3::identity())
    }

    /// Normalizes by the bottom-right entry; `None` when it vanishes.
    pub fn from_matrix(m: Matrix3<f64>) -> Option<Self> {
        let s = m[(2, 2)];
        (s.abs() > 1e-12 && m.iter().all(|v| v.is_finite())).then(|| Homography(m / s))
    }

    pub fn apply(&self, p: Vec2) -> Result<Vec2, TouchError> {
        apply_homography(self, p)
    }

    pub fn inverse(&self) -> Option<Homography> {
        self.0.try_inverse().and_then(Homography::from_matrix)
    }

    pub fn compose(&self, other: &Homography) -> Option<Homography> {
        Homography::from_matrix(self.0 * other.0)
    }
}

fn collinear(a: Vec2, b: Vec2, c: Vec2, scale: f64) -> bool {
    (b - a).cross(c - a).abs() <= 1e-12 * scale * scale
}

fn has_collinear_triple(p: &[Vec2; 4]) -> bool {
    let scale = p
        .iter()
        .flat_map(|a| p.iter().map(move |b| a.distance(*b)))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return true;
    }
    (0..4).any(|skip| {
        let t: Vec<Vec2> = (0..4).filter(|&i| i != skip).map(|i| p[i]).collect();
        collinear(t[0], t[1], t[2], scale)
    })
}

/// Direct linear transform from four correspondences with h33 fixed to 1.
pub fn homography_from_corners(src: &[Vec2; 4], dst: &[Vec2; 4]) -> Result<Homography, TouchError> {
    if has_collinear_triple(src) || has_collinear_triple(dst) {
        return Err(TouchError::DegenerateCorners);
    }
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for i in 0..4 {
        let (x, y) = (src[i].x, src[i].y);
        let (u, v) = (dst[i].x, dst[i].y);
        let r = 2 * i;
        a.set_row(
            r,
            &SMatrix::<f64, 1, 8>::from_row_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]),
        );
        a.set_row(
            r + 1,
            &SMatrix::<f64, 1, 8>::from_row_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]),
        );
        b[r] = u;
        b[r + 1] = v;
    }
    let h = a.lu().solve(&b).ok_or(TouchError::DegenerateCorners)?;
    let m = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0);
    Homography::from_matrix(m).ok_or(TouchError::DegenerateCorners)
}

pub fn apply_homography(h: &Homography, p: Vec2) -> Result<Vec2, TouchError> {
    let q = h.0 * Vector3::new(p.x, p.y, 1.0);
    if q.z.abs() < 1e-12 {
        return Err(TouchError::PointAtInfinity);
    }
    Ok(Vec2::new(q.x / q.z, q.y / q.z))
}

/// Highest point of the hand (smallest y, then smallest x).
pub fn fingertip(mask: &[Vec2]) -> Result<Vec2, TouchError> {
    mask.iter()
        .copied()
        .min_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)))
        .ok_or(TouchError::EmptyMask)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    AlignX,
    AlignY,
    Select,
    Done,
}

/// Audio cue; directional cues carry a proximity band (0 = closest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TouchCue {
    Left(u8),
    Right(u8),
    Up(u8),
    Down(u8),
    Select,
    Silent,
}

impl fmt::Display for TouchCue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TouchCue::Left(l) => write!(f, "left:{l}"),
            TouchCue::Right(l) => write!(f, "right:{l}"),
            TouchCue::Up(l) => write!(f, "up:{l}"),
            TouchCue::Down(l) => write!(f, "down:{l}"),
            TouchCue::Select => f.write_str("select"),
            TouchCue::Silent => f.write_str("silent"),
        }
    }
}

/// Band of `|d|` against thresholds {tol, 3·tol, 8·tol, ∞}.
pub fn proximity_band(d: f64, tol: f64) -> u8 {
    let d = d.abs();
    if d <= tol {
        0
    } else if d <= 3.0 * tol {
        1
    } else if d <= 8.0 * tol {
        2
    } else {
        3
    }
}

/// Minimum simulated time between accepted steps (5 Hz).
pub const GUIDANCE_PERIOD: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouchGuidance {
    pub phase: Phase,
    /// Rectified target, fixed for the whole task.
    pub target: Vec2,
    pub tol: (f64, f64),
    pub last_step: Option<f64>,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub phase: Phase,
    pub cue: TouchCue,
    pub dx: f64,
    pub dy: f64,
}

impl TouchGuidance {
    pub fn new(target: Vec2, tol: (f64, f64)) -> Self {
        Self {
            phase: Phase::AlignX,
            target,
            tol,
            last_step: None,
            trace: Vec::new(),
        }
    }

    fn horizontal(&self, dx: f64) -> TouchCue {
        let band = proximity_band(dx, self.tol.0);
        if dx < 0.0 {
            TouchCue::Left(band)
        } else {
            TouchCue::Right(band)
        }
    }

    fn vertical(&self, dy: f64) -> TouchCue {
        // Screen y grows downwards: a finger below the target has dy < 0.
        let band = proximity_band(dy, self.tol.1);
        if dy < 0.0 {
            TouchCue::Up(band)
        } else {
            TouchCue::Down(band)
        }
    }

    fn align_y(&mut self, dx: f64, dy: f64) -> TouchCue {
        if dx.abs() > 2.0 * self.tol.0 {
            self.phase = Phase::AlignX;
            return self.horizontal(dx);
        }
        if dy.abs() <= self.tol.1 {
            self.phase = Phase::Select;
            return TouchCue::Select;
        }
        self.vertical(dy)
    }

    /// One guidance update. Returns `None` when the call falls inside the
    /// 0.2 s window of the previous accepted step.
    pub fn step(&mut self, finger: Vec2, t: f64) -> Option<TouchCue> {
        if self.last_step.is_some_and(|last| t - last < GUIDANCE_PERIOD - 1e-9) {
            return None;
        }
        self.last_step = Some(t);
        let dx = self.target.x - finger.x;
        let dy = self.target.y - finger.y;
        let cue = match self.phase {
            Phase::AlignX => {
                if dx.abs() <= self.tol.0 {
                    self.phase = Phase::AlignY;
                    self.align_y(dx, dy)
                } else {
                    self.horizontal(dx)
                }
            }
            Phase::AlignY => self.align_y(dx, dy),
            Phase::Select => {
                if dx.abs() > self.tol.0 {
                    self.horizontal(dx)
                } else if dy.abs() > self.tol.1 {
                    self.vertical(dy)
                } else {
                    TouchCue::Select
                }
            }
            Phase::Done => TouchCue::Silent,
        };
        self.trace.push(TraceRow {
            t,
            phase: self.phase,
            cue,
            dx,
            dy,
        });
        Some(cue)
    }

    /// Pilot confirms the selection.
    pub fn confirm(&mut self) -> bool {
        if self.phase == Phase::Select {
            self.phase = Phase::Done;
            true
        } else {
            false
        }
    }

    pub fn trace_csv(&self) -> String {
        let mut s = String::from("t,phase,cue,dx,dy\n");
        for r in &self.trace {
            let _ = writeln!(s, "{:.3},{:?},{},{:.3},{:.3}", r.t, r.phase, r.cue, r.dx, r.dy);
        }
        s
    }
}

/// Noiseless finger that moves `step` in the cued direction.
pub fn obey(finger: Vec2, cue: TouchCue, step: f64) -> Vec2 {
    match cue {
        TouchCue::Left(_) => finger - Vec2::new(step, 0.0),
        TouchCue::Right(_) => finger + Vec2::new(step, 0.0),
        TouchCue::Up(_) => finger - Vec2::new(0.0, step),
        TouchCue::Down(_) => finger + Vec2::new(0.0, step),
        TouchCue::Select | TouchCue::Silent => finger,
    }
}

/// Rectified screen layout: `cols × rows` items on a `size` millimetre screen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenGrid {
    pub size: (f64, f64),
    pub rows: usize,
    pub cols: usize,
}

impl ScreenGrid {
    pub fn cell(&self) -> (f64, f64) {
        (self.size.0 / self.cols as f64, self.size.1 / self.rows as f64)
    }

    /// Centre of the 1-based (row, col) item.
    pub fn item_center(&self, row: usize, col: usize) -> Vec2 {
        let (w, h) = self.cell();
        Vec2::new((col as f64 - 0.5) * w, (row as f64 - 0.5) * h)
    }

    /// Default tolerance: 40 % of a cell per axis.
    pub fn tolerance(&self) -> (f64, f64) {
        let (w, h) = self.cell();
        (0.4 * w, 0.4 * h)
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let (w, h) = self.size;
        [
            Vec2::new(0.0, 0.0),
            Vec2::new(w, 0.0),
            Vec2::new(w, h),
            Vec2::new(0.0, h),
        ]
    }

    /// 1-based cell under `p`, if on screen.
    pub fn cell_at(&self, p: Vec2) -> Option<(usize, usize)> {
        let (w, h) = self.cell();
        if p.x < 0.0 || p.y < 0.0 || p.x >= self.size.0 || p.y >= self.size.1 {
            return None;
        }
        Some(((p.y / h) as usize + 1, (p.x / w) as usize + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> [Vec2; 4] {
        [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn identity_and_scale() {
        let h = homography_from_corners(&unit(), &unit()).unwrap();
        assert!((h.0 - Matrix3::identity()).abs().max() < 1e-12);
        let twice = unit().map(|p| p * 2.0);
        let h = homography_from_corners(&unit(), &twice).unwrap();
        assert!((h.0 - Matrix3::from_diagonal(&Vector3::new(2.0, 2.0, 1.0))).abs().max() < 1e-12);
        assert_eq!(h.apply(Vec2::new(1.0, 1.0)).unwrap(), Vec2::new(2.0, 2.0));
        assert_eq!(
            Homography::identity().apply(Vec2::new(3.0, 4.0)).unwrap(),
            Vec2::new(3.0, 4.0)
        );
    }

    #[test]
    fn degenerate_and_infinity() {
        let bad = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 1.0),
        ];
        assert_eq!(
            homography_from_corners(&bad, &unit()),
            Err(TouchError::DegenerateCorners)
        );
        let h = Homography(Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0));
        assert_eq!(h.apply(Vec2::new(-1.0, 5.0)), Err(TouchError::PointAtInfinity));
    }

    #[test]
    fn general_quad_maps_corners() {
        let src = [
            Vec2::new(10.0, 12.0),
            Vec2::new(300.0, 40.0),
            Vec2::new(280.0, 220.0),
            Vec2::new(5.0, 190.0),
        ];
        let dst = ScreenGrid {
            size: (250.0, 150.0),
            rows: 5,
            cols: 5,
        }
        .corners();
        let h = homography_from_corners(&src, &dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            assert!(h.apply(*s).unwrap().distance(*d) < 1e-6);
        }
    }

    #[test]
    fn fingertip_rule() {
        let m = [Vec2::new(5.0, 9.0), Vec2::new(5.0, 3.0), Vec2::new(7.0, 3.0)];
        assert_eq!(fingertip(&m), Ok(Vec2::new(5.0, 3.0)));
        assert_eq!(fingertip(&[Vec2::new(1.0, 1.0)]), Ok(Vec2::new(1.0, 1.0)));
        assert_eq!(fingertip(&[]), Err(TouchError::EmptyMask));
    }

    #[test]
    fn finger_right_of_target_hears_left() {
        let mut g = TouchGuidance::new(Vec2::new(50.0, 50.0), (10.0, 10.0));
        assert!(matches!(g.step(Vec2::new(120.0, 80.0), 0.0), Some(TouchCue::Left(_))));
    }

    #[test]
    fn aligned_x_moves_to_align_y_with_up() {
        let mut g = TouchGuidance::new(Vec2::new(50.0, 50.0), (10.0, 10.0));
        assert!(matches!(g.step(Vec2::new(55.0, 90.0), 0.0), Some(TouchCue::Up(_))));
        assert_eq!(g.phase, Phase::AlignY);
    }

    #[test]
    fn rate_limit_and_regression() {
        let mut g = TouchGuidance::new(Vec2::new(50.0, 50.0), (10.0, 10.0));
        g.step(Vec2::new(55.0, 90.0), 0.0);
        assert_eq!(g.step(Vec2::new(55.0, 90.0), 0.1), None);
        // Drift of 1.5 tol stays in AlignY; beyond 2 tol regresses.
        assert!(matches!(g.step(Vec2::new(65.0, 85.0), 0.2), Some(TouchCue::Up(_))));
        assert_eq!(g.phase, Phase::AlignY);
        assert!(matches!(g.step(Vec2::new(75.0, 85.0), 0.4), Some(TouchCue::Left(_))));
        assert_eq!(g.phase, Phase::AlignX);
    }

    #[test]
    fn overshoot_cues_down_and_select_confirms() {
        let mut g = TouchGuidance::new(Vec2::new(50.0, 50.0), (10.0, 10.0));
        g.step(Vec2::new(50.0, 90.0), 0.0);
        assert!(matches!(g.step(Vec2::new(50.0, 20.0), 0.2), Some(TouchCue::Down(_))));
        assert_eq!(g.step(Vec2::new(50.0, 52.0), 0.4), Some(TouchCue::Select));
        assert!(g.confirm());
        assert_eq!(g.phase, Phase::Done);
        assert_eq!(g.step(Vec2::new(0.0, 0.0), 0.6), Some(TouchCue::Silent));
        assert!(g.trace_csv().starts_with("t,phase,cue,dx,dy\n0.000,AlignY,up:2"));
    }

    #[test]
    fn bands() {
        assert_eq!(proximity_band(5.0, 10.0), 0);
        assert_eq!(proximity_band(-25.0, 10.0), 1);
        assert_eq!(proximity_band(80.0, 10.0), 2);
        assert_eq!(proximity_band(81.0, 10.0), 3);
    }
}
