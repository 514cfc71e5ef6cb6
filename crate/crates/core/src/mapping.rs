//! Flat 2D occupancy grid and costmap inflation.
//!
//! Cell values: 0 free, 255 occupied, 254 within the robot radius of an
//! occupied cell, and a linear ramp from 253 down to 0 across the decay band.

use std::fmt::Write as _;

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::RectBoundary;
use crate::geometry::Vec2;

pub const FREE: u8 = 0;
pub const OCCUPIED: u8 = 255;
pub const INSCRIBED: u8 = 254;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("invalid grid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("malformed grid dump: {0}")]
    Parse(String),
}

/// Row-major grid; cell `(col, row)` covers
/// `[origin.x + col·res, origin.x + (col+1)·res) × [origin.y + row·res, …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    origin: Vec2,
    resolution: f64,
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

/// Inflated grids share the occupancy grid representation.
pub type Costmap = OccupancyGrid;

impl OccupancyGrid {
    pub fn new(origin: Vec2, resolution: f64, width: usize, height: usize) -> Result<Self, GridError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(GridError::InvalidGeometry("resolution must be positive"));
        }
        if width == 0 || height == 0 {
            return Err(GridError::InvalidGeometry("grid must have at least one cell"));
        }
        if !origin.is_finite() {
            return Err(GridError::InvalidGeometry("origin must be finite"));
        }
        Ok(Self {
            origin,
            resolution,
            width,
            height,
            cells: vec![FREE; width * height],
        })
    }

    /// Smallest grid at `resolution` covering the axis-aligned box
    /// `[min, max]`.
    pub fn covering(min: Vec2, max: Vec2, resolution: f64) -> Result<Self, GridError> {
        let width = ((max.x - min.x) / resolution).ceil().max(1.0) as usize;
        let height = ((max.y - min.y) / resolution).ceil().max(1.0) as usize;
        Self::new(min, resolution, width, height)
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.cells[self.index(col, row)]
    }

    pub fn set(&mut self, col: usize, row: usize, value: u8) {
        let i = self.index(col, row);
        self.cells[i] = value;
    }

    pub fn value_at_index(&self, index: usize) -> u8 {
        self.cells[index]
    }

    /// Cell containing `p`, or `None` outside the grid.
    pub fn world_to_cell(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (col as f64 + 0.5) * self.resolution,
            self.origin.y + (row as f64 + 0.5) * self.resolution,
        )
    }

    /// Value at world point `p`; out-of-grid reads as free.
    pub fn value_at(&self, p: Vec2) -> u8 {
        self.world_to_cell(p).map_or(FREE, |(c, r)| self.get(c, r))
    }

    pub fn occupied_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == OCCUPIED)
            .map(|(i, _)| i)
    }

    /// Marks every cell containing at least one point as occupied.
    pub fn integrate_points(&mut self, points: &[Vec2]) {
        let mut ignored = 0usize;
        for p in points {
            match self.world_to_cell(*p) {
                Some((c, r)) => self.set(c, r, OCCUPIED),
                None => ignored += 1,
            }
        }
        if ignored > 0 {
            debug!("integrate_points: ignored {ignored} points outside the grid");
        }
    }

    /// Resets cells whose centres lie outside `rect` to free.
    pub fn crop_to_boundary(&mut self, rect: &RectBoundary) {
        for row in 0..self.height {
            for col in 0..self.width {
                if !rect.contains(self.cell_center(col, row)) {
                    self.set(col, row, FREE);
                }
            }
        }
    }

    /// Inflated costmap. Original occupied cells stay 255; cells within
    /// `robot_radius` of one become 254; beyond that the cost falls linearly
    /// from 253 to 0 over `decay_width`.
    pub fn inflate(&self, robot_radius: f64, decay_width: f64) -> Costmap {
        let sq = squared_distance_transform(self);
        let res = self.resolution;
        let mut out = self.clone();
        for (i, v) in out.cells.iter_mut().enumerate() {
            if *v == OCCUPIED {
                continue;
            }
            let d2 = sq[i];
            *v = if d2.is_infinite() {
                FREE
            } else {
                inflation_cost(d2.sqrt() * res, robot_radius, decay_width, res)
            };
        }
        out
    }

    /// Text dump: `P2`, then `width height resolution origin_x origin_y`,
    /// then one line of values per row, row 0 first.
    pub fn to_pgm_text(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() * 4 + 64);
        s.push_str("P2\n");
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            self.width, self.height, self.resolution, self.origin.x, self.origin.y
        );
        for row in self.cells.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_pgm_text(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("P2") {
            return Err(GridError::Parse("missing P2 magic".into()));
        }
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| GridError::Parse("missing header".into()))?
            .split_whitespace()
            .collect();
        if header.len() != 5 {
            return Err(GridError::Parse(format!(
                "expected 5 header fields, got {}",
                header.len()
            )));
        }
        let parse_err = |what: &str| GridError::Parse(format!("bad {what}"));
        let width: usize = header[0].parse().map_err(|_| parse_err("width"))?;
        let height: usize = header[1].parse().map_err(|_| parse_err("height"))?;
        let resolution: f64 = header[2].parse().map_err(|_| parse_err("resolution"))?;
        let ox: f64 = header[3].parse().map_err(|_| parse_err("origin_x"))?;
        let oy: f64 = header[4].parse().map_err(|_| parse_err("origin_y"))?;
        let mut grid = Self::new(Vec2::new(ox, oy), resolution, width, height)?;
        let values: Vec<u8> = lines
            .flat_map(str::split_whitespace)
            .map(|t| t.parse::<u8>().map_err(|_| parse_err("cell value")))
            .collect::<Result<_, _>>()?;
        if values.len() != width * height {
            return Err(GridError::Parse(format!(
                "expected {} cell values, got {}",
                width * height,
                values.len()
            )));
        }
        grid.cells = values;
        Ok(grid)
    }
}

/// Cost of a free cell whose centre is `distance` metres from the nearest
/// occupied cell centre.
pub fn inflation_cost(distance: f64, robot_radius: f64, decay_width: f64, resolution: f64) -> u8 {
    // Half a micro-cell of slack so exact lattice distances land inside.
    let eps = resolution * 1e-9;
    if distance <= robot_radius + eps {
        INSCRIBED
    } else if decay_width > 0.0 && distance < robot_radius + decay_width {
        let t = (distance - robot_radius) / decay_width;
        (253.0 * (1.0 - t)).ceil().clamp(0.0, 253.0) as u8
    } else {
        FREE
    }
}

/// Exact squared Euclidean distance (in cells) from every cell centre to
/// the nearest occupied cell centre; two-pass lower-envelope transform.
fn squared_distance_transform(grid: &OccupancyGrid) -> Vec<f64> {
    let (w, h) = (grid.width, grid.height);
    let mut field: Vec<f64> = grid
        .cells
        .iter()
        .map(|&v| if v == OCCUPIED { 0.0 } else { f64::INFINITY })
        .collect();

    let mut buf_in = vec![0.0; w.max(h)];
    let mut buf_out = vec![0.0; w.max(h)];
    let mut v = vec![0usize; w.max(h)];
    let mut z = vec![0.0; w.max(h) + 1];

    for col in 0..w {
        for row in 0..h {
            buf_in[row] = field[row * w + col];
        }
        envelope_1d(&buf_in[..h], &mut buf_out[..h], &mut v, &mut z);
        for row in 0..h {
            field[row * w + col] = buf_out[row];
        }
    }
    for row in 0..h {
        buf_in[..w].copy_from_slice(&field[row * w..(row + 1) * w]);
        envelope_1d(&buf_in[..w], &mut buf_out[..w], &mut v, &mut z);
        field[row * w..(row + 1) * w].copy_from_slice(&buf_out[..w]);
    }
    field
}

fn envelope_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let finite: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if finite.is_empty() {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    }
    let mut k = 0usize;
    v[0] = finite[0];
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let intersect =
        |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    for &q in &finite[1..] {
        let mut s = intersect(q, v[k]);
        // z[0] is -inf, so this stops at k == 0.
        while s <= z[k] {
            k -= 1;
            s = intersect(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0usize;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        *out = dq * dq + f[p];
    }
}
