use serde::{Deserialize, Serialize};

use super::{dbscan_1d, DbscanLabel, GridCell, StructuringError};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroceryParams {
    /// DBSCAN radius as a multiple of the median box height.
    pub row_eps_factor: f64,
    pub min_pts: usize,
}

impl Default for GroceryParams {
    fn default() -> Self {
        Self {
            row_eps_factor: 0.5,
            min_pts: 1,
        }
    }
}

/// Shelf position of every box: rows from DBSCAN on centre y (top first),
/// columns from the x order within each row.
pub fn grocery_grid(boxes: &[(Vec2, (f64, f64))], params: &GroceryParams) -> Result<Vec<GridCell>, StructuringError> {
    if boxes.is_empty() {
        return Err(StructuringError::DegenerateInput("no boxes"));
    }
    let mut heights: Vec<f64> = boxes.iter().map(|b| b.1 .1).collect();
    heights.sort_by(f64::total_cmp);
    let n = heights.len();
    let median = if n % 2 == 1 {
        heights[n / 2]
    } else {
        (heights[n / 2 - 1] + heights[n / 2]) / 2.0
    };
    let ys: Vec<f64> = boxes.iter().map(|b| b.0.y).collect();
    let labels = dbscan_1d(&ys, median * params.row_eps_factor, params.min_pts);
    let noise: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == DbscanLabel::Noise)
        .map(|(i, _)| i)
        .collect();
    if !noise.is_empty() {
        return Err(StructuringError::NoiseBox(noise));
    }
    let ids: Vec<usize> = labels.iter().map(|l| l.id() as usize).collect();
    let clusters = ids.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); clusters];
    for (i, &c) in ids.iter().enumerate() {
        members[c].push(i);
    }
    let mean_y = |m: &Vec<usize>| m.iter().map(|&i| ys[i]).sum::<f64>() / m.len() as f64;
    let mut order: Vec<usize> = (0..clusters).collect();
    order.sort_by(|&a, &b| mean_y(&members[a]).total_cmp(&mean_y(&members[b])));
    let mut cells = vec![GridCell::new(0, 0); boxes.len()];
    for (row, &c) in order.iter().enumerate() {
        let mut row_members = members[c].clone();
        row_members.sort_by(|&a, &b| boxes[a].0.x.total_cmp(&boxes[b].0.x).then(a.cmp(&b)));
        for (col, &i) in row_members.iter().enumerate() {
            cells[i] = GridCell::new(row + 1, col + 1);
        }
    }
    Ok(cells)
}
