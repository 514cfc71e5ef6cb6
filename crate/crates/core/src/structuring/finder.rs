use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::StructuringError;
use crate::geometry::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Side of the overview image holding the target; 0.5 counts as Right.
pub fn finder_side(objects: &[(String, f64)], target: &str) -> Result<Side, StructuringError> {
    let mut hits = objects.iter().filter(|(label, _)| label == target);
    let (_, x) = hits.next().ok_or(StructuringError::TargetMissing)?;
    if hits.next().is_some() {
        return Err(StructuringError::TargetDuplicated);
    }
    Ok(if *x < 0.5 { Side::Left } else { Side::Right })
}

/// Angular misalignment quantized into `levels` bands, 0 when aligned.
pub fn finder_proximity(pointing_dir: f64, target_dir: f64, levels: usize) -> usize {
    let off = wrap_angle(target_dir - pointing_dir).abs();
    ((off / PI * levels as f64).floor() as usize).min(levels.saturating_sub(1))
}
