//! Synthetic detection providers standing in for the text and box detectors.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TextDetection;
use crate::geometry::Vec2;
use crate::seeding;

/// Row-major grid of centres with uniform jitter of up to `jitter_frac`
/// of the pitch on each axis, rotated by `rotation` about the first centre.
pub fn jittered_grid(rows: usize, cols: usize, pitch: Vec2, jitter_frac: f64, rotation: f64, seed: u64) -> Vec<Vec2> {
    let mut rng = seeding::rng(seed, 0x621D);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let ideal = Vec2::new(c as f64 * pitch.x, r as f64 * pitch.y);
            let j = Vec2::new(
                rng.random_range(-jitter_frac..=jitter_frac) * pitch.x,
                rng.random_range(-jitter_frac..=jitter_frac) * pitch.y,
            );
            out.push((ideal + j).rotated(rotation));
        }
    }
    out
}

/// Replaces one character with a different upper- or lower-case letter.
pub fn corrupt_word(word: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    if chars.is_empty() {
        return String::new();
    }
    let i = rng.random_range(0..chars.len());
    let upper = chars[i].is_ascii_uppercase();
    loop {
        let c = char::from(b'a' + rng.random_range(0..26u8));
        let c = if upper { c.to_ascii_uppercase() } else { c };
        if c != chars[i] {
            chars[i] = c;
            break;
        }
    }
    chars.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoorbellSynth {
    pub pitch: Vec2,
    pub jitter_frac: f64,
    pub max_rotation_deg: f64,
    /// Probability that a name is read with one wrong character.
    pub ocr_error_rate: f64,
    /// Probability that a plate carries a second word (an initial).
    pub initial_rate: f64,
}

impl Default for DoorbellSynth {
    fn default() -> Self {
        Self {
            pitch: Vec2::new(160.0, 70.0),
            jitter_frac: 0.1,
            max_rotation_deg: 8.0,
            ocr_error_rate: 0.1,
            initial_rate: 0.5,
        }
    }
}

/// Text detections of a doorbell panel, one plate per name, row-major.
pub fn doorbell_detections(
    names: &[String],
    rows: usize,
    cols: usize,
    params: &DoorbellSynth,
    seed: u64,
) -> Vec<TextDetection> {
    let mut rng = seeding::rng(seed, 0xD00B);
    let rotation = rng.random_range(-1.0..=1.0) * params.max_rotation_deg.to_radians();
    let centres = jittered_grid(
        rows,
        cols,
        params.pitch,
        params.jitter_frac,
        rotation,
        seeding::derive(seed, 1),
    );
    let origin = Vec2::new(200.0, 150.0);
    let mut out = Vec::new();
    for (name, c) in names.iter().zip(centres) {
        let centre = origin + c;
        let text = if rng.random_bool(params.ocr_error_rate) {
            corrupt_word(name, &mut rng)
        } else {
            name.clone()
        };
        out.push(TextDetection {
            text,
            center: centre,
            size: (10.0 * name.len() as f64, 18.0),
        });
        if rng.random_bool(params.initial_rate) {
            let initial = char::from(b'A' + rng.random_range(0..26u8));
            out.push(TextDetection {
                text: format!("{initial}."),
                center: centre - Vec2::new(45.0, 0.0).rotated(rotation),
                size: (18.0, 18.0),
            });
        }
    }
    out
}

/// Product boxes on a shelf: centre and (width, height), row-major. Box
/// height is 0.95 of the row pitch; centres jitter by up to `jitter_frac`.
pub fn grocery_boxes(rows: usize, cols: usize, pitch: Vec2, jitter_frac: f64, seed: u64) -> Vec<(Vec2, (f64, f64))> {
    jittered_grid(rows, cols, pitch, jitter_frac, 0.0, seed)
        .into_iter()
        .map(|c| (c + Vec2::new(100.0, 100.0), (0.8 * pitch.x, 0.95 * pitch.y)))
        .collect()
}
