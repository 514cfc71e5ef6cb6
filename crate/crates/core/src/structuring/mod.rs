//! Turning text and box detections into grid positions and matches.

mod clustering;
mod finder;
mod grocery;
pub mod synth;
mod text;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

pub use clustering::{
    assign_rows_cols, cluster_detections, dbscan_1d, kmeans_1d, rectify_centers, Cluster, DbscanLabel,
};
pub use finder::{finder_proximity, finder_side, Side};
pub use grocery::{grocery_grid, GroceryParams};
pub use text::{levenshtein, match_keywords, match_name};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextDetection {
    pub text: String,
    /// Box centre in pixels, y down.
    pub center: Vec2,
    pub size: (f64, f64),
}

/// 1-based row (from top) and column (from left).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
}

impl GridCell {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuringError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("k-means left an empty cluster on the {axis} axis")]
    ClusterCollapse { axis: &'static str },
    #[error("boxes {0:?} were labelled noise")]
    NoiseBox(Vec<usize>),
    #[error("target not present")]
    TargetMissing,
    #[error("target present more than once")]
    TargetDuplicated,
}
