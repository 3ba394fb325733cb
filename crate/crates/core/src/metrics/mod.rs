//! Surface-to-surface distances between two meshes.
//!
//! The directed Hausdorff distance from X1 to X2 is the largest, over the
//! vertices x of X1, of the distance from x to the nearest vertex of X2.
//! Distances are vertex-to-vertex; triangles play no part.

mod kdtree;

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::TriangleMesh;

pub use kdtree::{squared_distance, KdTree};

/// Per-vertex distances from a source mesh to a target mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    /// `"<source>-><target>"`.
    pub direction: String,
    /// Distance (mm) from each source vertex to the nearest target vertex,
    /// in source vertex order.
    pub per_vertex: Vec<f64>,
    pub hausdorff: f64,
    pub mean: f64,
    pub p50: f64,
    pub p95: f64,
    pub p99: f64,
}

/// Machine-readable summary written next to the per-vertex CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub direction: String,
    pub hausdorff_mm: f64,
    pub mean_mm: f64,
    pub p50_mm: f64,
    pub p95_mm: f64,
    pub p99_mm: f64,
    pub vertex_count: usize,
}

impl DistanceReport {
    fn from_distances(direction: String, per_vertex: Vec<f64>) -> Self {
        let mut sorted = per_vertex.clone();
        sorted.sort_by(f64::total_cmp);
        let hausdorff = *sorted.last().expect("non-empty");
        let sum: f64 = per_vertex.iter().sum();
        // Rounding in the sum must not push the mean past the maximum.
        let mean = (sum / per_vertex.len() as f64).min(hausdorff);
        Self {
            direction,
            hausdorff,
            mean,
            p50: nearest_rank(&sorted, 50.0),
            p95: nearest_rank(&sorted, 95.0),
            p99: nearest_rank(&sorted, 99.0),
            per_vertex,
        }
    }

    pub fn with_direction(mut self, source: &str, target: &str) -> Self {
        self.direction = format!("{source}->{target}");
        self
    }

    pub fn summary(&self) -> DistanceSummary {
        DistanceSummary {
            direction: self.direction.clone(),
            hausdorff_mm: self.hausdorff,
            mean_mm: self.mean,
            p50_mm: self.p50,
            p95_mm: self.p95,
            p99_mm: self.p99,
            vertex_count: self.per_vertex.len(),
        }
    }
}

/// Nearest-rank percentile of ascending `sorted` values.
pub fn nearest_rank(sorted: &[f64], percent: f64) -> f64 {
    let n = sorted.len();
    let rank = ((percent / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Distance from each source point to its nearest target point.
pub fn nearest_distances(sources: &[[f64; 3]], targets: &[[f64; 3]]) -> Result<Vec<f64>> {
    if sources.is_empty() || targets.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let tree = KdTree::new(targets);
    Ok(sources
        .par_iter()
        .map(|&p| tree.nearest_squared(p).expect("tree is not empty").sqrt())
        .collect())
}

/// Directed Hausdorff report between two point sets.
pub fn directed_hausdorff_points(x1: &[[f64; 3]], x2: &[[f64; 3]]) -> Result<DistanceReport> {
    let d = nearest_distances(x1, x2)?;
    Ok(DistanceReport::from_distances("X1->X2".into(), d))
}

/// Directed Hausdorff report from the vertices of `x1` to those of `x2`.
pub fn directed_hausdorff(x1: &TriangleMesh, x2: &TriangleMesh) -> Result<DistanceReport> {
    directed_hausdorff_points(&x1.vertices, &x2.vertices)
}

/// Larger of the two directed Hausdorff distances.
pub fn symmetric_hausdorff(x1: &TriangleMesh, x2: &TriangleMesh) -> Result<f64> {
    let ab = directed_hausdorff(x1, x2)?.hausdorff;
    let ba = directed_hausdorff(x2, x1)?.hausdorff;
    Ok(ab.max(ba))
}

/// Writes `vertex_index,distance_mm` rows to `csv_path` and the summary to
/// the same path with a `.json` extension.
pub fn export_per_vertex_scalars(report: &DistanceReport, csv_path: impl AsRef<Path>) -> Result<()> {
    let csv_path = csv_path.as_ref();
    let mut csv = String::with_capacity(report.per_vertex.len() * 16 + 32);
    csv.push_str("vertex_index,distance_mm\n");
    for (i, d) in report.per_vertex.iter().enumerate() {
        csv.push_str(&format!("{i},{d}\n"));
    }
    fs::write(csv_path, csv).map_err(|e| Error::io(csv_path, e))?;

    let json_path = csv_path.with_extension("json");
    let mut text = serde_json::to_string_pretty(&report.summary()).expect("summary serializes");
    text.push('\n');
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))
}
