//! Reconstruction-quality metrics against a ground-truth cloud.

use crate::error::{Error, Result};
use crate::geom::{KdTree3, PointCloud};

/// Symmetric Chamfer distance in meters:
/// `½·(mean_a min_b |a-b| + mean_b min_a |a-b|)`.
///
/// Both directions are summed in point-index order, so swapping the
/// arguments reproduces the exact same value.
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateInput(
            "chamfer distance of an empty cloud".into(),
        ));
    }
    let tree_a = KdTree3::build(&a.points);
    let tree_b = KdTree3::build(&b.points);
    Ok(chamfer_with_trees(a, &tree_a, b, &tree_b))
}

/// Chamfer distance reusing prebuilt trees (`tree_a` over `a`, `tree_b`
/// over `b`); the greedy oracle calls this in a loop with a fixed
/// ground-truth side.
pub fn chamfer_with_trees(a: &PointCloud, tree_a: &KdTree3, b: &PointCloud, tree_b: &KdTree3) -> f64 {
    let sum_ab: f64 = a.points.iter().map(|p| tree_b.nearest_distance(p)).sum();
    let sum_ba: f64 = b.points.iter().map(|p| tree_a.nearest_distance(p)).sum();
    0.5 * (sum_ab / a.len() as f64 + sum_ba / b.len() as f64)
}

/// One-directional mean distance plumbing for callers that already hold a
/// tree over the ground truth and a tree over the reconstruction.
pub fn chamfer_points(
    recon: &[nalgebra::Point3<f64>],
    recon_tree: &KdTree3,
    gt: &[nalgebra::Point3<f64>],
    gt_tree: &KdTree3,
) -> f64 {
    let sum_rg: f64 = recon.iter().map(|p| gt_tree.nearest_distance(p)).sum();
    let sum_gr: f64 = gt.iter().map(|p| recon_tree.nearest_distance(p)).sum();
    0.5 * (sum_rg / recon.len() as f64 + sum_gr / gt.len() as f64)
}

/// Percentage of ground-truth points within `tau` of the reconstruction.
/// An empty reconstruction covers nothing.
pub fn coverage_pct(recon: &PointCloud, gt: &PointCloud, tau: f64) -> Result<f64> {
    if gt.is_empty() {
        return Err(Error::DegenerateInput("coverage with empty ground truth".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!("tau {tau} must be > 0")));
    }
    if recon.is_empty() {
        return Ok(0.0);
    }
    let tree = KdTree3::build(&recon.points);
    let covered = gt
        .points
        .iter()
        .filter(|g| tree.nearest_distance(g) <= tau)
        .count();
    Ok(100.0 * covered as f64 / gt.len() as f64)
}

/// F1 score at threshold `tau`: harmonic mean of precision (reconstruction
/// points near ground truth) and recall (ground truth points near the
/// reconstruction). Returns 0 when both are 0.
pub fn f1_score(recon: &PointCloud, gt: &PointCloud, tau: f64) -> Result<f64> {
    if recon.is_empty() || gt.is_empty() {
        return Err(Error::DegenerateInput("f1 of an empty cloud".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!("tau {tau} must be > 0")));
    }
    let tree_r = KdTree3::build(&recon.points);
    let tree_g = KdTree3::build(&gt.points);
    let precision = recon
        .points
        .iter()
        .filter(|p| tree_g.nearest_distance(p) <= tau)
        .count() as f64
        / recon.len() as f64;
    let recall = gt
        .points
        .iter()
        .filter(|g| tree_r.nearest_distance(g) <= tau)
        .count() as f64
        / gt.len() as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}
