//! Deterministic reconstruction rebuild from a set of captured views.

use nalgebra::Point3;

use crate::error::Result;
use crate::geom::{
    backproject, estimate_normals_with_origins, CameraView, DepthImage, PointCloud,
    VoxelAccumulator,
};
use crate::render::visibility_counts;

/// Fixed reconstruction recipe: back-project every capture, merge into a
/// voxel grid, then enrich the centroids with PCA normals (oriented toward
/// each point's capturing camera) and per-view visibility counts.
///
/// View sets have set semantics: a view whose pose and intrinsics are
/// bit-identical to an earlier one contributes nothing, so re-capturing a
/// base view reproduces the reconstruction exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconPipeline {
    /// Voxel edge length in meters.
    pub voxel_size: f64,
    /// Neighbor count for normal estimation.
    pub normals_k: usize,
    /// Splat radius (pixels) for visibility projection at capture resolution.
    pub radius_px: f64,
}

impl ReconPipeline {
    /// Drops views that bit-duplicate an earlier entry.
    pub fn dedup_views<'a>(
        views: &'a [(CameraView, DepthImage)],
    ) -> Vec<&'a (CameraView, DepthImage)> {
        let mut kept: Vec<&(CameraView, DepthImage)> = Vec::with_capacity(views.len());
        for view in views {
            if !kept.iter().any(|(c, _)| c.bit_eq(&view.0)) {
                kept.push(view);
            }
        }
        kept
    }

    /// Merged voxel accumulator over the (deduplicated) captures. The
    /// accumulator can be cloned and extended with one more candidate view,
    /// which is how the oracle scores candidates without re-merging the
    /// base set.
    pub fn accumulate(&self, views: &[(CameraView, DepthImage)]) -> Result<VoxelAccumulator> {
        let mut acc = VoxelAccumulator::new(self.voxel_size)?;
        for (i, (cam, depth)) in Self::dedup_views(views).iter().enumerate() {
            let cloud = backproject(depth, cam, i as u32)?;
            acc.insert_cloud(&cloud);
        }
        Ok(acc)
    }

    /// Positions-only rebuild (the Chamfer side of the oracle needs no
    /// attributes).
    pub fn rebuild_positions(&self, views: &[(CameraView, DepthImage)]) -> Result<Vec<Point3<f64>>> {
        Ok(self.accumulate(views)?.positions())
    }

    /// Full enriched rebuild: voxel centroids with unit normals and
    /// visibility counts.
    pub fn rebuild(&self, views: &[(CameraView, DepthImage)]) -> Result<PointCloud> {
        let kept = Self::dedup_views(views);
        let mut acc = VoxelAccumulator::new(self.voxel_size)?;
        for (i, (cam, depth)) in kept.iter().enumerate() {
            let cloud = backproject(depth, cam, i as u32)?;
            acc.insert_cloud(&cloud);
        }
        let down = acc.finish();
        let origins: Vec<Point3<f64>> = kept.iter().map(|(cam, _)| cam.position()).collect();
        let n = down.len();
        let mut enriched = if n >= 3 {
            // Cap the neighborhood for tiny clouds rather than failing.
            let k = self.normals_k.min(n - 1);
            let sources = down.source_view.clone().unwrap_or_else(|| vec![0; n]);
            estimate_normals_with_origins(&down, k, |i| {
                origins[sources[i] as usize % origins.len()]
            })?
        } else {
            // Too small for PCA: orient every point at its camera.
            let sources = down.source_view.clone().unwrap_or_else(|| vec![0; n]);
            let mut c = down.clone();
            c.normals = Some(
                down.points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        (origins[sources[i] as usize % origins.len()] - p)
                            .try_normalize(1e-12)
                            .unwrap_or_else(nalgebra::Vector3::z)
                    })
                    .collect(),
            );
            c
        };
        let cams: Vec<CameraView> = kept.iter().map(|(cam, _)| cam.clone()).collect();
        enriched.visibility = Some(visibility_counts(&enriched, &cams, self.radius_px));
        Ok(enriched)
    }
}
