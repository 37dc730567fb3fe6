//! Geometric featurization of a reconstruction for a candidate view.
//!
//! An enriched reconstruction (normals + visibility counts) is splatted into
//! the candidate camera at `grid_res`, giving a G×G×5 feature grid (normal
//! x/y/z, visibility, depth). The grid is 2×2 average-pooled with per-cell
//! variances, and the empty pixels are split into "inside the convex hull of
//! observed pixels" (holes) versus "outside" (unexplored frontier).

mod grid;
mod hull;
mod pgm;

pub use grid::{build_feature_grid, pool_with_variance, FeatureGrid, PooledGrid, CHANNELS};
pub use hull::f_empty;
pub use pgm::write_channel_pgm;

use crate::error::{Error, Result};
use crate::geom::{CameraView, PointCloud};

/// Featurization knobs shared by training and inference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureParams {
    /// Unpooled grid resolution G (the pooled grids are G/2).
    pub grid_res: u32,
    /// Splat radius in pixels at a 128-wide grid; scaled linearly with
    /// `grid_res`.
    pub radius_px_at_128: f64,
}

impl FeatureParams {
    pub fn radius_px(&self) -> f64 {
        self.radius_px_at_128 * f64::from(self.grid_res) / 128.0
    }

    pub fn pooled_res(&self) -> u32 {
        self.grid_res / 2
    }
}

/// Per-candidate input to the view scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    /// Pooled feature means, (G/2)×(G/2)×5.
    pub f_p: PooledGrid,
    /// Pooled per-cell variances, (G/2)×(G/2)×5.
    pub f_v: PooledGrid,
    /// Empty pixels (inside hull, outside hull) of the unpooled grid.
    pub f_empty: (u64, u64),
    /// Number of base views captured so far.
    pub f_base: u32,
    /// Unpooled grid resolution the counts refer to.
    pub grid_res: u32,
}

/// Composes grid building, pooling, and the hull statistics for one
/// candidate view against an immutable reconstruction snapshot.
pub fn make_bundle(
    recon: &PointCloud,
    n_base_views: usize,
    cam_q: &CameraView,
    params: &FeatureParams,
) -> Result<FeatureBundle> {
    if recon.is_empty() {
        return Err(Error::DegenerateInput(
            "featurizing an empty reconstruction".into(),
        ));
    }
    if n_base_views == 0 {
        return Err(Error::Parameter("bundle needs at least one base view".into()));
    }
    let grid = build_feature_grid(recon, cam_q, params.grid_res, params.radius_px())?;
    let (f_p, f_v) = pool_with_variance(&grid)?;
    let f_empty = f_empty(&grid);
    Ok(FeatureBundle {
        f_p,
        f_v,
        f_empty,
        f_base: n_base_views as u32,
        grid_res: params.grid_res,
    })
}
