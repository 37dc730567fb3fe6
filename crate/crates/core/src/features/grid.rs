//! Feature-grid construction and pooled statistics.

use crate::error::{Error, Result};
use crate::geom::{CameraView, PointCloud};
use crate::render::project_points;

/// Channels per grid pixel: normal x/y/z, visibility count, depth.
pub const CHANNELS: usize = 5;

/// A G×G×5 grid in row-major pixel order with channels innermost. Empty
/// pixels carry all-zero channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    pub res: u32,
    pub data: Vec<f32>,
    pub empty_mask: Vec<bool>,
}

impl FeatureGrid {
    #[inline]
    pub fn channel(&self, u: u32, v: u32, c: usize) -> f32 {
        self.data[(v as usize * self.res as usize + u as usize) * CHANNELS + c]
    }

    pub fn is_empty_at(&self, u: u32, v: u32) -> bool {
        self.empty_mask[v as usize * self.res as usize + u as usize]
    }

    pub fn empty_count(&self) -> u64 {
        self.empty_mask.iter().filter(|&&e| e).count() as u64
    }
}

/// Pooled means or variances at half resolution, same channel layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledGrid {
    pub res: u32,
    pub data: Vec<f32>,
}

impl PooledGrid {
    #[inline]
    pub fn channel(&self, u: u32, v: u32, c: usize) -> f32 {
        self.data[(v as usize * self.res as usize + u as usize) * CHANNELS + c]
    }
}

/// Projects an enriched cloud (normals + visibility required) into the
/// candidate camera at `grid_res`, storing the winning point's features at
/// every covered pixel.
pub fn build_feature_grid(
    cloud: &PointCloud,
    cam: &CameraView,
    grid_res: u32,
    radius_px: f64,
) -> Result<FeatureGrid> {
    if grid_res < 16 {
        return Err(Error::Parameter(format!(
            "grid_res {grid_res} below minimum 16"
        )));
    }
    let normals = cloud
        .normals
        .as_ref()
        .ok_or_else(|| Error::Parameter("feature grid needs normals".into()))?;
    let visibility = cloud
        .visibility
        .as_ref()
        .ok_or_else(|| Error::Parameter("feature grid needs visibility counts".into()))?;
    let grid_cam = cam.with_resolution(grid_res, grid_res);
    let map = project_points(cloud, &grid_cam, radius_px);
    let n = grid_res as usize * grid_res as usize;
    let mut data = vec![0.0f32; n * CHANNELS];
    let mut empty_mask = vec![true; n];
    for (u, v, point, depth) in map.iter_pixels() {
        if let Some(i) = point {
            let slot = (v as usize * grid_res as usize + u as usize) * CHANNELS;
            data[slot] = normals[i].x as f32;
            data[slot + 1] = normals[i].y as f32;
            data[slot + 2] = normals[i].z as f32;
            data[slot + 3] = visibility[i] as f32;
            data[slot + 4] = depth;
            empty_mask[v as usize * grid_res as usize + u as usize] = false;
        }
    }
    Ok(FeatureGrid {
        res: grid_res,
        data,
        empty_mask,
    })
}

/// 2×2 pooling over non-empty contributors: per-cell per-channel mean and
/// population variance. Cells whose four pixels are all empty yield zeros
/// in both outputs.
pub fn pool_with_variance(grid: &FeatureGrid) -> Result<(PooledGrid, PooledGrid)> {
    if grid.res % 2 != 0 {
        return Err(Error::Parameter(format!(
            "pooling needs an even grid resolution, got {}",
            grid.res
        )));
    }
    let half = grid.res / 2;
    let n = half as usize * half as usize;
    let mut mean = vec![0.0f32; n * CHANNELS];
    let mut var = vec![0.0f32; n * CHANNELS];
    for v in 0..half {
        for u in 0..half {
            let mut vals: [[f64; 4]; CHANNELS] = [[0.0; 4]; CHANNELS];
            let mut count = 0usize;
            for (dv, du) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let (su, sv) = (2 * u + du, 2 * v + dv);
                if grid.is_empty_at(su, sv) {
                    continue;
                }
                for c in 0..CHANNELS {
                    vals[c][count] = f64::from(grid.channel(su, sv, c));
                }
                count += 1;
            }
            if count == 0 {
                continue;
            }
            let slot = (v as usize * half as usize + u as usize) * CHANNELS;
            for c in 0..CHANNELS {
                let m = vals[c][..count].iter().sum::<f64>() / count as f64;
                let ss = vals[c][..count]
                    .iter()
                    .map(|x| (x - m) * (x - m))
                    .sum::<f64>()
                    / count as f64;
                mean[slot + c] = m as f32;
                var[slot + c] = ss as f32;
            }
        }
    }
    Ok((
        PooledGrid {
            res: half,
            data: mean,
        },
        PooledGrid {
            res: half,
            data: var,
        },
    ))
}
