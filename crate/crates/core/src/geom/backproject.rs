//! Depth-image back-projection through the pinhole model.

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geom::{CameraView, DepthImage, PointCloud};

/// Lifts every valid depth pixel to a world-space point.
///
/// Pixel `(u, v)` with depth `d` maps to camera space
/// `((u - cx)·d/fx, (v - cy)·d/fy, d)` and then through the inverse pose.
/// The resulting cloud records `source_view = view_index` for every point.
pub fn backproject(depth: &DepthImage, cam: &CameraView, view_index: u32) -> Result<PointCloud> {
    if (depth.width, depth.height) != cam.resolution {
        return Err(Error::Dimension(format!(
            "depth {}x{} vs camera {}x{}",
            depth.width, depth.height, cam.resolution.0, cam.resolution.1
        )));
    }
    let (fx, fy, cx, cy) = cam.intrinsics;
    let mut points = Vec::with_capacity(depth.valid_count());
    for v in 0..depth.height {
        for u in 0..depth.width {
            let d = f64::from(depth.get(u, v));
            if d <= 0.0 {
                continue;
            }
            let pc = Point3::new(
                (f64::from(u) - cx) * d / fx,
                (f64::from(v) - cy) * d / fy,
                d,
            );
            points.push(cam.camera_to_world(&pc));
        }
    }
    let n = points.len();
    let mut cloud = PointCloud::from_points(points);
    cloud.source_view = Some(vec![view_index; n]);
    Ok(cloud)
}
