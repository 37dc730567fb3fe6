//! Per-point normal estimation from local PCA.

use nalgebra::{Matrix3, Point3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{KdTree3, PointCloud};

/// Estimates a unit normal per point as the smallest-eigenvalue eigenvector
/// of the covariance of its `k` nearest neighbors, sign-flipped so that
/// `dot(normal, sensor_origin - point) >= 0`.
pub fn estimate_normals(cloud: &PointCloud, k: usize, sensor_origin: Point3<f64>) -> Result<PointCloud> {
    estimate_normals_with_origins(cloud, k, |_| sensor_origin)
}

/// Like [`estimate_normals`] but with a per-point sensor origin, used when a
/// merged reconstruction carries points from several capture positions.
pub fn estimate_normals_with_origins<F>(
    cloud: &PointCloud,
    k: usize,
    origin_of: F,
) -> Result<PointCloud>
where
    F: Fn(usize) -> Point3<f64> + Sync,
{
    if k == 0 {
        return Err(Error::Parameter("neighbor count k must be >= 1".into()));
    }
    if cloud.len() < k + 1 {
        return Err(Error::DegenerateInput(format!(
            "normal estimation needs at least k+1 = {} points, got {}",
            k + 1,
            cloud.len()
        )));
    }
    let tree = KdTree3::build(&cloud.points);
    let normals: Vec<Vector3<f64>> = cloud
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            // k nearest excluding the point itself (it is its own neighbor
            // at distance 0, ties broken by index, so request k+1).
            let neighbors = tree.k_nearest(p, k + 1);
            let mut mean = Vector3::zeros();
            let mut used = 0.0;
            for &(j, _) in &neighbors {
                if j == i {
                    continue;
                }
                mean += cloud.points[j].coords;
                used += 1.0;
            }
            mean /= used;
            let mut cov = Matrix3::zeros();
            for &(j, _) in &neighbors {
                if j == i {
                    continue;
                }
                let d = cloud.points[j].coords - mean;
                cov += d * d.transpose();
            }
            let eig = cov.symmetric_eigen();
            let mut order = [0usize, 1, 2];
            order.sort_by(|&a, &b| {
                eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap()
            });
            let [lo, mid, hi] = order;
            let toward_sensor = origin_of(i) - p;
            // Collinear or fully degenerate neighborhoods leave the plane
            // normal undefined; fall back to the sensor direction.
            if eig.eigenvalues[hi] <= 0.0
                || eig.eigenvalues[mid] <= 1e-12 * eig.eigenvalues[hi]
            {
                toward_sensor
                    .try_normalize(1e-12)
                    .unwrap_or_else(Vector3::z)
            } else {
                let mut n = eig.eigenvectors.column(lo).normalize();
                if n.dot(&toward_sensor) < 0.0 {
                    n = -n;
                }
                n
            }
        })
        .collect();
    let mut out = cloud.clone();
    out.normals = Some(normals);
    Ok(out)
}
