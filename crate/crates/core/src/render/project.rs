//! Point-cloud splatting with a pixel-to-point map.

use rayon::prelude::*;

use crate::geom::{CameraView, PointCloud};

/// Result of z-buffered point projection: for every pixel, the index of the
/// winning point (nearest camera-space z) and its depth. At most one point
/// per pixel.
#[derive(Debug, Clone)]
pub struct ProjectionMap {
    pub width: u32,
    pub height: u32,
    /// `u32::MAX` encodes an empty pixel.
    pixel_to_point: Vec<u32>,
    depth_at_pixel: Vec<f32>,
}

const EMPTY: u32 = u32::MAX;

impl ProjectionMap {
    pub fn new_empty(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        ProjectionMap {
            width,
            height,
            pixel_to_point: vec![EMPTY; n],
            depth_at_pixel: vec![0.0; n],
        }
    }

    #[inline]
    pub fn point_at(&self, u: u32, v: u32) -> Option<usize> {
        let raw = self.pixel_to_point[v as usize * self.width as usize + u as usize];
        (raw != EMPTY).then_some(raw as usize)
    }

    #[inline]
    pub fn depth_at(&self, u: u32, v: u32) -> f32 {
        self.depth_at_pixel[v as usize * self.width as usize + u as usize]
    }

    pub fn non_empty_count(&self) -> usize {
        self.pixel_to_point.iter().filter(|&&p| p != EMPTY).count()
    }

    pub fn iter_pixels(&self) -> impl Iterator<Item = (u32, u32, Option<usize>, f32)> + '_ {
        let w = self.width;
        self.pixel_to_point
            .iter()
            .zip(&self.depth_at_pixel)
            .enumerate()
            .map(move |(i, (&p, &d))| {
                let u = (i as u32) % w;
                let v = (i as u32) / w;
                (u, v, (p != EMPTY).then_some(p as usize), d)
            })
    }
}

/// Splats every cloud point as a disk of `radius_px` pixels; per pixel the
/// point with the smallest camera-space depth wins (ties broken by lower
/// point index). Points behind the camera or whose projected center rounds
/// outside the image are ignored.
pub fn project_points(cloud: &PointCloud, cam: &CameraView, radius_px: f64) -> ProjectionMap {
    let (w, h) = cam.resolution;
    let mut map = ProjectionMap::new_empty(w, h);
    let (fw, fh) = (f64::from(w), f64::from(h));
    for (idx, p) in cloud.points.iter().enumerate() {
        let Some((u, v, z)) = cam.project(p) else {
            continue;
        };
        let (cu, cv) = (u.round(), v.round());
        if cu < 0.0 || cu >= fw || cv < 0.0 || cv >= fh {
            continue;
        }
        let r = radius_px;
        let lo_u = ((u - r).ceil().max(0.0)) as u32;
        let hi_u = ((u + r).floor().min(fw - 1.0)) as u32;
        let lo_v = ((v - r).ceil().max(0.0)) as u32;
        let hi_v = ((v + r).floor().min(fh - 1.0)) as u32;
        let r2 = r * r;
        let zf = z as f32;
        for pv in lo_v..=hi_v {
            for pu in lo_u..=hi_u {
                let du = f64::from(pu) - u;
                let dv = f64::from(pv) - v;
                if du * du + dv * dv > r2 {
                    continue;
                }
                let slot = pv as usize * w as usize + pu as usize;
                let cur = map.pixel_to_point[slot];
                if cur == EMPTY
                    || zf < map.depth_at_pixel[slot]
                    || (zf == map.depth_at_pixel[slot] && (idx as u32) < cur)
                {
                    map.pixel_to_point[slot] = idx as u32;
                    map.depth_at_pixel[slot] = zf;
                }
            }
        }
    }
    map
}

/// Number of base views in which each point wins at least one pixel.
/// Projections run in parallel across cameras; each per-view map is built
/// single-threaded.
pub fn visibility_counts(cloud: &PointCloud, base_cams: &[CameraView], radius_px: f64) -> Vec<u32> {
    let maps: Vec<ProjectionMap> = base_cams
        .par_iter()
        .map(|cam| project_points(cloud, cam, radius_px))
        .collect();
    let mut counts = vec![0u32; cloud.len()];
    let mut seen = vec![false; cloud.len()];
    for map in &maps {
        seen.fill(false);
        for (_, _, point, _) in map.iter_pixels() {
            if let Some(i) = point {
                seen[i] = true;
            }
        }
        for (c, s) in counts.iter_mut().zip(&seen) {
            *c += u32::from(*s);
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Point3, Vector3};

    fn forward_cam(w: u32, h: u32) -> CameraView {
        CameraView {
            intrinsics: CameraView::intrinsics_from_fov(w, h, 60.0),
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
            resolution: (w, h),
        }
    }

    #[test]
    fn empty_cloud_projects_to_nothing() {
        let map = project_points(&PointCloud::default(), &forward_cam(16, 16), 1.0);
        assert_eq!(map.non_empty_count(), 0);
    }

    #[test]
    fn behind_camera_point_is_ignored() {
        let cloud = PointCloud::from_points(vec![Point3::new(0.0, 0.0, -2.0)]);
        let map = project_points(&cloud, &forward_cam(16, 16), 1.0);
        assert_eq!(map.non_empty_count(), 0);
    }

    #[test]
    fn nearer_point_wins_the_shared_ray() {
        let cloud = PointCloud::from_points(vec![
            Point3::new(0.1, 0.1, 2.0),
            Point3::new(0.05, 0.05, 1.0), // same ray, half depth
        ]);
        let cam = forward_cam(33, 33);
        let map = project_points(&cloud, &cam, 1.0);
        let (u, v, _) = cam.project(&cloud.points[1]).unwrap();
        let winner = map.point_at(u.round() as u32, v.round() as u32).unwrap();
        assert_eq!(winner, 1);
        assert!((map.depth_at(u.round() as u32, v.round() as u32) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn winner_per_pixel_matches_exhaustive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(17);
        let cloud = PointCloud::from_points(
            (0..800)
                .map(|_| {
                    Point3::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(1.0..4.0),
                    )
                })
                .collect(),
        );
        let cam = forward_cam(48, 48);
        let radius = 1.0;
        let map = project_points(&cloud, &cam, radius);
        // Oracle: for each pixel scan all points, keep the minimal depth
        // among disks covering it (center in-image), ties to lowest index.
        let (fw, fh) = (48.0, 48.0);
        for v in 0..48u32 {
            for u in 0..48u32 {
                let mut best: Option<(f64, usize)> = None;
                for (i, p) in cloud.points.iter().enumerate() {
                    let Some((pu, pv, z)) = cam.project(p) else {
                        continue;
                    };
                    let (cu, cv) = (pu.round(), pv.round());
                    if cu < 0.0 || cu >= fw || cv < 0.0 || cv >= fh {
                        continue;
                    }
                    let du = f64::from(u) - pu;
                    let dv = f64::from(v) - pv;
                    if du * du + dv * dv > radius * radius {
                        continue;
                    }
                    let zf = f64::from(z as f32);
                    if best.is_none_or(|(bz, bi)| zf < bz || (zf == bz && i < bi)) {
                        best = Some((zf, i));
                    }
                }
                assert_eq!(
                    map.point_at(u, v),
                    best.map(|(_, i)| i),
                    "pixel ({u},{v}) winner mismatch"
                );
            }
        }
    }

    #[test]
    fn stored_depth_equals_winner_projected_depth() {
        let cloud = PointCloud::from_points(vec![
            Point3::new(0.3, -0.2, 2.5),
            Point3::new(-0.4, 0.1, 1.75),
        ]);
        let cam = forward_cam(32, 32);
        let map = project_points(&cloud, &cam, 1.5);
        for (u, v, point, depth) in map.iter_pixels() {
            if let Some(i) = point {
                let (_, _, z) = cam.project(&cloud.points[i]).unwrap();
                assert_eq!(depth, z as f32, "pixel ({u},{v})");
            }
        }
    }

    #[test]
    fn visibility_single_point_single_camera() {
        let cloud = PointCloud::from_points(vec![Point3::new(0.0, 0.0, 2.0)]);
        let counts = visibility_counts(&cloud, &[forward_cam(16, 16)], 1.0);
        assert_eq!(counts, vec![1]);
    }

    #[test]
    fn occluded_point_counts_zero() {
        let cloud = PointCloud::from_points(vec![
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, 2.0), // behind the first on the same ray
        ]);
        let counts = visibility_counts(&cloud, &[forward_cam(17, 17)], 4.0);
        assert_eq!(counts[0], 1);
        assert_eq!(counts[1], 0);
    }

    #[test]
    fn two_camera_counts_match_raster_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(23);
        let cloud = PointCloud::from_points(
            (0..10)
                .map(|_| {
                    Point3::new(
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(-0.5..0.5),
                    )
                })
                .collect(),
        );
        // L-configuration: one camera down the z axis, one down the x axis.
        let cam_a = CameraView::look_at(
            Point3::new(0.0, 0.0, -3.0),
            Point3::origin(),
            Vector3::y(),
            CameraView::intrinsics_from_fov(24, 24, 60.0),
            (24, 24),
        )
        .unwrap();
        let cam_b = CameraView::look_at(
            Point3::new(-3.0, 0.0, 0.0),
            Point3::origin(),
            Vector3::z(),
            CameraView::intrinsics_from_fov(24, 24, 60.0),
            (24, 24),
        )
        .unwrap();
        let cams = [cam_a, cam_b];
        let counts = visibility_counts(&cloud, &cams, 1.0);
        // Independent recomputation straight from per-pixel winners.
        let mut expect = vec![0u32; cloud.len()];
        for cam in &cams {
            let map = project_points(&cloud, cam, 1.0);
            let mut seen = vec![false; cloud.len()];
            for v in 0..map.height {
                for u in 0..map.width {
                    if let Some(i) = map.point_at(u, v) {
                        seen[i] = true;
                    }
                }
            }
            for (e, s) in expect.iter_mut().zip(&seen) {
                *e += u32::from(*s);
            }
        }
        assert_eq!(counts, expect);
    }
}
