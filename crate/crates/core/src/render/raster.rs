//! Z-buffer triangle rasterization of the ground-truth mesh — the
//! simulated (noise-free) depth sensor.

use nalgebra::{Point3, Vector2};

use crate::geom::{CameraView, DepthImage};
use crate::scenes::SceneMesh;

const NEAR_PLANE: f64 = 1e-4;

/// Renders a noise-free depth map: nearest surface depth per pixel, 0 where
/// no triangle covers the pixel or the surface lies beyond the far plane
/// (10x the mesh bounding-box diagonal).
///
/// Pixels sample rays through integer image coordinates `(u, v)`; depth is
/// perspective-correct (1/z interpolated in screen space). Triangles with a
/// vertex behind the near plane are dropped, which is exact for catalogs
/// that keep the object fully in front of the camera.
pub fn render_depth(mesh: &SceneMesh, cam: &CameraView) -> DepthImage {
    let (w, h) = cam.resolution;
    let mut img = DepthImage::new_invalid(w, h);
    if mesh.is_empty() {
        return img;
    }
    let far = 10.0 * mesh.bbox_diagonal();
    let (fw, fh) = (f64::from(w), f64::from(h));

    for t in 0..mesh.triangles.len() {
        let tri = mesh.triangle_vertices(t);
        let cam_space: Vec<Point3<f64>> = tri.iter().map(|p| cam.world_to_camera(p)).collect();
        if cam_space.iter().any(|p| p.z < NEAR_PLANE) {
            continue;
        }
        let (fx, fy, cx, cy) = cam.intrinsics;
        let proj: Vec<(Vector2<f64>, f64)> = cam_space
            .iter()
            .map(|p| {
                (
                    Vector2::new(fx * p.x / p.z + cx, fy * p.y / p.z + cy),
                    p.z,
                )
            })
            .collect();
        let (a, za) = proj[0];
        let (b, zb) = proj[1];
        let (c, zc) = proj[2];

        let area = edge(&a, &b, &c);
        if area.abs() < 1e-12 {
            continue;
        }

        // Pixel bounding box; samples sit at integer coordinates.
        let min_x = a.x.min(b.x).min(c.x).ceil().max(0.0) as i64;
        let max_x = a.x.max(b.x).max(c.x).floor().min(fw - 1.0) as i64;
        let min_y = a.y.min(b.y).min(c.y).ceil().max(0.0) as i64;
        let max_y = a.y.max(b.y).max(c.y).floor().min(fh - 1.0) as i64;
        if min_x > max_x || min_y > max_y {
            continue;
        }

        let inv_za = 1.0 / za;
        let inv_zb = 1.0 / zb;
        let inv_zc = 1.0 / zc;
        for v in min_y..=max_y {
            for u in min_x..=max_x {
                let p = Vector2::new(u as f64, v as f64);
                let w0 = edge(&b, &c, &p) / area;
                let w1 = edge(&c, &a, &p) / area;
                let w2 = edge(&a, &b, &p) / area;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let inv_z = w0 * inv_za + w1 * inv_zb + w2 * inv_zc;
                let z = 1.0 / inv_z;
                if z > far {
                    continue;
                }
                let (ui, vi) = (u as u32, v as u32);
                let cur = img.get(ui, vi);
                if cur == 0.0 || (z as f32) < cur {
                    img.set(ui, vi, z as f32);
                }
            }
        }
    }
    img
}

/// Twice the signed area of triangle `(a, b, p)`.
fn edge(a: &Vector2<f64>, b: &Vector2<f64>, p: &Vector2<f64>) -> f64 {
    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
}
