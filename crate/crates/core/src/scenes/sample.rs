//! Area-uniform surface sampling.

use nalgebra::Point3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::geom::PointCloud;
use crate::scenes::SceneMesh;

/// Draws `n` points uniformly by surface area, deterministically per seed.
/// Triangles are chosen by cumulative-area inversion and points placed with
/// the square-root barycentric trick.
pub fn sample_gt_cloud(mesh: &SceneMesh, n: usize, seed: u64) -> Result<PointCloud> {
    if mesh.is_empty() {
        return Err(Error::DegenerateInput("sampling an empty mesh".into()));
    }
    if n == 0 {
        return Err(Error::Parameter("sample count must be > 0".into()));
    }
    let mut cum = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        total += mesh.triangle_area(t);
        cum.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateInput("mesh has zero surface area".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.gen_range(0.0..total);
        let t = cum.partition_point(|&c| c <= r);
        let [a, b, c] = mesh.triangle_vertices(t.min(cum.len() - 1));
        let su = rng.gen_range(0.0f64..1.0).sqrt();
        let v = rng.gen_range(0.0f64..1.0);
        let p = a.coords * (1.0 - su) + b.coords * (su * (1.0 - v)) + c.coords * (su * v);
        points.push(Point3::from(p));
    }
    Ok(PointCloud::from_points(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenes::mesh::MeshBuilder;

    fn unit_square() -> SceneMesh {
        let mut b = MeshBuilder::new();
        b.quad(
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        );
        b.build()
    }

    #[test]
    fn density_is_uniform_across_halves() {
        let mesh = unit_square();
        let cloud = sample_gt_cloud(&mesh, 10_000, 5).unwrap();
        let left = cloud.points.iter().filter(|p| p.x < 0.5).count();
        let right = cloud.len() - left;
        let ratio = left as f64 / right as f64;
        assert!(
            (ratio - 1.0).abs() < 0.05,
            "left/right ratio {ratio} off by more than 5%"
        );
        // And across the diagonal of the two triangles.
        let lower = cloud.points.iter().filter(|p| p.y < p.x).count();
        let upper = cloud.len() - lower;
        let ratio = lower as f64 / upper as f64;
        assert!((ratio - 1.0).abs() < 0.05, "diagonal ratio {ratio}");
    }

    #[test]
    fn single_sample_lies_on_the_surface() {
        let mesh = unit_square();
        let cloud = sample_gt_cloud(&mesh, 1, 9).unwrap();
        assert_eq!(cloud.len(), 1);
        let p = cloud.points[0];
        assert!(p.z.abs() < 1e-9, "sample must lie on the z=0 plane");
        assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
    }

    #[test]
    fn sampling_is_deterministic() {
        let mesh = unit_square();
        let a = sample_gt_cloud(&mesh, 100, 77).unwrap();
        let b = sample_gt_cloud(&mesh, 100, 77).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_gt_cloud(&mesh, 100, 78).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn empty_mesh_is_degenerate() {
        let mesh = SceneMesh::new(vec![], vec![]);
        assert!(matches!(
            sample_gt_cloud(&mesh, 10, 0),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn area_weighting_prefers_large_triangles() {
        // Two triangles with areas 1/2 and 9/2 in the same plane.
        let mut b = MeshBuilder::new();
        let (v0, v1, v2) = (
            b.vertex(Point3::new(0.0, 0.0, 0.0)),
            b.vertex(Point3::new(1.0, 0.0, 0.0)),
            b.vertex(Point3::new(0.0, 1.0, 0.0)),
        );
        b.tri(v0, v1, v2);
        let (v3, v4, v5) = (
            b.vertex(Point3::new(10.0, 0.0, 0.0)),
            b.vertex(Point3::new(13.0, 0.0, 0.0)),
            b.vertex(Point3::new(10.0, 3.0, 0.0)),
        );
        b.tri(v3, v4, v5);
        let mesh = b.build();
        let cloud = sample_gt_cloud(&mesh, 5000, 3).unwrap();
        let big = cloud.points.iter().filter(|p| p.x >= 5.0).count() as f64;
        let frac = big / 5000.0;
        assert!((frac - 0.9).abs() < 0.03, "big-triangle fraction {frac}");
    }
}
