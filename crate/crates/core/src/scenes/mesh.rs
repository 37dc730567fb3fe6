//! Triangle meshes and OBJ export.

use std::io::Write;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// An indexed triangle mesh with cached axis-aligned bounds. Watertightness
/// is not required; disconnected components are allowed (and the house
/// category relies on them).
#[derive(Debug, Clone)]
pub struct SceneMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    pub bounds: (Point3<f64>, Point3<f64>),
}

impl SceneMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Self {
        let bounds = compute_bounds(&vertices);
        SceneMesh {
            vertices,
            triangles,
            bounds,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn bbox_diagonal(&self) -> f64 {
        (self.bounds.1 - self.bounds.0).norm()
    }

    pub fn bbox_center(&self) -> Point3<f64> {
        nalgebra::center(&self.bounds.0, &self.bounds.1)
    }

    /// Radius of the bounding sphere around the bounding-box center.
    pub fn bounding_radius(&self) -> f64 {
        self.bbox_diagonal() / 2.0
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        (b - a).cross(&(c - a)).norm() / 2.0
    }

    /// Indices in range and triangles non-degenerate (area > 1e-12 m²).
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::Parameter(format!(
                    "triangle {t} references vertex out of range"
                )));
            }
            let area = self.triangle_area(t);
            if area <= 1e-12 {
                return Err(Error::Parameter(format!(
                    "triangle {t} degenerate (area {area:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// Exact squared distance from a point to the mesh surface (brute force
    /// over triangles). Used by round-trip tests; not a hot path.
    pub fn distance_to_surface(&self, p: &Point3<f64>) -> f64 {
        (0..self.triangles.len())
            .map(|t| point_triangle_distance_sq(p, &self.triangle_vertices(t)))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Rigidly rescales about the bounding-box center so the bounds diagonal
    /// equals `target`, then recenters the bounds on the origin.
    pub fn scaled_to_diagonal(mut self, target: f64) -> Self {
        let diag = self.bbox_diagonal();
        assert!(diag > 0.0, "cannot scale an empty or flat mesh");
        let s = target / diag;
        let c = self.bbox_center();
        for v in &mut self.vertices {
            *v = Point3::from((*v - c) * s);
        }
        self.bounds = compute_bounds(&self.vertices);
        self
    }

    pub fn write_obj(&self, path: &Path) -> Result<()> {
        let display = path.display().to_string();
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
        }
        for t in &self.triangles {
            out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(display.clone(), e))?;
        f.write_all(out.as_bytes())
            .map_err(|e| Error::io(display, e))
    }
}

fn compute_bounds(vertices: &[Point3<f64>]) -> (Point3<f64>, Point3<f64>) {
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in vertices {
        for a in 0..3 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    (lo, hi)
}

/// Squared distance from `p` to triangle `abc` (Ericson's region method).
pub fn point_triangle_distance_sq(p: &Point3<f64>, tri: &[Point3<f64>; 3]) -> f64 {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm_squared();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm_squared();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (ap - ab * v).norm_squared();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm_squared();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (ap - ac * w).norm_squared();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        let bc = c - b;
        return (bp - bc * w).norm_squared();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let closest = a + ab * v + ac * w;
    (p - closest).norm_squared()
}

/// Builder that appends primitive shapes; parts that should weld share
/// bit-identical corner coordinates.
#[derive(Debug, Default)]
pub struct MeshBuilder {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
}

impl MeshBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build(self) -> SceneMesh {
        SceneMesh::new(self.vertices, self.triangles)
    }

    pub fn vertex(&mut self, p: Point3<f64>) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    pub fn tri(&mut self, a: u32, b: u32, c: u32) {
        self.triangles.push([a, b, c]);
    }

    /// Quad `a b c d` in winding order, split into two triangles.
    pub fn quad(&mut self, a: Point3<f64>, b: Point3<f64>, c: Point3<f64>, d: Point3<f64>) {
        let ia = self.vertex(a);
        let ib = self.vertex(b);
        let ic = self.vertex(c);
        let id = self.vertex(d);
        self.tri(ia, ib, ic);
        self.tri(ia, ic, id);
    }

    /// Axis-aligned box.
    pub fn push_box(&mut self, center: Point3<f64>, half: Vector3<f64>) {
        let (cx, cy, cz) = (center.x, center.y, center.z);
        let (hx, hy, hz) = (half.x, half.y, half.z);
        let p = |sx: f64, sy: f64, sz: f64| {
            Point3::new(cx + sx * hx, cy + sy * hy, cz + sz * hz)
        };
        // -z, +z, -y, +y, -x, +x faces.
        self.quad(p(-1., -1., -1.), p(1., -1., -1.), p(1., 1., -1.), p(-1., 1., -1.));
        self.quad(p(-1., -1., 1.), p(-1., 1., 1.), p(1., 1., 1.), p(1., -1., 1.));
        self.quad(p(-1., -1., -1.), p(-1., -1., 1.), p(1., -1., 1.), p(1., -1., -1.));
        self.quad(p(-1., 1., -1.), p(1., 1., -1.), p(1., 1., 1.), p(-1., 1., 1.));
        self.quad(p(-1., -1., -1.), p(-1., 1., -1.), p(-1., 1., 1.), p(-1., -1., 1.));
        self.quad(p(1., -1., -1.), p(1., -1., 1.), p(1., 1., 1.), p(1., 1., -1.));
    }

    /// A closed cylinder along `axis` (unit), `segments >= 3`.
    pub fn push_cylinder(
        &mut self,
        base: Point3<f64>,
        axis: Vector3<f64>,
        radius: f64,
        height: f64,
        segments: usize,
    ) {
        let axis = axis.normalize();
        let ortho = if axis.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        };
        let u = axis.cross(&ortho).normalize();
        let v = axis.cross(&u);
        let top = base + axis * height;
        let ring = |center: Point3<f64>, k: usize| {
            let ang = std::f64::consts::TAU * k as f64 / segments as f64;
            center + (u * ang.cos() + v * ang.sin()) * radius
        };
        for k in 0..segments {
            let k1 = (k + 1) % segments;
            let b0 = ring(base, k);
            let b1 = ring(base, k1);
            let t0 = ring(top, k);
            let t1 = ring(top, k1);
            let ib0 = self.vertex(b0);
            let ib1 = self.vertex(b1);
            let it0 = self.vertex(t0);
            let it1 = self.vertex(t1);
            self.tri(ib0, ib1, it1);
            self.tri(ib0, it1, it0);
            // Caps.
            let icb = self.vertex(base);
            let ict = self.vertex(top);
            self.tri(icb, ib1, ib0);
            self.tri(ict, it0, it1);
        }
    }

    /// UV-tessellated ellipsoid with semi-axes `radii`.
    pub fn push_ellipsoid(
        &mut self,
        center: Point3<f64>,
        radii: Vector3<f64>,
        n_lat: usize,
        n_lon: usize,
    ) {
        let pt = |lat: usize, lon: usize| {
            let theta = std::f64::consts::PI * lat as f64 / n_lat as f64;
            let phi = std::f64::consts::TAU * lon as f64 / n_lon as f64;
            Point3::new(
                center.x + radii.x * theta.sin() * phi.cos(),
                center.y + radii.y * theta.sin() * phi.sin(),
                center.z + radii.z * theta.cos(),
            )
        };
        for lat in 0..n_lat {
            for lon in 0..n_lon {
                let lon1 = (lon + 1) % n_lon;
                let a = pt(lat, lon);
                let b = pt(lat + 1, lon);
                let c = pt(lat + 1, lon1);
                let d = pt(lat, lon1);
                // b == c at the south pole, a == d at the north pole.
                if lat + 1 < n_lat {
                    let ia = self.vertex(a);
                    let ib = self.vertex(b);
                    let ic = self.vertex(c);
                    self.tri(ia, ib, ic);
                }
                if lat > 0 {
                    let ia = self.vertex(a);
                    let ic = self.vertex(c);
                    let id = self.vertex(d);
                    self.tri(ia, ic, id);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_is_valid_and_bounded() {
        let mut b = MeshBuilder::new();
        b.push_box(Point3::origin(), Vector3::new(1.0, 2.0, 3.0));
        let mesh = b.build();
        mesh.validate().unwrap();
        assert_eq!(mesh.triangles.len(), 12);
        assert_eq!(mesh.bounds.0, Point3::new(-1.0, -2.0, -3.0));
        assert_eq!(mesh.bounds.1, Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn cylinder_and_ellipsoid_are_valid() {
        let mut b = MeshBuilder::new();
        b.push_cylinder(Point3::origin(), Vector3::z(), 0.5, 2.0, 16);
        b.push_ellipsoid(Point3::new(3.0, 0.0, 0.0), Vector3::new(1.0, 0.5, 0.75), 8, 12);
        let mesh = b.build();
        mesh.validate().unwrap();
    }

    #[test]
    fn point_triangle_distance_cases() {
        let tri = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        // Above the interior.
        let d = point_triangle_distance_sq(&Point3::new(0.25, 0.25, 2.0), &tri).sqrt();
        assert!((d - 2.0).abs() < 1e-12);
        // Nearest to vertex a.
        let d = point_triangle_distance_sq(&Point3::new(-3.0, -4.0, 0.0), &tri).sqrt();
        assert!((d - 5.0).abs() < 1e-12);
        // Nearest to edge ab.
        let d = point_triangle_distance_sq(&Point3::new(0.5, -2.0, 0.0), &tri).sqrt();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_hits_target_diagonal() {
        let mut b = MeshBuilder::new();
        b.push_box(Point3::new(5.0, 0.0, 2.0), Vector3::new(1.0, 1.0, 1.0));
        let mesh = b.build().scaled_to_diagonal(14.0);
        assert!((mesh.bbox_diagonal() - 14.0).abs() < 1e-6);
        // Recentered on the origin.
        assert!(mesh.bbox_center().coords.norm() < 1e-9);
    }
}
