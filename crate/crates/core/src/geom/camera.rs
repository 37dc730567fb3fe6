//! Pinhole cameras: intrinsics plus a world-to-camera rigid transform.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::error::{Error, Result};

/// A pinhole camera. The camera frame is x-right, y-down, z-forward; a
/// world point `p` maps to camera space as `rotation * p + translation`.
///
/// Pixel `(u, v)` of the image samples the ray through the continuous image
/// coordinate `(u, v)` (not the half-pixel center), so a depth value `d`
/// stored at pixel `(u, v)` back-projects to camera-space
/// `((u - cx)·d/fx, (v - cy)·d/fy, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraView {
    /// Focal lengths and principal point in pixels: `(fx, fy, cx, cy)`.
    pub intrinsics: (f64, f64, f64, f64),
    /// World-to-camera rotation.
    pub rotation: Matrix3<f64>,
    /// World-to-camera translation (meters).
    pub translation: Vector3<f64>,
    /// Image resolution `(W, H)` in pixels.
    pub resolution: (u32, u32),
}

impl CameraView {
    /// Checks the rotation is special orthogonal and the intrinsics sit
    /// inside the image.
    pub fn validate(&self) -> Result<()> {
        let r = &self.rotation;
        let err = (r * r.transpose() - Matrix3::identity()).norm();
        if err > 1e-6 {
            return Err(Error::Parameter(format!(
                "rotation not orthonormal (|RRᵀ−I| = {err:.2e})"
            )));
        }
        let det = r.determinant();
        if (det - 1.0).abs() > 1e-6 {
            return Err(Error::Parameter(format!("rotation determinant {det}")));
        }
        let (fx, fy, cx, cy) = self.intrinsics;
        let (w, h) = self.resolution;
        if fx <= 0.0 || fy <= 0.0 {
            return Err(Error::Parameter(format!("non-positive focal ({fx}, {fy})")));
        }
        if !(0.0..f64::from(w)).contains(&cx) || !(0.0..f64::from(h)).contains(&cy) {
            return Err(Error::Parameter(format!(
                "principal point ({cx}, {cy}) outside {w}x{h} image"
            )));
        }
        Ok(())
    }

    /// Camera center in world coordinates.
    pub fn position(&self) -> Point3<f64> {
        // 0 = R·c + t  =>  c = -Rᵀ·t
        Point3::from(-(self.rotation.transpose() * self.translation))
    }

    pub fn world_to_camera(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn camera_to_world(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation.transpose() * (p.coords - self.translation))
    }

    /// Projects a world point to continuous image coordinates and camera
    /// depth. Returns `None` when the point is at or behind the camera.
    pub fn project(&self, p: &Point3<f64>) -> Option<(f64, f64, f64)> {
        let c = self.world_to_camera(p);
        if c.z <= 0.0 {
            return None;
        }
        let (fx, fy, cx, cy) = self.intrinsics;
        Some((fx * c.x / c.z + cx, fy * c.y / c.z + cy, c.z))
    }

    /// Unit-less camera-space ray direction through the continuous image
    /// coordinate `(u, v)`, with z = 1.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Vector3<f64> {
        let (fx, fy, cx, cy) = self.intrinsics;
        Vector3::new((u - cx) / fx, (v - cy) / fy, 1.0)
    }

    /// Forward (optical axis) direction in world coordinates.
    pub fn forward(&self) -> Vector3<f64> {
        self.rotation.transpose() * Vector3::z()
    }

    /// A camera at `eye` whose optical axis passes through `target`.
    /// `up_hint` resolves the roll; a near-parallel hint falls back to +x.
    pub fn look_at(
        eye: Point3<f64>,
        target: Point3<f64>,
        up_hint: Vector3<f64>,
        intrinsics: (f64, f64, f64, f64),
        resolution: (u32, u32),
    ) -> Result<Self> {
        let forward = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::Parameter("look_at: eye coincides with target".into()))?;
        let mut up = up_hint;
        if forward.cross(&up).norm() < 1e-6 {
            up = Vector3::x();
        }
        let right = forward.cross(&up).normalize();
        // Camera y points down in image space: forward × right for a
        // right-handed x-right / y-down / z-forward frame.
        let down = forward.cross(&right).normalize();
        // Rows of the world-to-camera rotation are the camera axes.
        let rotation = Matrix3::from_rows(&[
            right.transpose(),
            down.transpose(),
            forward.transpose(),
        ]);
        let translation = -(rotation * eye.coords);
        let cam = CameraView {
            intrinsics,
            rotation,
            translation,
            resolution,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Same pose and field of view re-expressed at a new resolution.
    ///
    /// Pixel `(u, v)` samples continuous coordinate `(u, v)`, so the image
    /// plane of a width-`W` camera spans `[-0.5, W-0.5]`; rescaling by `s`
    /// maps `u -> s·u + (s-1)/2` to keep the frustum edges fixed.
    pub fn with_resolution(&self, w: u32, h: u32) -> CameraView {
        let (fx, fy, cx, cy) = self.intrinsics;
        let sx = f64::from(w) / f64::from(self.resolution.0);
        let sy = f64::from(h) / f64::from(self.resolution.1);
        CameraView {
            intrinsics: (
                fx * sx,
                fy * sy,
                cx * sx + (sx - 1.0) / 2.0,
                cy * sy + (sy - 1.0) / 2.0,
            ),
            rotation: self.rotation,
            translation: self.translation,
            resolution: (w, h),
        }
    }

    /// Symmetric intrinsics for a square-pixel camera with the given
    /// horizontal field of view.
    pub fn intrinsics_from_fov(w: u32, h: u32, fov_deg: f64) -> (f64, f64, f64, f64) {
        let half = (fov_deg.to_radians() / 2.0).tan();
        let fx = f64::from(w) / 2.0 / half;
        (fx, fx, f64::from(w) / 2.0 - 0.5, f64::from(h) / 2.0 - 0.5)
    }

    /// Bit-exact equality of pose, intrinsics, and resolution. Used to give
    /// view-set unions set semantics (a re-capture of an existing view must
    /// not change the reconstruction).
    pub fn bit_eq(&self, other: &CameraView) -> bool {
        self.resolution == other.resolution
            && self.intrinsics.0.to_bits() == other.intrinsics.0.to_bits()
            && self.intrinsics.1.to_bits() == other.intrinsics.1.to_bits()
            && self.intrinsics.2.to_bits() == other.intrinsics.2.to_bits()
            && self.intrinsics.3.to_bits() == other.intrinsics.3.to_bits()
            && self
                .rotation
                .iter()
                .zip(other.rotation.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self
                .translation
                .iter()
                .zip(other.translation.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
