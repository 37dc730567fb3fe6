//! Hemispherical candidate-view catalogs.

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::geom::CameraView;

/// The fixed set of candidate viewpoints a policy may capture from:
/// `shells.len()` hemispherical shells of `per_shell` views each, every view
/// aimed at the scene center.
#[derive(Debug, Clone)]
pub struct ViewCatalog {
    pub views: Vec<CameraView>,
    pub shells: [f64; 3],
    pub per_shell: usize,
    pub center: Point3<f64>,
}

impl ViewCatalog {
    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    /// Optical axis through the center within 1e-6 rad, and the expected
    /// view count.
    pub fn validate(&self) -> Result<()> {
        if self.views.len() != 3 * self.per_shell {
            return Err(Error::Dimension(format!(
                "{} views != 3 shells x {}",
                self.views.len(),
                self.per_shell
            )));
        }
        for (i, v) in self.views.iter().enumerate() {
            let to_center = (self.center - v.position()).normalize();
            let angle = v.forward().dot(&to_center).clamp(-1.0, 1.0).acos();
            if angle > 1e-6 {
                return Err(Error::Parameter(format!(
                    "view {i} axis misses center by {angle:.2e} rad"
                )));
            }
        }
        Ok(())
    }
}

/// Golden-angle spiral on the upper hemisphere: `n` well-spread directions
/// with `z > 0`, rotated by `phase` about z.
pub fn fibonacci_hemisphere(n: usize, phase: f64) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64 + phase;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Builds the candidate catalog: `per_shell` Fibonacci-spread views on each
/// of three shells of increasing radius, all looking at `center`, with
/// square-pixel intrinsics derived from `fov_deg`.
///
/// Each shell gets a different azimuthal phase so the three shells do not
/// share lines of sight through the center.
pub fn sample_view_catalog(
    center: Point3<f64>,
    radii: [f64; 3],
    per_shell: usize,
    width: u32,
    height: u32,
    fov_deg: f64,
) -> Result<ViewCatalog> {
    if per_shell == 0 {
        return Err(Error::Parameter("per_shell must be >= 1".into()));
    }
    if !(radii[0] > 0.0) || radii[0] >= radii[1] || radii[1] >= radii[2] {
        return Err(Error::Parameter(format!(
            "shell radii {radii:?} must be positive and strictly increasing"
        )));
    }
    if !(0.0..180.0).contains(&fov_deg) || fov_deg <= 0.0 {
        return Err(Error::Parameter(format!("fov {fov_deg} out of range")));
    }
    let intrinsics = CameraView::intrinsics_from_fov(width, height, fov_deg);
    let mut views = Vec::with_capacity(3 * per_shell);
    for (s, &radius) in radii.iter().enumerate() {
        let phase = s as f64 * 0.7227342478134157; // golden angle / 2π · 2π/3-ish offset
        for dir in fibonacci_hemisphere(per_shell, phase) {
            let eye = center + dir * radius;
            views.push(CameraView::look_at(
                eye,
                center,
                Vector3::z(),
                intrinsics,
                (width, height),
            )?);
        }
    }
    let catalog = ViewCatalog {
        views,
        shells: radii,
        per_shell,
        center,
    };
    catalog.validate()?;
    Ok(catalog)
}
