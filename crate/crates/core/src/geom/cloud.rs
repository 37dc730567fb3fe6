//! Point clouds with optional per-point attributes.

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// A cloud of world-space points, optionally enriched with unit normals,
/// visibility counts (how many base views observed each point), and the
/// index of the view the point originated from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    pub normals: Option<Vec<Vector3<f64>>>,
    pub visibility: Option<Vec<u32>>,
    pub source_view: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn from_points(points: Vec<Point3<f64>>) -> Self {
        PointCloud {
            points,
            normals: None,
            visibility: None,
            source_view: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks the attribute invariants: matching lengths, unit normals,
    /// visibility counts bounded by the number of base views.
    pub fn validate(&self, n_base_views: usize) -> Result<()> {
        if let Some(normals) = &self.normals {
            if normals.len() != self.points.len() {
                return Err(Error::Dimension(format!(
                    "normals len {} != points len {}",
                    normals.len(),
                    self.points.len()
                )));
            }
            for (i, n) in normals.iter().enumerate() {
                if (n.norm() - 1.0).abs() > 1e-6 {
                    return Err(Error::Parameter(format!(
                        "normal {i} has norm {} (expected 1 within 1e-6)",
                        n.norm()
                    )));
                }
            }
        }
        if let Some(vis) = &self.visibility {
            if vis.len() != self.points.len() {
                return Err(Error::Dimension(format!(
                    "visibility len {} != points len {}",
                    vis.len(),
                    self.points.len()
                )));
            }
            if let Some((i, &v)) = vis
                .iter()
                .enumerate()
                .find(|(_, &v)| v as usize > n_base_views)
            {
                return Err(Error::Parameter(format!(
                    "visibility[{i}] = {v} exceeds {n_base_views} base views"
                )));
            }
        }
        if let Some(src) = &self.source_view {
            if src.len() != self.points.len() {
                return Err(Error::Dimension(format!(
                    "source_view len {} != points len {}",
                    src.len(),
                    self.points.len()
                )));
            }
        }
        Ok(())
    }

    /// Axis-aligned bounding box, `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = *self.points.first()?;
        let mut lo = first;
        let mut hi = first;
        for p in &self.points[1..] {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        Some((lo, hi))
    }

    /// Diagonal length of the bounding box; 0 for empty clouds.
    pub fn bbox_diagonal(&self) -> f64 {
        match self.bounds() {
            Some((lo, hi)) => (hi - lo).norm(),
            None => 0.0,
        }
    }

    /// Appends another cloud, merging whichever attributes both sides carry.
    pub fn extend(&mut self, other: &PointCloud) {
        self.points.extend_from_slice(&other.points);
        match (&mut self.normals, &other.normals) {
            (Some(a), Some(b)) => a.extend_from_slice(b),
            (a @ Some(_), None) => *a = None,
            _ => {}
        }
        match (&mut self.visibility, &other.visibility) {
            (Some(a), Some(b)) => a.extend_from_slice(b),
            (a @ Some(_), None) => *a = None,
            _ => {}
        }
        match (&mut self.source_view, &other.source_view) {
            (Some(a), Some(b)) => a.extend_from_slice(b),
            (a @ Some(_), None) => *a = None,
            _ => {}
        }
    }
}
