//! Voxel-grid downsampling with attribute merging.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::geom::PointCloud;

/// Replaces each occupied voxel by the centroid of its member points.
///
/// Attribute merging: normals are averaged and renormalized (an all-zero sum
/// falls back to the first member's normal); visibility takes the maximum of
/// the members; `source_view` keeps the first member's view.
pub fn voxel_downsample(cloud: &PointCloud, voxel: f64) -> Result<PointCloud> {
    let mut acc = VoxelAccumulator::new(voxel)?;
    acc.insert_cloud(cloud);
    Ok(acc.finish())
}

/// Incremental voxel-grid accumulator.
///
/// The greedy oracle re-evaluates `base ∪ {candidate}` for every candidate
/// view; cloning an accumulator that already holds the base points and
/// inserting only the candidate's points avoids re-hashing the base cloud
/// each time. `insert_cloud` order determines the centroid summation order,
/// so identical insertion sequences reproduce bit-identical output.
#[derive(Debug, Clone)]
pub struct VoxelAccumulator {
    voxel: f64,
    cells: HashMap<(i64, i64, i64), Cell>,
    has_normals: bool,
    has_visibility: bool,
    has_source: bool,
    any_input: bool,
}

#[derive(Debug, Clone)]
struct Cell {
    sum: Vector3<f64>,
    count: u32,
    normal_sum: Vector3<f64>,
    first_normal: Vector3<f64>,
    max_visibility: u32,
    first_source: u32,
    /// Insertion rank of the cell, to emit output in first-touch order.
    rank: u32,
}

impl VoxelAccumulator {
    pub fn new(voxel: f64) -> Result<Self> {
        if !(voxel > 0.0) || !voxel.is_finite() {
            return Err(Error::Parameter(format!("voxel size {voxel} must be > 0")));
        }
        Ok(VoxelAccumulator {
            voxel,
            cells: HashMap::new(),
            has_normals: false,
            has_visibility: false,
            has_source: false,
            any_input: false,
        })
    }

    fn key(&self, p: &Point3<f64>) -> (i64, i64, i64) {
        (
            (p.x / self.voxel).floor() as i64,
            (p.y / self.voxel).floor() as i64,
            (p.z / self.voxel).floor() as i64,
        )
    }

    pub fn insert_cloud(&mut self, cloud: &PointCloud) {
        if !self.any_input {
            self.has_normals = cloud.normals.is_some();
            self.has_visibility = cloud.visibility.is_some();
            self.has_source = cloud.source_view.is_some();
            self.any_input = true;
        } else {
            self.has_normals &= cloud.normals.is_some();
            self.has_visibility &= cloud.visibility.is_some();
            self.has_source &= cloud.source_view.is_some();
        }
        let next_rank = self.cells.len() as u32;
        let mut rank = next_rank;
        for (i, p) in cloud.points.iter().enumerate() {
            let key = self.key(p);
            let normal = cloud
                .normals
                .as_ref()
                .map_or_else(Vector3::zeros, |n| n[i]);
            let vis = cloud.visibility.as_ref().map_or(0, |v| v[i]);
            let src = cloud.source_view.as_ref().map_or(0, |s| s[i]);
            match self.cells.get_mut(&key) {
                Some(cell) => {
                    cell.sum += p.coords;
                    cell.count += 1;
                    cell.normal_sum += normal;
                    cell.max_visibility = cell.max_visibility.max(vis);
                }
                None => {
                    self.cells.insert(
                        key,
                        Cell {
                            sum: p.coords,
                            count: 1,
                            normal_sum: normal,
                            first_normal: normal,
                            max_visibility: vis,
                            first_source: src,
                            rank,
                        },
                    );
                    rank += 1;
                }
            }
        }
    }

    pub fn occupied_voxels(&self) -> usize {
        self.cells.len()
    }

    /// Centroid positions only, in first-touch order. The cheap path used by
    /// the oracle, which needs no attributes for Chamfer evaluation.
    pub fn positions(&self) -> Vec<Point3<f64>> {
        let mut cells: Vec<&Cell> = self.cells.values().collect();
        cells.sort_by_key(|c| c.rank);
        cells
            .iter()
            .map(|c| Point3::from(c.sum / f64::from(c.count)))
            .collect()
    }

    pub fn finish(self) -> PointCloud {
        let mut cells: Vec<Cell> = self.cells.into_values().collect();
        cells.sort_by_key(|c| c.rank);
        let points = cells
            .iter()
            .map(|c| Point3::from(c.sum / f64::from(c.count)))
            .collect();
        let normals = self.has_normals.then(|| {
            cells
                .iter()
                .map(|c| {
                    c.normal_sum
                        .try_normalize(1e-12)
                        .unwrap_or(c.first_normal)
                })
                .collect()
        });
        let visibility = self
            .has_visibility
            .then(|| cells.iter().map(|c| c.max_visibility).collect());
        let source_view = self
            .has_source
            .then(|| cells.iter().map(|c| c.first_source).collect());
        PointCloud {
            points,
            normals,
            visibility,
            source_view,
        }
    }
}
