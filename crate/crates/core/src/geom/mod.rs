//! Geometric kernels: point clouds, cameras, depth images, exact
//! nearest-neighbor search, and reconstruction-quality metrics.

mod backproject;
mod camera;
mod cloud;
mod depth;
mod kdtree;
mod metrics;
mod normals;
mod ply;
mod voxel;

pub use backproject::backproject;
pub use camera::CameraView;
pub use cloud::PointCloud;
pub use depth::DepthImage;
pub use kdtree::KdTree3;
pub use metrics::{chamfer, chamfer_points, chamfer_with_trees, coverage_pct, f1_score};
pub use normals::{estimate_normals, estimate_normals_with_origins};
pub use ply::{read_ply, write_ply};
pub use voxel::{voxel_downsample, VoxelAccumulator};
