//! Procedural ground-truth scenes and candidate-view catalogs.

mod catalog;
mod generate;
pub mod mesh;
mod sample;

pub use catalog::{sample_view_catalog, ViewCatalog};
pub use generate::{generate_scene, Category};
pub use mesh::{MeshBuilder, SceneMesh};
pub use sample::sample_gt_cloud;
