//! Next-best-view (NBV) planning laboratory.
//!
//! The crate simulates an RGB-D capture agent flying around a procedurally
//! generated object and choosing where to capture next. It provides:
//!
//! * [`geom`] — point clouds, cameras, depth images, exact nearest-neighbor
//!   search, and reconstruction-quality metrics (Chamfer distance, coverage,
//!   F1).
//! * [`scenes`] — procedural ground-truth meshes, area-uniform surface
//!   sampling, and hemispherical candidate-view catalogs.
//! * [`render`] — a software z-buffer depth rasterizer (the simulated sensor)
//!   and point-cloud splatting with pixel-to-point maps.
//! * [`features`] — the geometric featurization consumed by the learned view
//!   scorer: projected feature grids, pooled means/variances, and the
//!   empty-pixel hull statistics.
//! * [`vin`] — the view introspection network: a small convolutional encoder
//!   with an ordinal (CORAL) head, trained to imitate the oracle relative
//!   reconstruction improvement.
//! * [`policy`] — the greedy sequential acquisition loop with pluggable
//!   fitness criteria (coverage, oracle, learned, random) and motion-budget /
//!   collision constraints.

pub mod error;
pub mod features;
pub mod geom;
pub mod policy;
pub mod render;
pub mod scenes;
pub mod seed;
pub mod vin;

pub use error::{Error, Result};
