//! Software depth rendering and point-cloud projection.

mod project;
mod raster;

pub use project::{project_points, visibility_counts, ProjectionMap};
pub use raster::render_depth;
