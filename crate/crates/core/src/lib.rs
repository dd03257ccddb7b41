//! Floor-plan recognition and extrusion.

pub mod config;
pub mod doors;
pub mod error;
pub mod eval;
pub mod lines;
pub mod mesh;
pub mod model;
pub mod pipeline;
pub mod raster;
pub mod synth;
pub mod walls;
pub mod windows;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use pipeline::{recognize, Pipeline};
pub use raster::BBox;
