//! Compiles hand/object pose demonstrations into behavior-tree plans.
//!
//! The stages run in order: windowed information measures over pose
//! recordings, per-frame scene graphs, segmentation into interaction units,
//! graph differencing into primitives, behavior-tree assembly, and a
//! kinematic replay that checks the plan reproduces the demonstrated
//! placements.

pub mod baseline;
pub mod bt;
pub mod error;
pub mod infotheory;
pub mod pipeline;
pub mod primitives;
pub mod replay;
pub mod scene_graph;
pub mod segmentation;
pub mod signal_io;
pub mod transform;

pub use error::{Error, Result};
