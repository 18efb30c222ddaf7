//! Core algorithms for skeleton-graph based autonomous exploration.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid_map`]: tri-state occupancy map, truncated ESDF, frontier clusters
//!   and voxel ray traversal.
//! - [`skeleton`]: incremental free-space skeleton graph with frontier
//!   activation and skeletal/hop distance queries.
//! - [`regions`]: probe-based implicit unknown-region analysis and isolation
//!   scoring.
//! - [`planner`]: the proximal planner (kinematic time cost) and the
//!   on-demand region-sequence planner (fixed-start open TSP).
//!
//! Everything here is deterministic and single-threaded; the simulator crate
//! drives the per-cycle pipeline.

pub mod error;
pub mod geometry;
pub mod grid_map;
pub mod kmeans;
pub mod planner;
pub mod regions;
pub mod skeleton;
pub mod union_find;

pub use error::{CoreError, Result};
pub use geometry::Vec3;
