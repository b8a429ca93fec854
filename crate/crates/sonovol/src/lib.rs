//! Freehand 3D ultrasound volumetry toolkit.
//!
//! Reconstructs nodule volume from a tracked freehand sweep of 2D ultrasound
//! frames: screen-capture intrinsic calibration (ROI + pixel scale from a
//! ledge phantom), marker-based extrinsic calibration (PnP/RANSAC + Kabsch),
//! pose smoothing, point-cloud compounding, voxel meshing, and SDF-based
//! slice verification. A synthetic phantom-and-sweep simulator drives the
//! whole pipeline end to end.

pub mod geom;

pub use geom::{FrameId, RigidTransform, RoiBox, UsIntrinsics};
pub mod cli;
