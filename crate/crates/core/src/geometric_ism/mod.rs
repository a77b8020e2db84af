//! Ray-casting inverse sensor models for lidar and radar.

mod ilm;
mod irm;
pub mod traversal;

pub use ilm::{lidar_detections, ray_ilm, RayIlmParams};
pub use irm::{cones, radar_detections, ray_irm, Cone, RayIrmParams};
