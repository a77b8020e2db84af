//! Synthetic polygon worlds, range sensors and scenario recordings.

pub mod presets;
mod scenario;
mod sensors;
mod world;

pub use scenario::{
    generate_scenario, simulate_recording, vehicle_poses, LidarConfig, RadarConfig, ScenarioConfig, Trajectory, LIDAR_ID,
    RADAR_ID,
};
pub use sensors::{beam_bearing, simulate_lidar, simulate_radar, simulate_radar_labeled, Origin, RadarNoiseModel, LIDAR_HEIGHT};
pub use world::{Bounds, Hit, Polygon, World};
