use serde::{Deserialize, Serialize};

use super::geometry::Pose2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Lidar,
    Radar,
}

impl SensorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SensorKind::Lidar => "lidar",
            SensorKind::Radar => "radar",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lidar" => Some(SensorKind::Lidar),
            "radar" => Some(SensorKind::Radar),
            _ => None,
        }
    }
}

/// Detection in the sensor frame; `z` is the height above ground (radar: 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ScanPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn planar(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// One sensor sweep. `sensor_pose` is expressed in whatever frame the consumer
/// works in (world frame on disk, vehicle frame after [`Scan::reframed`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub timestamp: f64,
    pub sensor_pose: Pose2D,
    pub sensor_kind: SensorKind,
    pub sensor_id: u16,
    pub points: Vec<ScanPoint>,
}

impl Scan {
    /// Re-expresses the sensor pose relative to `frame` (a pose in the same
    /// parent frame as `sensor_pose`).
    pub fn reframed(&self, frame: &Pose2D) -> Scan {
        Scan {
            sensor_pose: frame.inverse().compose(&self.sensor_pose),
            ..self.clone()
        }
    }

    /// Detection positions in the frame `sensor_pose` is expressed in.
    pub fn points_in_frame(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.points.iter().map(|p| self.sensor_pose.transform_point(p.planar()))
    }
}
