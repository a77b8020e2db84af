use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::traversal::supercover;
use crate::error::{Error, Result};
use crate::evidence::MassFunction;
use crate::grid::{DetectionImage, EvidenceGrid, GridGeometry, Scan, SensorKind};
use crate::scalar::Scalar;

/// Parameters of the ray-casting inverse lidar model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RayIlmParams {
    /// Detections below this height (m) are ground returns and dropped.
    pub z_min: f64,
    pub z_max: f64,
    /// Bearing step between rays, in degrees.
    pub angular_resolution: f64,
    pub max_range: f64,
    pub m_occupied: f64,
    pub m_free: f64,
}

impl Default for RayIlmParams {
    fn default() -> Self {
        Self {
            z_min: 0.3,
            z_max: 3.0,
            angular_resolution: 0.2,
            max_range: 15.0,
            m_occupied: 0.5,
            m_free: 0.05,
        }
    }
}

impl RayIlmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(self.z_min < self.z_max) {
            return bad("ray ILM height band", "z_min must be below z_max");
        }
        if !(self.angular_resolution > 0.0 && self.angular_resolution <= 360.0) {
            return bad("ray ILM angular resolution", "must lie in (0, 360] degrees");
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return bad("ray ILM max range", "must be positive");
        }
        for (name, m) in [("ray ILM occupied mass", self.m_occupied), ("ray ILM free mass", self.m_free)] {
            if !(m > 0.0 && m < 1.0) {
                return bad(name, "must lie in (0, 1)");
            }
        }
        Ok(())
    }

    /// Number of rays in one full turn.
    pub fn ray_count(&self) -> usize {
        ((360.0 / self.angular_resolution).round() as usize).max(1)
    }

    /// Bearing of ray `k` for a sensor with heading `heading`.
    pub fn bearing(&self, heading: f64, k: usize) -> f64 {
        heading + k as f64 * self.angular_resolution.to_radians()
    }
}

/// Detection cells of a lidar scan after the height filter.
pub fn lidar_detections(scan: &Scan, params: &RayIlmParams, geometry: &GridGeometry) -> DetectionImage {
    let mut image = DetectionImage::new(*geometry);
    for p in &scan.points {
        if p.z >= params.z_min && p.z <= params.z_max {
            image.add(scan.sensor_pose.transform_point(p.planar()));
        }
    }
    image
}

/// Inverse lidar model: free rays up to the first detection, occupied
/// detections, vacuous elsewhere.
///
/// The scan's sensor pose must be expressed in the grid frame.
pub fn ray_ilm<T: Scalar>(scan: &Scan, params: &RayIlmParams, geometry: &GridGeometry) -> Result<EvidenceGrid<T>> {
    params.validate()?;
    geometry.validate()?;
    if scan.sensor_kind != SensorKind::Lidar {
        return Err(Error::InvalidParameter {
            name: "ray ILM input",
            reason: format!("sensor {} is a {}", scan.sensor_id, scan.sensor_kind.as_str()),
        });
    }
    let sensor = scan.sensor_pose.position();
    if !geometry.contains(sensor) {
        return Err(Error::SensorOutsideGrid {
            x: sensor[0],
            y: sensor[1],
        });
    }

    let detections = lidar_detections(scan, params, geometry);
    let free: Vec<AtomicBool> = (0..geometry.len()).map(|_| AtomicBool::new(false)).collect();
    let origin = geometry.to_cell_units(sensor);
    let res = geometry.resolution;
    (0..params.ray_count()).into_par_iter().for_each(|k| {
        let (s, c) = params.bearing(scan.sensor_pose.theta, k).sin_cos();
        supercover(
            origin,
            [c / res, s / res],
            geometry.width,
            geometry.height,
            params.max_range,
            |x, y| detections.is_detection(x, y),
            |x, y| free[geometry.index(x, y)].store(true, Ordering::Relaxed),
        );
    });

    let free_mass = MassFunction::from_committed(T::lit(params.m_free), T::zero())?;
    let occupied_mass = MassFunction::from_committed(T::zero(), T::lit(params.m_occupied))?;
    let cells = detections
        .counts()
        .iter()
        .zip(&free)
        .map(|(&count, is_free)| {
            if count > 0 {
                occupied_mass
            } else if is_free.load(Ordering::Relaxed) {
                free_mass
            } else {
                MassFunction::vacuous()
            }
        })
        .collect();
    EvidenceGrid::from_cells(*geometry, "ray_ilm", cells)
}
