use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::world::World;
use crate::error::{Error, Result};
use crate::grid::{Pose2D, Scan, ScanPoint, SensorKind};

/// Height assigned to every simulated lidar return.
pub const LIDAR_HEIGHT: f64 = 1.0;

/// Radar imperfections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarNoiseModel {
    /// Chance that a beam hitting a surface reports it.
    pub detection_probability: f64,
    /// Standard deviation of the range error, metres.
    pub range_sigma: f64,
    /// Standard deviation of the bearing error, radians.
    pub bearing_sigma: f64,
    /// Expected multipath ghosts per scan.
    pub ghost_rate: f64,
    /// Expected uniform false detections per scan.
    pub clutter_rate: f64,
}

impl Default for RadarNoiseModel {
    fn default() -> Self {
        Self {
            detection_probability: 0.5,
            range_sigma: 0.05,
            bearing_sigma: 0.005,
            ghost_rate: 0.5,
            clutter_rate: 1.0,
        }
    }
}

impl RadarNoiseModel {
    /// Every visible surface point, exactly, and nothing else.
    pub fn noiseless() -> Self {
        Self {
            detection_probability: 1.0,
            range_sigma: 0.0,
            bearing_sigma: 0.0,
            ghost_rate: 0.0,
            clutter_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(0.0..=1.0).contains(&self.detection_probability) {
            return bad("detection probability", "must lie in [0, 1]");
        }
        if !(self.range_sigma >= 0.0 && self.bearing_sigma >= 0.0) {
            return bad("radar noise sigma", "must be non-negative");
        }
        if !(self.ghost_rate >= 0.0 && self.clutter_rate >= 0.0 && self.ghost_rate.is_finite() && self.clutter_rate.is_finite()) {
            return bad("radar false-detection rate", "must be a non-negative number");
        }
        Ok(())
    }
}

/// Where a simulated radar detection came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Surface,
    Ghost,
    Clutter,
}

/// Beam bearing in the sensor frame; identical for every sensor with the
/// same beam count, and nested for multiples of it.
pub fn beam_bearing(k: usize, beam_count: usize) -> f64 {
    TAU * (k as f64 / beam_count as f64)
}

fn check_pose(world: &World, pose: &Pose2D) -> Result<()> {
    if world.is_occupied(pose.position()) {
        return Err(Error::PoseInObstacle { x: pose.x, y: pose.y });
    }
    Ok(())
}

/// Exact first returns on `beam_count` evenly spaced bearings. Beams without
/// a surface within `max_range` produce nothing.
pub fn simulate_lidar(world: &World, pose: &Pose2D, beam_count: usize, max_range: f64) -> Result<Scan> {
    check_pose(world, pose)?;
    let points = (0..beam_count)
        .filter_map(|k| {
            let bearing = beam_bearing(k, beam_count);
            let (s, c) = (pose.theta + bearing).sin_cos();
            world.first_hit(pose.position(), [c, s], max_range).map(|hit| {
                let (bs, bc) = bearing.sin_cos();
                ScanPoint::new(hit.range * bc, hit.range * bs, LIDAR_HEIGHT)
            })
        })
        .collect();
    Ok(Scan {
        timestamp: 0.0,
        sensor_pose: *pose,
        sensor_kind: SensorKind::Lidar,
        sensor_id: 0,
        points,
    })
}

fn poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> usize {
    if rate <= 0.0 {
        0
    } else {
        Poisson::new(rate).expect("positive rate").sample(rng) as usize
    }
}

fn reflect(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let e = [b[0] - a[0], b[1] - a[1]];
    let len2 = e[0] * e[0] + e[1] * e[1];
    let t = ((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / len2;
    let foot = [a[0] + t * e[0], a[1] + t * e[1]];
    [2.0 * foot[0] - p[0], 2.0 * foot[1] - p[1]]
}

/// Radar scan with the origin of every detection.
///
/// Surface returns are the lidar first hits on the same bearing grid, kept
/// with `detection_probability` and perturbed in range and bearing. Ghosts
/// mirror one true surface point across the edge another beam hit. Clutter
/// is uniform over the disc of radius `max_range`.
pub fn simulate_radar_labeled<R: Rng + ?Sized>(
    world: &World,
    pose: &Pose2D,
    beam_count: usize,
    max_range: f64,
    noise: &RadarNoiseModel,
    rng: &mut R,
) -> Result<Vec<(ScanPoint, Origin)>> {
    check_pose(world, pose)?;
    noise.validate()?;
    let range_noise = Normal::new(0.0, noise.range_sigma).expect("validated sigma");
    let bearing_noise = Normal::new(0.0, noise.bearing_sigma).expect("validated sigma");
    let mut out = Vec::new();
    let mut surface = Vec::new();
    for k in 0..beam_count {
        let bearing = beam_bearing(k, beam_count);
        let (s, c) = (pose.theta + bearing).sin_cos();
        let Some(hit) = world.first_hit(pose.position(), [c, s], max_range) else {
            continue;
        };
        surface.push(hit);
        if !rng.random_bool(noise.detection_probability) {
            continue;
        }
        let (range, bearing) = if noise.range_sigma > 0.0 || noise.bearing_sigma > 0.0 {
            (hit.range + range_noise.sample(rng), bearing + bearing_noise.sample(rng))
        } else {
            (hit.range, bearing)
        };
        if range > 0.0 {
            let (bs, bc) = bearing.sin_cos();
            out.push((ScanPoint::new(range * bc, range * bs, 0.0), Origin::Surface));
        }
    }
    if !surface.is_empty() {
        for _ in 0..poisson(noise.ghost_rate, rng) {
            let mirror = surface[rng.random_range(0..surface.len())];
            let source = surface[rng.random_range(0..surface.len())];
            let ghost = pose.inverse_transform_point(reflect(source.point, mirror.edge.0, mirror.edge.1));
            if ghost[0].hypot(ghost[1]) <= max_range {
                out.push((ScanPoint::new(ghost[0], ghost[1], 0.0), Origin::Ghost));
            }
        }
    }
    for _ in 0..poisson(noise.clutter_rate, rng) {
        let r = max_range * rng.random::<f64>().sqrt();
        let a = TAU * rng.random::<f64>();
        out.push((ScanPoint::new(r * a.cos(), r * a.sin(), 0.0), Origin::Clutter));
    }
    Ok(out)
}

pub fn simulate_radar<R: Rng + ?Sized>(
    world: &World,
    pose: &Pose2D,
    beam_count: usize,
    max_range: f64,
    noise: &RadarNoiseModel,
    rng: &mut R,
) -> Result<Scan> {
    let points = simulate_radar_labeled(world, pose, beam_count, max_range, noise, rng)?
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    Ok(Scan {
        timestamp: 0.0,
        sensor_pose: *pose,
        sensor_kind: SensorKind::Radar,
        sensor_id: 1,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::world::{Bounds, Polygon};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn world(obstacles: Vec<Polygon>) -> World {
        World::new(Bounds { min: [-30.0, -30.0], max: [30.0, 30.0] }, obstacles).unwrap()
    }

    #[test]
    fn empty_world_returns_nothing() {
        let scan = simulate_lidar(&world(vec![]), &Pose2D::identity(), 360, 20.0).unwrap();
        assert!(scan.points.is_empty());
    }

    #[test]
    fn unit_square_ahead() {
        let w = world(vec![Polygon::rectangle([5.0, -0.5], [6.0, 0.5]).unwrap()]);
        let scan = simulate_lidar(&w, &Pose2D::identity(), 360, 20.0).unwrap();
        let ahead = scan.points.iter().find(|p| p.y == 0.0).unwrap();
        assert_eq!((ahead.x, ahead.z), (5.0, LIDAR_HEIGHT));
        // Beams within atan(0.5 / 5) ≈ 5.7° of the axis hit the near face.
        assert_eq!(scan.points.len(), 11);
        for p in &scan.points {
            assert!((p.x - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_box_returns_every_beam() {
        let walls = vec![
            Polygon::rectangle([-5.0, -5.0], [5.0, -4.0]).unwrap(),
            Polygon::rectangle([-5.0, 4.0], [5.0, 5.0]).unwrap(),
            Polygon::rectangle([-5.0, -5.0], [-4.0, 5.0]).unwrap(),
            Polygon::rectangle([4.0, -5.0], [5.0, 5.0]).unwrap(),
        ];
        let scan = simulate_lidar(&world(walls), &Pose2D::new(0.3, -0.2, 0.7), 720, 20.0).unwrap();
        assert_eq!(scan.points.len(), 720);
    }

    #[test]
    fn pose_inside_obstacle_is_rejected() {
        let w = world(vec![Polygon::rectangle([-1.0, -1.0], [1.0, 1.0]).unwrap()]);
        assert!(matches!(simulate_lidar(&w, &Pose2D::identity(), 10, 5.0), Err(Error::PoseInObstacle { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(simulate_radar(&w, &Pose2D::identity(), 10, 5.0, &RadarNoiseModel::default(), &mut rng).is_err());
    }

    #[test]
    fn silent_radar_is_empty() {
        let w = world(vec![Polygon::rectangle([5.0, -0.5], [6.0, 0.5]).unwrap()]);
        let noise = RadarNoiseModel {
            detection_probability: 0.0,
            ghost_rate: 0.0,
            clutter_rate: 0.0,
            ..RadarNoiseModel::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(simulate_radar(&w, &Pose2D::identity(), 360, 20.0, &noise, &mut rng).unwrap().points.is_empty());
    }

    #[test]
    fn reflection_across_an_edge() {
        assert_eq!(reflect([1.0, 2.0], [0.0, 0.0], [3.0, 0.0]), [1.0, -2.0]);
        assert_eq!(reflect([1.0, 2.0], [4.0, -1.0], [4.0, 7.0]), [7.0, 2.0]);
    }
}
