use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sensors::{simulate_lidar, simulate_radar, RadarNoiseModel};
use super::world::World;
use crate::error::{Error, Result};
use crate::grid::io::write_grid;
use crate::grid::{GridGeometry, Pose2D, SensorKind};
use crate::recording::{Recording, RecordingMeta, SensorSpec, GROUND_TRUTH_FILE};

pub const LIDAR_ID: u16 = 0;
pub const RADAR_ID: u16 = 1;

/// Piecewise-linear path driven at constant speed, one scan epoch per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub waypoints: Vec<[f64; 2]>,
    pub epochs: usize,
    /// Seconds between epochs.
    #[serde(default = "default_scan_period")]
    pub scan_period: f64,
    /// Heading used when the path has zero length.
    #[serde(default)]
    pub heading: f64,
}

fn default_scan_period() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    pub beam_count: usize,
    pub max_range: f64,
    pub extrinsic: Pose2D,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            beam_count: 1800,
            max_range: 30.0,
            extrinsic: Pose2D::identity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarConfig {
    pub beam_count: usize,
    pub max_range: f64,
    pub extrinsic: Pose2D,
    pub noise: RadarNoiseModel,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            beam_count: 360,
            max_range: 20.0,
            extrinsic: Pose2D::identity(),
            noise: RadarNoiseModel::default(),
        }
    }
}

/// Everything needed to synthesize one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub world: World,
    pub trajectory: Trajectory,
    #[serde(default = "GridGeometry::bev_default")]
    pub grid: GridGeometry,
    #[serde(default)]
    pub lidar: LidarConfig,
    #[serde(default)]
    pub radar: RadarConfig,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.into(),
            detail: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.world.validate(self.grid.resolution * self.grid.resolution)?;
        self.radar.noise.validate()?;
        for (name, beams, range) in [
            ("lidar", self.lidar.beam_count, self.lidar.max_range),
            ("radar", self.radar.beam_count, self.radar.max_range),
        ] {
            if beams == 0 || !(range > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "sensor configuration",
                    reason: format!("{name} needs beams and a positive range"),
                });
            }
        }
        if !(self.trajectory.scan_period > 0.0) {
            return Err(Error::InvalidParameter {
                name: "scan period",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Vehicle poses along the trajectory, one per epoch, heading along the
/// current segment.
pub fn vehicle_poses(trajectory: &Trajectory, world: &World) -> Result<Vec<Pose2D>> {
    let waypoints = &trajectory.waypoints;
    if waypoints.is_empty() {
        return Err(Error::InfeasibleTrajectory("no waypoints".into()));
    }
    if trajectory.epochs == 0 {
        return Err(Error::InfeasibleTrajectory("zero epochs".into()));
    }
    for (i, pair) in waypoints.windows(2).enumerate() {
        if world.segment_blocked(pair[0], pair[1]) {
            return Err(Error::InfeasibleTrajectory(format!(
                "segment {i} from {:?} to {:?} crosses an obstacle",
                pair[0], pair[1]
            )));
        }
    }
    let segments: Vec<([f64; 2], [f64; 2], f64)> = waypoints
        .windows(2)
        .map(|p| (p[0], p[1], (p[1][0] - p[0][0]).hypot(p[1][1] - p[0][1])))
        .filter(|s| s.2 > 0.0)
        .collect();
    let total: f64 = segments.iter().map(|s| s.2).sum();
    let poses = (0..trajectory.epochs)
        .map(|e| {
            if segments.is_empty() {
                return Pose2D::new(waypoints[0][0], waypoints[0][1], trajectory.heading);
            }
            let mut s = if trajectory.epochs > 1 {
                total * e as f64 / (trajectory.epochs - 1) as f64
            } else {
                0.0
            };
            for (k, &(a, b, len)) in segments.iter().enumerate() {
                if s < len || k == segments.len() - 1 {
                    let t = (s / len).min(1.0);
                    let heading = (b[1] - a[1]).atan2(b[0] - a[0]);
                    return Pose2D::new(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), heading);
                }
                s -= len;
            }
            unreachable!("non-empty segment list")
        })
        .collect::<Vec<_>>();
    if let Some(p) = poses.iter().find(|p| world.is_occupied(p.position())) {
        return Err(Error::PoseInObstacle { x: p.x, y: p.y });
    }
    Ok(poses)
}

/// Simulates the scenario in memory. Each epoch yields one lidar scan and
/// one radar scan with a shared timestamp.
pub fn simulate_recording(config: &ScenarioConfig) -> Result<Recording> {
    config.validate()?;
    let poses = vehicle_poses(&config.trajectory, &config.world)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut scans = Vec::with_capacity(2 * poses.len());
    for (e, vehicle) in poses.iter().enumerate() {
        let timestamp = e as f64 * config.trajectory.scan_period;
        let mut lidar = simulate_lidar(
            &config.world,
            &vehicle.compose(&config.lidar.extrinsic),
            config.lidar.beam_count,
            config.lidar.max_range,
        )?;
        lidar.timestamp = timestamp;
        lidar.sensor_id = LIDAR_ID;
        let mut radar = simulate_radar(
            &config.world,
            &vehicle.compose(&config.radar.extrinsic),
            config.radar.beam_count,
            config.radar.max_range,
            &config.radar.noise,
            &mut rng,
        )?;
        radar.timestamp = timestamp;
        radar.sensor_id = RADAR_ID;
        scans.push(lidar);
        scans.push(radar);
    }
    let meta = RecordingMeta {
        grid: config.grid,
        sensors: vec![
            SensorSpec {
                id: LIDAR_ID,
                kind: SensorKind::Lidar,
                extrinsic: config.lidar.extrinsic,
                beam_count: config.lidar.beam_count,
                max_range: config.lidar.max_range,
            },
            SensorSpec {
                id: RADAR_ID,
                kind: SensorKind::Radar,
                extrinsic: config.radar.extrinsic,
                beam_count: config.radar.beam_count,
                max_range: config.radar.max_range,
            },
        ],
        world: Some(config.world.clone()),
        seed: Some(config.seed),
        scan_period: config.trajectory.scan_period,
    };
    Ok(Recording { meta, scans })
}

/// Writes the recording plus `ground_truth.evgr`, the true occupancy in the
/// map frame (anchored at the first vehicle pose).
pub fn generate_scenario(config: &ScenarioConfig, out_dir: impl AsRef<Path>) -> Result<Recording> {
    let out_dir = out_dir.as_ref();
    let recording = simulate_recording(config)?;
    recording.save(out_dir)?;
    let anchor = vehicle_poses(&config.trajectory, &config.world)?[0];
    let truth = config.world.ground_truth::<f32>(&config.grid, &anchor);
    write_grid(out_dir.join(GROUND_TRUTH_FILE), &truth)?;
    Ok(recording)
}
