//! Ready-made scenarios used by the examples and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{LidarConfig, RadarConfig, ScenarioConfig, Trajectory};
use super::sensors::RadarNoiseModel;
use super::world::{Bounds, Polygon, World};
use crate::grid::GridGeometry;

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::rectangle([x0, y0], [x1, y1]).expect("preset rectangles are valid")
}

fn quiet_radar() -> RadarConfig {
    RadarConfig {
        noise: RadarNoiseModel {
            ghost_rate: 0.0,
            clutter_rate: 0.0,
            ..RadarNoiseModel::default()
        },
        ..RadarConfig::default()
    }
}

/// Straight corridor with a doorway into a side room.
///
/// The vehicle starts level with the doorway and drives slowly past it, so
/// the room is seen briefly and then stays hidden behind the corridor wall
/// for the rest of the run. No ghosts or clutter.
pub fn corridor(epochs: usize, seed: u64) -> ScenarioConfig {
    let obstacles = vec![
        rect(-28.0, -3.3, 28.0, -3.0),
        rect(-28.0, 3.0, -1.0, 3.3),
        rect(1.0, 3.0, 28.0, 3.3),
        rect(-28.0, 9.0, 28.0, 9.5),
        rect(-6.0, -9.0, -4.0, -7.0),
    ];
    ScenarioConfig {
        world: World {
            extent: Bounds { min: [-30.0, -30.0], max: [30.0, 30.0] },
            obstacles,
        },
        trajectory: Trajectory {
            waypoints: vec![[-2.0, 0.0], [10.0, 0.0]],
            epochs,
            scan_period: 0.1,
            heading: 0.0,
        },
        grid: GridGeometry::bev_default(),
        lidar: LidarConfig::default(),
        radar: quiet_radar(),
        seed,
    }
}

/// Seeded urban street: a road lined with parked cars, sidewalks and
/// building fronts broken by alleys. Default radar noise.
pub fn street(seed: u64, epochs: usize, grid: GridGeometry) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obstacles = Vec::new();
    let (x_min, x_max) = (-38.0, 38.0);
    for side in [-1.0f64, 1.0] {
        let curb = rng.random_range(3.2..4.0);
        let mut x = x_min + rng.random_range(0.0..3.0);
        while x < x_max - 5.0 {
            let length = rng.random_range(3.8..5.0);
            if rng.random_bool(0.8) {
                let (a, b) = (side * curb, side * (curb + 1.8));
                obstacles.push(rect(x, a.min(b), x + length, a.max(b)));
            }
            x += length + rng.random_range(0.8..3.0);
        }
        let front = curb + 1.8 + rng.random_range(2.0..3.5);
        let mut x = x_min;
        while x < x_max - 4.0 {
            let length: f64 = rng.random_range(6.0..16.0);
            let length = length.min(x_max - x);
            let depth = rng.random_range(4.0..8.0);
            let (a, b) = (side * front, side * (front + depth));
            obstacles.push(rect(x, a.min(b), x + length, a.max(b)));
            x += length + rng.random_range(2.0..5.0);
        }
    }
    let start = rng.random_range(-12.0..-8.0);
    ScenarioConfig {
        world: World {
            extent: Bounds { min: [-40.0, -40.0], max: [40.0, 40.0] },
            obstacles,
        },
        trajectory: Trajectory {
            waypoints: vec![[start, 0.0], [start + 16.0, 0.0]],
            epochs,
            scan_period: 0.1,
            heading: 0.0,
        },
        grid,
        lidar: LidarConfig::default(),
        radar: RadarConfig::default(),
        seed,
    }
}

/// Vehicle parked in a walled yard with a few boxes; noise-free radar.
pub fn parked(epochs: usize, seed: u64) -> ScenarioConfig {
    let obstacles = vec![
        rect(-12.0, -12.0, 12.0, -11.0),
        rect(-12.0, 11.0, 12.0, 12.0),
        rect(-12.0, -11.0, -11.0, 11.0),
        rect(11.0, -11.0, 12.0, 11.0),
        rect(3.0, 2.0, 5.0, 4.0),
        rect(-6.0, -5.0, -4.0, -2.0),
        rect(2.0, -7.0, 6.0, -6.0),
    ];
    ScenarioConfig {
        world: World {
            extent: Bounds { min: [-20.0, -20.0], max: [20.0, 20.0] },
            obstacles,
        },
        trajectory: Trajectory {
            waypoints: vec![[0.0, 0.0]],
            epochs,
            scan_period: 0.1,
            heading: 0.3,
        },
        grid: GridGeometry::bev_default(),
        lidar: LidarConfig::default(),
        radar: RadarConfig {
            noise: RadarNoiseModel::noiseless(),
            ..RadarConfig::default()
        },
        seed,
    }
}
