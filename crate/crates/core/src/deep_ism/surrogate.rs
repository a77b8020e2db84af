//! Stand-in for a trained deep radar ISM.
//!
//! The predictor labels every cell against the simulated world as seen from
//! the latest radar position, then scales its confidence by the distance to
//! the nearest radar detection in the window. Occluded cells lean towards
//! occupied, the bias a learned model picks up from LiDAR-derived labels.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::MassFunction;
use crate::geometric_ism::radar_detections;
use crate::grid::{DetectionImage, EvidenceGrid, GridGeometry, Pose2D, Scan, SensorKind};
use crate::scalar::Scalar;
use crate::simulator::World;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateParams {
    /// Committed mass at a detection cell.
    pub certainty_cap: f64,
    /// Metres over which confidence falls by a factor `e`.
    pub distance_decay: f64,
    /// Share of committed mass given to the wrong class in free and occluded cells.
    pub occupied_bias: f64,
    /// Range up to which free space is recognised.
    pub visible_range: f64,
    /// Cells with `exp(−d / decay)` below this stay vacuous.
    pub min_confidence: f64,
    /// Relative multiplicative noise on the committed mass, in `[0, 1]`.
    pub noise: f64,
    pub rng_seed: u64,
    pub angular_bins: usize,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        Self {
            certainty_cap: 0.8,
            distance_decay: 4.0,
            occupied_bias: 0.05,
            visible_range: 15.0,
            min_confidence: 1e-3,
            noise: 0.0,
            rng_seed: 0,
            angular_bins: 3600,
        }
    }
}

impl SurrogateParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(self.certainty_cap > 0.0 && self.certainty_cap <= 1.0) {
            return bad("certainty cap", "must lie in (0, 1]");
        }
        if !(self.distance_decay > 0.0 && self.distance_decay.is_finite()) {
            return bad("distance decay", "must be positive");
        }
        if !(0.0..0.5).contains(&self.occupied_bias) {
            return bad("occupied bias", "must lie in [0, 0.5)");
        }
        if !(self.visible_range > 0.0 && self.visible_range.is_finite()) {
            return bad("visible range", "must be positive");
        }
        if !(0.0..1.0).contains(&self.min_confidence) {
            return bad("min confidence", "must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return bad("surrogate noise", "must lie in [0, 1]");
        }
        if self.angular_bins < 8 {
            return bad("angular bins", "need at least 8");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Free,
    Occupied,
    Occluded,
}

const FAR: f64 = 1e20;

/// One pass of the lower-envelope squared distance transform.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let parabola = |p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
        let mut s = parabola(v[k]);
        while s <= z[k] {
            k -= 1;
            s = parabola(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance, in cells, from every cell to the nearest
/// detection cell. Without detections every entry is at least `1e20`.
pub fn squared_distance_transform(image: &DetectionImage) -> Vec<f64> {
    let g = image.geometry();
    let (w, h) = (g.width, g.height);
    let n = w.max(h);
    let mut grid: Vec<f64> = image.counts().iter().map(|&c| if c > 0 { 0.0 } else { FAR }).collect();
    let mut column = vec![0.0; h];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for ix in 0..w {
        for iy in 0..h {
            column[iy] = grid[iy * w + ix];
        }
        edt_1d(&column, &mut out[..h], &mut v, &mut z);
        for iy in 0..h {
            grid[iy * w + ix] = out[iy];
        }
    }
    grid.par_chunks_mut(w).for_each(|row| {
        let mut out = vec![0.0; w];
        let mut v = vec![0usize; w];
        let mut z = vec![0.0; w + 1];
        edt_1d(row, &mut out, &mut v, &mut z);
        row.copy_from_slice(&out);
    });
    grid
}

/// First-hit ranges from `viewpoint` on `bins` equal bearing sectors.
fn horizon(world: &World, viewpoint: [f64; 2], bins: usize, max_range: f64) -> Vec<f64> {
    (0..bins)
        .into_par_iter()
        .map(|b| {
            let phi = TAU * (b as f64 + 0.5) / bins as f64;
            world
                .first_hit(viewpoint, [phi.cos(), phi.sin()], max_range)
                .map_or(f64::INFINITY, |h| h.range)
        })
        .collect()
}

/// Visibility label of a world point seen from `viewpoint`.
fn classify(world: &World, horizon: &[f64], viewpoint: [f64; 2], p: [f64; 2], visible_range: f64, depth: f64) -> Visibility {
    let v = [p[0] - viewpoint[0], p[1] - viewpoint[1]];
    let rho = v[0].hypot(v[1]);
    let bins = horizon.len();
    let bin = ((v[1].atan2(v[0]).rem_euclid(TAU) / TAU * bins as f64) as usize).min(bins - 1);
    let hit = horizon[bin];
    if world.is_occupied(p) {
        if rho <= hit + depth && rho <= visible_range + depth {
            Visibility::Occupied
        } else {
            Visibility::Occluded
        }
    } else if rho < hit && rho <= visible_range {
        Visibility::Free
    } else {
        Visibility::Occluded
    }
}

/// Per-cell visibility of `geometry` placed in the world at `frame`.
pub fn visibility_labels(world: &World, viewpoint: [f64; 2], frame: &Pose2D, geometry: &GridGeometry, params: &SurrogateParams) -> Vec<Visibility> {
    let depth = 2.0 * geometry.resolution;
    let table = horizon(world, viewpoint, params.angular_bins, params.visible_range + depth);
    (0..geometry.len())
        .into_par_iter()
        .map(|i| {
            let (ix, iy) = geometry.coords(i);
            let p = frame.transform_point(geometry.cell_center(ix, iy));
            classify(world, &table, viewpoint, p, params.visible_range, depth)
        })
        .collect()
}

fn label_mass<T: Scalar>(label: Visibility, k: f64, bias: f64) -> MassFunction<T> {
    let (f, o) = match label {
        Visibility::Free => ((1.0 - bias) * k, bias * k),
        Visibility::Occupied => (0.0, k),
        Visibility::Occluded => (0.0, bias * k),
    };
    MassFunction::from_committed(T::lit(f), T::lit(o)).expect("committed mass below one")
}

/// Deep-ISM prediction for a window of radar scans.
///
/// `scans` have sensor poses in the grid frame; `frame` places that grid in
/// the world. `draw` selects the noise stream, so equal inputs and draws give
/// equal predictions.
pub fn surrogate_predict<T: Scalar>(
    scans: &[Scan],
    world: &World,
    frame: &Pose2D,
    params: &SurrogateParams,
    geometry: &GridGeometry,
    draw: u64,
) -> Result<EvidenceGrid<T>> {
    params.validate()?;
    geometry.validate()?;
    if let Some(scan) = scans.iter().find(|s| s.sensor_kind != SensorKind::Radar) {
        return Err(Error::InvalidParameter {
            name: "deep ISM input",
            reason: format!("sensor {} is a {}", scan.sensor_id, scan.sensor_kind.as_str()),
        });
    }
    let Some(latest) = scans.last() else {
        return Ok(EvidenceGrid::new(*geometry, "prediction"));
    };
    let detections = radar_detections(scans, geometry);
    if detections.total() == 0 {
        return Ok(EvidenceGrid::new(*geometry, "prediction"));
    }
    let distance = squared_distance_transform(&detections);
    let viewpoint = frame.transform_point(latest.sensor_pose.position());
    let depth = 2.0 * geometry.resolution;
    let table = horizon(world, viewpoint, params.angular_bins, params.visible_range + depth);
    let (sin, cos) = frame.theta.sin_cos();
    let cutoff = -params.distance_decay * params.min_confidence.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed ^ draw.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let jitter: Vec<f64> = if params.noise > 0.0 {
        (0..geometry.len()).map(|_| 1.0 - params.noise * rng.random::<f64>()).collect()
    } else {
        Vec::new()
    };
    let cells = (0..geometry.len())
        .into_par_iter()
        .map(|i| {
            let d = distance[i].sqrt() * geometry.resolution;
            if d > cutoff {
                return MassFunction::vacuous();
            }
            let mut k = params.certainty_cap * (-d / params.distance_decay).exp();
            if let Some(j) = jitter.get(i) {
                k *= j;
            }
            let (ix, iy) = geometry.coords(i);
            let q = geometry.cell_center(ix, iy);
            let p = [frame.x + cos * q[0] - sin * q[1], frame.y + sin * q[0] + cos * q[1]];
            let label = classify(world, &table, viewpoint, p, params.visible_range, depth);
            label_mass(label, k, params.occupied_bias)
        })
        .collect();
    EvidenceGrid::from_cells(*geometry, "prediction", cells)
}
