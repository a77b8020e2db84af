use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::MassFunction;
use crate::grid::{DetectionImage, EvidenceGrid, GridGeometry, Scan, SensorKind};
use crate::scalar::Scalar;

/// Parameters of the cone-casting inverse radar model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RayIrmParams {
    /// Number of most recent radar scans combined into one update.
    pub history_depth: usize,
    /// Full opening angle of each cone, in degrees.
    pub cone_angle: f64,
    pub m_free: f64,
    pub m_occupied: f64,
    /// Detections farther than this from their sensor cast no cone.
    pub max_range: f64,
}

impl Default for RayIrmParams {
    fn default() -> Self {
        Self {
            history_depth: 10,
            cone_angle: 2.0,
            m_free: 0.3,
            m_occupied: 0.5,
            max_range: 20.0,
        }
    }
}

impl RayIrmParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if self.history_depth == 0 {
            return bad("ray IRM history depth", "must be at least 1");
        }
        if !(self.cone_angle > 0.0 && self.cone_angle < 180.0) {
            return bad("ray IRM cone angle", "must lie in (0, 180) degrees");
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return bad("ray IRM max range", "must be positive");
        }
        for (name, m) in [("ray IRM occupied mass", self.m_occupied), ("ray IRM free mass", self.m_free)] {
            if !(m > 0.0 && m < 1.0) {
                return bad(name, "must lie in (0, 1)");
            }
        }
        Ok(())
    }
}

/// A detection's cone: apex at the sensor, axis towards the detection, and an
/// occluding arc at the detection range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub apex: [f64; 2],
    pub axis: [f64; 2],
    pub range: f64,
}

#[derive(Debug, Clone, Copy)]
struct Aperture {
    tan_half: f64,
    cos_half: f64,
    sin_half: f64,
}

impl Aperture {
    fn new(cone_angle_deg: f64) -> Self {
        let half = (cone_angle_deg / 2.0).to_radians();
        Self {
            tan_half: half.tan(),
            cos_half: half.cos(),
            sin_half: half.sin(),
        }
    }

    /// Whether `v` points within the half-angle of `axis`.
    #[inline]
    fn admits(&self, axis: [f64; 2], v: [f64; 2]) -> bool {
        let along = axis[0] * v[0] + axis[1] * v[1];
        let across = axis[0] * v[1] - axis[1] * v[0];
        along > 0.0 && across.abs() <= self.tan_half * along
    }
}

impl Cone {
    fn rotated_axis(&self, cos: f64, sin: f64) -> [f64; 2] {
        [self.axis[0] * cos - self.axis[1] * sin, self.axis[0] * sin + self.axis[1] * cos]
    }

    /// Whether the segment `from → to` touches this cone's occluding arc.
    #[inline]
    fn arc_blocks(&self, aperture: &Aperture, from: [f64; 2], to: [f64; 2]) -> bool {
        let d = [to[0] - from[0], to[1] - from[1]];
        let f = [from[0] - self.apex[0], from[1] - self.apex[1]];
        let a = d[0] * d[0] + d[1] * d[1];
        let b = 2.0 * (f[0] * d[0] + f[1] * d[1]);
        let c = f[0] * f[0] + f[1] * f[1] - self.range * self.range;
        let disc = b * b - 4.0 * a * c;
        if a == 0.0 || disc < 0.0 {
            return false;
        }
        let root = disc.sqrt();
        [(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)].into_iter().any(|t| {
            (0.0..=1.0).contains(&t) && {
                let p = [f[0] + t * d[0], f[1] + t * d[1]];
                aperture.admits(self.axis, p)
            }
        })
    }

    /// Axis-aligned box containing the occluding arc.
    fn arc_bounds(&self, aperture: &Aperture) -> [f64; 4] {
        let mut bounds = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for dir in [
            self.axis,
            self.rotated_axis(aperture.cos_half, aperture.sin_half),
            self.rotated_axis(aperture.cos_half, -aperture.sin_half),
        ] {
            let p = [self.apex[0] + self.range * dir[0], self.apex[1] + self.range * dir[1]];
            bounds = [bounds[0].min(p[0]), bounds[1].min(p[1]), bounds[2].max(p[0]), bounds[3].max(p[1])];
        }
        let sagitta = self.range * (1.0 - aperture.cos_half) + 1e-9;
        [bounds[0] - sagitta, bounds[1] - sagitta, bounds[2] + sagitta, bounds[3] + sagitta]
    }

    /// Triangle enclosing the cone's sector.
    fn hull(&self, aperture: &Aperture) -> [[f64; 2]; 3] {
        let reach = self.range / aperture.cos_half;
        let left = self.rotated_axis(aperture.cos_half, aperture.sin_half);
        let right = self.rotated_axis(aperture.cos_half, -aperture.sin_half);
        [
            self.apex,
            [self.apex[0] + reach * left[0], self.apex[1] + reach * left[1]],
            [self.apex[0] + reach * right[0], self.apex[1] + reach * right[1]],
        ]
    }

    /// Whether `q` lies strictly inside the cone's sector.
    #[inline]
    fn covers(&self, aperture: &Aperture, q: [f64; 2]) -> bool {
        let v = [q[0] - self.apex[0], q[1] - self.apex[1]];
        v[0] * v[0] + v[1] * v[1] < self.range * self.range && aperture.admits(self.axis, v)
    }
}

/// Cones cast by the detections of `scans` (sensor poses in the grid frame).
pub fn cones(scans: &[Scan], params: &RayIrmParams) -> Vec<Cone> {
    let mut out = Vec::new();
    for scan in scans {
        let apex = scan.sensor_pose.position();
        for p in scan.points_in_frame() {
            let v = [p[0] - apex[0], p[1] - apex[1]];
            let range = v[0].hypot(v[1]);
            if range > 0.0 && range <= params.max_range {
                out.push(Cone {
                    apex,
                    axis: [v[0] / range, v[1] / range],
                    range,
                });
            }
        }
    }
    out
}

/// Buckets arcs on a coarse lattice so each cone only tests nearby occluders.
struct ArcIndex {
    origin: [f64; 2],
    size: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
    bounds: Vec<[f64; 4]>,
}

impl ArcIndex {
    fn new(cones: &[Cone], aperture: &Aperture, geometry: &GridGeometry) -> Self {
        let size = geometry.resolution * 32.0;
        let cols = geometry.width.div_ceil(32);
        let rows = geometry.height.div_ceil(32);
        let mut index = Self {
            origin: geometry.origin,
            size,
            cols,
            rows,
            buckets: vec![Vec::new(); cols * rows],
            bounds: cones.iter().map(|c| c.arc_bounds(aperture)).collect(),
        };
        for j in 0..cones.len() {
            let b = index.bounds[j];
            if let Some((x0, y0, x1, y1)) = index.span(b) {
                for by in y0..=y1 {
                    for bx in x0..=x1 {
                        index.buckets[by * cols + bx].push(j as u32);
                    }
                }
            }
        }
        index
    }

    fn span(&self, b: [f64; 4]) -> Option<(usize, usize, usize, usize)> {
        let lo = |v: f64, o: f64, n: usize| (((v - o) / self.size).floor().max(0.0) as usize).min(n - 1);
        let (fx0, fy0) = ((b[0] - self.origin[0]) / self.size, (b[1] - self.origin[1]) / self.size);
        let (fx1, fy1) = ((b[2] - self.origin[0]) / self.size, (b[3] - self.origin[1]) / self.size);
        if fx1 < 0.0 || fy1 < 0.0 || fx0 >= self.cols as f64 || fy0 >= self.rows as f64 {
            return None;
        }
        Some((
            lo(b[0], self.origin[0], self.cols),
            lo(b[1], self.origin[1], self.rows),
            lo(b[2], self.origin[0], self.cols),
            lo(b[3], self.origin[1], self.rows),
        ))
    }

    /// Arcs other than `skip` whose bounds overlap `b`, in ascending order.
    fn candidates(&self, b: [f64; 4], skip: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some((x0, y0, x1, y1)) = self.span(b) {
            for by in y0..=y1 {
                for bx in x0..=x1 {
                    for &j in &self.buckets[by * self.cols + bx] {
                        let a = self.bounds[j as usize];
                        if j as usize != skip && a[0] <= b[2] && a[2] >= b[0] && a[1] <= b[3] && a[3] >= b[1] {
                            out.push(j as usize);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Separating-axis test between an axis-aligned box and a triangle.
fn box_meets_triangle(b: [f64; 4], tri: &[[f64; 2]; 3]) -> bool {
    let corners = [[b[0], b[1]], [b[2], b[1]], [b[2], b[3]], [b[0], b[3]]];
    for k in 0..3 {
        let (p, q) = (tri[k], tri[(k + 1) % 3]);
        let n = [q[1] - p[1], p[0] - q[0]];
        let dot = |v: [f64; 2]| n[0] * v[0] + n[1] * v[1];
        let t = tri.iter().map(|&v| dot(v));
        let (t_lo, t_hi) = t.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        let c = corners.iter().map(|&v| dot(v));
        let (c_lo, c_hi) = c.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        if c_hi < t_lo || c_lo > t_hi {
            return false;
        }
    }
    true
}

/// Cells whose centres lie in a cone's free region: inside the sector, short
/// of the cone's own detection, and not behind any other cone's arc.
fn cast_cone(
    i: usize,
    cones: &[Cone],
    aperture: &Aperture,
    index: &ArcIndex,
    geometry: &GridGeometry,
    mut mark: impl FnMut(usize),
) {
    let cone = &cones[i];
    let hull = cone.hull(aperture);
    let bounds = [
        hull.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        hull.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
        hull.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max),
        hull.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max),
    ];
    let blockers: Vec<&Cone> = index
        .candidates(bounds, i)
        .into_iter()
        .filter(|&j| box_meets_triangle(index.bounds[j], &hull))
        .map(|j| &cones[j])
        .collect();
    let res = geometry.resolution;
    let to_row = |y: f64| ((y - geometry.origin[1]) / res - 0.5).floor();
    let row_lo = to_row(bounds[1]).max(0.0) as i64;
    let row_hi = (to_row(bounds[3]) + 1.0).min(geometry.height as f64 - 1.0) as i64;
    for iy in row_lo..=row_hi {
        let yc = geometry.origin[1] + (iy as f64 + 0.5) * res;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..3 {
            let (p, q) = (hull[k], hull[(k + 1) % 3]);
            if (p[1] - yc) * (q[1] - yc) <= 0.0 {
                let x = if p[1] == q[1] { p[0].min(q[0]) } else { p[0] + (yc - p[1]) / (q[1] - p[1]) * (q[0] - p[0]) };
                let x2 = if p[1] == q[1] { p[0].max(q[0]) } else { x };
                lo = lo.min(x);
                hi = hi.max(x2);
            }
        }
        if lo > hi {
            continue;
        }
        let col_lo = (((lo - geometry.origin[0]) / res - 0.5).floor() - 1.0).max(0.0) as i64;
        let col_hi = (((hi - geometry.origin[0]) / res - 0.5).ceil() + 1.0).min(geometry.width as f64 - 1.0) as i64;
        for ix in col_lo..=col_hi {
            let q = geometry.cell_center(ix as usize, iy as usize);
            if cone.covers(aperture, q) && !blockers.iter().any(|b| b.arc_blocks(aperture, cone.apex, q)) {
                mark(geometry.index(ix as usize, iy as usize));
            }
        }
    }
}

/// Detection cells of the radar window.
pub fn radar_detections(scans: &[Scan], geometry: &GridGeometry) -> DetectionImage {
    let mut image = DetectionImage::new(*geometry);
    for scan in scans {
        for p in scan.points_in_frame() {
            image.add(p);
        }
    }
    image
}

/// Inverse radar model over the most recent `history_depth` scans.
///
/// Each detection within range casts a cone from its sensor position. Every
/// cone's arc at its detection range occludes the other cones; a cell is free
/// when its centre lies in some cone's sector before that cone's detection
/// and no foreign arc crosses the line of sight. Detection cells are occupied
/// and override free. Sensor poses must be expressed in the grid frame.
pub fn ray_irm<T: Scalar>(scans: &[Scan], params: &RayIrmParams, geometry: &GridGeometry) -> Result<EvidenceGrid<T>> {
    params.validate()?;
    geometry.validate()?;
    if let Some(scan) = scans.iter().find(|s| s.sensor_kind != SensorKind::Radar) {
        return Err(Error::InvalidParameter {
            name: "ray IRM input",
            reason: format!("sensor {} is a {}", scan.sensor_id, scan.sensor_kind.as_str()),
        });
    }
    let window = &scans[scans.len().saturating_sub(params.history_depth)..];
    let aperture = Aperture::new(params.cone_angle);
    let cones = cones(window, params);
    let index = ArcIndex::new(&cones, &aperture, geometry);
    let free: Vec<AtomicBool> = (0..geometry.len()).map(|_| AtomicBool::new(false)).collect();
    (0..cones.len()).into_par_iter().for_each(|i| {
        cast_cone(i, &cones, &aperture, &index, geometry, |cell| free[cell].store(true, Ordering::Relaxed));
    });

    let detections = radar_detections(window, geometry);
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
    EvidenceGrid::from_cells(*geometry, "ray_irm", cells)
}
