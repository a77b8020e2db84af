//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use evigrid::{GridGeometry, Pose2D, Scan, ScanPoint, SensorKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cell label produced by the oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Vacuous,
    Free,
    Occupied,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn detection_cells(geometry: &GridGeometry, points: impl Iterator<Item = [f64; 2]>) -> Vec<bool> {
    let mut hit = vec![false; geometry.width * geometry.height];
    for p in points {
        let fx = ((p[0] - geometry.origin[0]) / geometry.resolution).floor();
        let fy = ((p[1] - geometry.origin[1]) / geometry.resolution).floor();
        if fx >= 0.0 && fy >= 0.0 && fx < geometry.width as f64 && fy < geometry.height as f64 {
            hit[fy as usize * geometry.width + fx as usize] = true;
        }
    }
    hit
}

fn sensor_point(pose: &Pose2D, p: &ScanPoint) -> [f64; 2] {
    let (s, c) = pose.theta.sin_cos();
    [pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y]
}

/// Parametric interval `[t_in, t_out]` of the ray inside one closed slab.
fn slab(origin: f64, dir: f64, lo: f64, hi: f64) -> (f64, f64) {
    if dir == 0.0 {
        if origin >= lo && origin <= hi {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (f64::INFINITY, f64::NEG_INFINITY)
        }
    } else {
        let (a, b) = ((lo - origin) / dir, (hi - origin) / dir);
        (a.min(b), a.max(b))
    }
}

/// Line-of-sight oracle for the lidar model. Every ray is intersected with
/// every cell square; a cell is free on a ray when the ray enters it within
/// range and strictly before it enters any detection cell.
pub fn ilm_oracle(
    scan: &Scan,
    geometry: &GridGeometry,
    z_band: (f64, f64),
    step_deg: f64,
    max_range: f64,
) -> Vec<Label> {
    let (w, h) = (geometry.width, geometry.height);
    let detections = detection_cells(
        geometry,
        scan.points
            .iter()
            .filter(|p| p.z >= z_band.0 && p.z <= z_band.1)
            .map(|p| sensor_point(&scan.sensor_pose, p)),
    );
    let u0 = [
        (scan.sensor_pose.x - geometry.origin[0]) / geometry.resolution,
        (scan.sensor_pose.y - geometry.origin[1]) / geometry.resolution,
    ];
    let mut free = vec![false; w * h];
    let rays = (360.0 / step_deg).round() as usize;
    let mut entries = vec![f64::INFINITY; w * h];
    for k in 0..rays {
        let angle = scan.sensor_pose.theta + k as f64 * step_deg.to_radians();
        let d = [angle.cos() / geometry.resolution, angle.sin() / geometry.resolution];
        let mut first_block = f64::INFINITY;
        for iy in 0..h {
            for ix in 0..w {
                let (ax, bx) = slab(u0[0], d[0], ix as f64, ix as f64 + 1.0);
                let (ay, by) = slab(u0[1], d[1], iy as f64, iy as f64 + 1.0);
                let (t_in, t_out) = (ax.max(ay), bx.min(by));
                let entry = if t_in <= t_out && t_out >= 0.0 { t_in.max(0.0) } else { f64::INFINITY };
                entries[iy * w + ix] = entry;
                if detections[iy * w + ix] {
                    first_block = first_block.min(entry);
                }
            }
        }
        for (cell, &entry) in entries.iter().enumerate() {
            if entry <= max_range && entry < first_block {
                free[cell] = true;
            }
        }
    }
    (0..w * h)
        .map(|i| {
            if detections[i] {
                Label::Occupied
            } else if free[i] {
                Label::Free
            } else {
                Label::Vacuous
            }
        })
        .collect()
}

/// Wedge oracle for the radar model, written with polar angles and
/// chord–circle intersection.
pub fn irm_oracle(scans: &[Scan], geometry: &GridGeometry, cone_deg: f64, max_range: f64) -> Vec<Label> {
    let half = (cone_deg / 2.0).to_radians();
    struct Wedge {
        apex: [f64; 2],
        bearing: f64,
        range: f64,
    }
    let mut wedges = vec![];
    let mut points = vec![];
    for scan in scans {
        for p in &scan.points {
            let q = sensor_point(&scan.sensor_pose, p);
            points.push(q);
            let (dx, dy) = (q[0] - scan.sensor_pose.x, q[1] - scan.sensor_pose.y);
            let range = (dx * dx + dy * dy).sqrt();
            if range > 0.0 && range <= max_range {
                wedges.push(Wedge {
                    apex: [scan.sensor_pose.x, scan.sensor_pose.y],
                    bearing: dy.atan2(dx),
                    range,
                });
            }
        }
    }
    let within = |angle: f64, bearing: f64| {
        let mut delta = (angle - bearing).rem_euclid(2.0 * PI);
        if delta > PI {
            delta -= 2.0 * PI;
        }
        delta.abs() <= half
    };
    let detections = detection_cells(geometry, points.into_iter());
    let (w, h) = (geometry.width, geometry.height);
    let mut labels = vec![Label::Vacuous; w * h];
    for iy in 0..h {
        for ix in 0..w {
            let cell = iy * w + ix;
            if detections[cell] {
                labels[cell] = Label::Occupied;
                continue;
            }
            let q = [
                geometry.origin[0] + (ix as f64 + 0.5) * geometry.resolution,
                geometry.origin[1] + (iy as f64 + 0.5) * geometry.resolution,
            ];
            let seen = wedges.iter().enumerate().any(|(i, wi)| {
                let (vx, vy) = (q[0] - wi.apex[0], q[1] - wi.apex[1]);
                let dist = (vx * vx + vy * vy).sqrt();
                if !(dist < wi.range && dist > 0.0 && within(vy.atan2(vx), wi.bearing)) {
                    return false;
                }
                let u = [vx / dist, vy / dist];
                !wedges.iter().enumerate().any(|(j, wj)| {
                    if i == j {
                        return false;
                    }
                    let along = (wj.apex[0] - wi.apex[0]) * u[0] + (wj.apex[1] - wi.apex[1]) * u[1];
                    let foot = [wi.apex[0] + along * u[0], wi.apex[1] + along * u[1]];
                    let off2 = (wj.apex[0] - foot[0]).powi(2) + (wj.apex[1] - foot[1]).powi(2);
                    let chord2 = wj.range * wj.range - off2;
                    if chord2 < 0.0 {
                        return false;
                    }
                    let half_chord = chord2.sqrt();
                    [along - half_chord, along + half_chord].into_iter().any(|lambda| {
                        if !(0.0..=dist).contains(&lambda) {
                            return false;
                        }
                        let p = [wi.apex[0] + lambda * u[0], wi.apex[1] + lambda * u[1]];
                        within((p[1] - wj.apex[1]).atan2(p[0] - wj.apex[0]), wj.bearing)
                    })
                })
            });
            if seen {
                labels[cell] = Label::Free;
            }
        }
    }
    labels
}

pub fn label_of(m: &evigrid::Mass) -> Label {
    if m.is_vacuous() {
        Label::Vacuous
    } else if m.occupied() > 0.0 {
        Label::Occupied
    } else {
        Label::Free
    }
}

fn random_wall(rng: &mut ChaCha8Rng, extent: f64, points: &mut Vec<[f64; 2]>) {
    let a = [rng.random_range(-extent..extent), rng.random_range(-extent..extent)];
    let angle: f64 = rng.random_range(0.0..2.0 * PI);
    let len: f64 = rng.random_range(0.5..extent);
    let n = rng.random_range(2..30);
    for k in 0..n {
        let s = len * k as f64 / n as f64;
        points.push([a[0] + s * angle.cos(), a[1] + s * angle.sin()]);
    }
}

/// Random lidar scan in a grid centred on the origin: a few walls sampled as
/// point rows plus scattered points, some of them below the height band.
pub fn random_lidar_scene(seed: u64, geometry: &GridGeometry) -> Scan {
    let mut rng = rng(seed);
    let extent = geometry.width as f64 * geometry.resolution / 2.0;
    let pose = Pose2D::new(
        rng.random_range(-0.8 * extent..0.8 * extent),
        rng.random_range(-0.8 * extent..0.8 * extent),
        rng.random_range(-PI..PI),
    );
    let mut world = vec![];
    for _ in 0..rng.random_range(0..5) {
        random_wall(&mut rng, extent, &mut world);
    }
    for _ in 0..rng.random_range(0..20) {
        world.push([rng.random_range(-extent..extent), rng.random_range(-extent..extent)]);
    }
    let points = world
        .into_iter()
        .map(|p| {
            let q = pose.inverse_transform_point(p);
            let z = if rng.random_bool(0.15) { rng.random_range(0.0..0.3) } else { rng.random_range(0.3..3.0) };
            ScanPoint::new(q[0], q[1], z)
        })
        .collect();
    Scan {
        timestamp: 0.0,
        sensor_pose: pose,
        sensor_kind: SensorKind::Lidar,
        sensor_id: 0,
        points,
    }
}

/// Random radar window: up to ten scans from nearby sensor positions, each
/// with sparse detections on walls and some clutter.
pub fn random_radar_scene(seed: u64, geometry: &GridGeometry) -> Vec<Scan> {
    let mut rng = rng(seed);
    let extent = geometry.width as f64 * geometry.resolution / 2.0;
    let mut world = vec![];
    for _ in 0..rng.random_range(1..5) {
        random_wall(&mut rng, extent * 1.2, &mut world);
    }
    let scans = rng.random_range(1..=10);
    (0..scans)
        .map(|k| {
            let pose = Pose2D::new(
                rng.random_range(-0.7 * extent..0.7 * extent),
                rng.random_range(-0.7 * extent..0.7 * extent),
                rng.random_range(-PI..PI),
            );
            let mut points: Vec<ScanPoint> = world
                .iter()
                .filter(|_| rng.random_bool(0.3))
                .map(|&p| {
                    let q = pose.inverse_transform_point(p);
                    ScanPoint::new(q[0], q[1], 0.0)
                })
                .collect();
            for _ in 0..rng.random_range(0..4) {
                let r: f64 = rng.random_range(0.2..extent * 1.5);
                let a: f64 = rng.random_range(-PI..PI);
                points.push(ScanPoint::new(r * a.cos(), r * a.sin(), 0.0));
            }
            Scan {
                timestamp: k as f64,
                sensor_pose: pose,
                sensor_kind: SensorKind::Radar,
                sensor_id: 1,
                points,
            }
        })
        .collect()
}
