//! Scan recordings on disk.
//!
//! A recording is a directory holding `scans.csv` (one row per detection,
//! a single row with empty point fields for an empty scan) and `meta.json`
//! (grid geometry, sensor extrinsics and, for simulated runs, the world).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridGeometry, Pose2D, Scan, ScanPoint, SensorKind};
use crate::simulator::World;

pub const SCANS_FILE: &str = "scans.csv";
pub const META_FILE: &str = "meta.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.evgr";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub id: u16,
    pub kind: SensorKind,
    /// Mounting pose in the vehicle frame.
    pub extrinsic: Pose2D,
    pub beam_count: usize,
    pub max_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub grid: GridGeometry,
    pub sensors: Vec<SensorSpec>,
    #[serde(default)]
    pub world: Option<World>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub scan_period: f64,
}

impl RecordingMeta {
    pub fn sensor(&self, id: u16) -> Option<&SensorSpec> {
        self.sensors.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub meta: RecordingMeta,
    /// Scans in timestamp order; sensor poses in the world frame.
    pub scans: Vec<Scan>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    timestamp: f64,
    sensor_id: u16,
    sensor_kind: String,
    pose_x: f64,
    pose_y: f64,
    pose_theta: f64,
    point_x: Option<f64>,
    point_y: Option<f64>,
    point_z: Option<f64>,
}

impl Recording {
    /// Scans grouped into epochs of equal timestamp, in order.
    pub fn epochs(&self) -> Vec<&[Scan]> {
        self.scans.chunk_by(|a, b| a.timestamp == b.timestamp).collect()
    }

    pub fn has_kind(&self, kind: SensorKind) -> bool {
        self.scans.iter().any(|s| s.sensor_kind == kind)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let scans_path = dir.join(SCANS_FILE);
        let mut writer = csv::Writer::from_path(&scans_path).map_err(|e| csv_error(&scans_path, e))?;
        for scan in &self.scans {
            let row = |p: Option<&ScanPoint>| Row {
                timestamp: scan.timestamp,
                sensor_id: scan.sensor_id,
                sensor_kind: scan.sensor_kind.as_str().to_string(),
                pose_x: scan.sensor_pose.x,
                pose_y: scan.sensor_pose.y,
                pose_theta: scan.sensor_pose.theta,
                point_x: p.map(|p| p.x),
                point_y: p.map(|p| p.y),
                point_z: p.map(|p| p.z),
            };
            if scan.points.is_empty() {
                writer.serialize(row(None)).map_err(|e| csv_error(&scans_path, e))?;
            }
            for p in &scan.points {
                writer.serialize(row(Some(p))).map_err(|e| csv_error(&scans_path, e))?;
            }
        }
        writer.flush().map_err(|e| Error::io(&scans_path, e))?;

        let meta_path = dir.join(META_FILE);
        let json = serde_json::to_string_pretty(&self.meta).expect("metadata serializes");
        fs::write(&meta_path, json + "\n").map_err(|e| Error::io(&meta_path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta_path = dir.join(META_FILE);
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: RecordingMeta =
            serde_json::from_str(&text).map_err(|e| Error::format(&meta_path, "recording metadata", e.to_string()))?;
        meta.grid.validate().map_err(|e| Error::format(&meta_path, "grid geometry", e.to_string()))?;

        let scans_path = dir.join(SCANS_FILE);
        let mut reader = csv::Reader::from_path(&scans_path).map_err(|e| csv_error(&scans_path, e))?;
        let mut scans: Vec<Scan> = Vec::new();
        for (line, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| csv_error(&scans_path, e))?;
            let at = |detail: String| Error::format(&scans_path, "scan row", format!("data row {}: {detail}", line + 1));
            let kind = SensorKind::parse(&row.sensor_kind).ok_or_else(|| at(format!("sensor_kind {:?}", row.sensor_kind)))?;
            let pose = Pose2D::new(row.pose_x, row.pose_y, row.pose_theta);
            if ![row.timestamp, pose.x, pose.y, pose.theta].iter().all(|v| v.is_finite()) {
                return Err(at("non-finite timestamp or pose".into()));
            }
            let point = match (row.point_x, row.point_y, row.point_z) {
                (Some(x), Some(y), z) => {
                    let p = ScanPoint::new(x, y, z.unwrap_or(0.0));
                    if !p.is_finite() {
                        return Err(at("non-finite point".into()));
                    }
                    Some(p)
                }
                (None, None, None) => None,
                _ => return Err(at("partial point".into())),
            };
            let continues = scans.last().is_some_and(|s: &Scan| {
                s.timestamp == row.timestamp && s.sensor_id == row.sensor_id && s.sensor_pose == pose && s.sensor_kind == kind
            });
            if !continues {
                if let Some(last) = scans.last() {
                    if row.timestamp < last.timestamp {
                        return Err(at(format!("timestamp {} goes backwards", row.timestamp)));
                    }
                }
                scans.push(Scan {
                    timestamp: row.timestamp,
                    sensor_pose: pose,
                    sensor_kind: kind,
                    sensor_id: row.sensor_id,
                    points: Vec::new(),
                });
            }
            if let Some(p) = point {
                scans.last_mut().expect("pushed above").points.push(p);
            }
        }
        Ok(Self { meta, scans })
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::format(path, "scan table", e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Recording {
        let meta = RecordingMeta {
            grid: GridGeometry::centered(16, 0.5),
            sensors: vec![SensorSpec {
                id: 1,
                kind: SensorKind::Radar,
                extrinsic: Pose2D::new(1.5, 0.0, 0.0),
                beam_count: 90,
                max_range: 20.0,
            }],
            world: None,
            seed: Some(3),
            scan_period: 0.1,
        };
        let scan = |t: f64, points: Vec<ScanPoint>| Scan {
            timestamp: t,
            sensor_pose: Pose2D::new(t, 0.1 + t, 0.3),
            sensor_kind: SensorKind::Radar,
            sensor_id: 1,
            points,
        };
        Recording {
            meta,
            scans: vec![
                scan(0.0, vec![ScanPoint::new(1.0 / 3.0, 2.0, 0.0), ScanPoint::new(-4.0, 1e-17, 0.0)]),
                scan(0.1, vec![]),
                scan(0.2, vec![ScanPoint::new(7.25, 0.5, 0.0)]),
            ],
        }
    }

    #[test]
    fn round_trip_preserves_scans_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let rec = sample();
        rec.save(dir.path()).unwrap();
        let back = Recording::load(dir.path()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.epochs().len(), 3);
        let text = fs::read_to_string(dir.path().join(SCANS_FILE)).unwrap();
        assert!(text.starts_with("timestamp,sensor_id,sensor_kind,pose_x,pose_y,pose_theta,point_x,point_y,point_z\n"));
        assert!(text.contains("0.1,1,radar,0.1,0.2,0.3,,,\n"));
    }

    #[test]
    fn malformed_rows_are_reported_with_position() {
        let dir = tempfile::tempdir().unwrap();
        sample().save(dir.path()).unwrap();
        let path = dir.path().join(SCANS_FILE);
        let text = fs::read_to_string(&path).unwrap().replace("radar", "sonar");
        fs::write(&path, text).unwrap();
        let err = Recording::load(dir.path()).unwrap_err().to_string();
        assert!(err.contains("data row 1") && err.contains("sonar"), "{err}");

        let missing = Recording::load(dir.path().join("nope")).unwrap_err();
        assert!(matches!(missing, Error::Io { .. }));
    }

    #[test]
    fn backwards_timestamps_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = sample();
        rec.scans.swap(0, 2);
        rec.save(dir.path()).unwrap();
        assert!(Recording::load(dir.path()).unwrap_err().to_string().contains("backwards"));
    }
}
