use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mapper::{MappingVariant, PipelineParams};
use crate::error::{Error, Result};
use crate::evidence::MassFunction;
use crate::grid::EvidenceGrid;
use crate::recording::RecordingMeta;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    Free,
    Occupied,
    Unknown,
}

/// Argmax over `(m_f, m_o, m_u)`; any tie counts as unknown.
pub fn classify<T: Scalar>(m: &MassFunction<T>) -> CellClass {
    let (f, o, u) = (m.free(), m.occupied(), m.unknown());
    if f > o && f > u {
        CellClass::Free
    } else if o > f && o > u {
        CellClass::Occupied
    } else {
        CellClass::Unknown
    }
}

/// Per-class intersection over union, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassIou {
    pub free: f64,
    pub occupied: f64,
    pub unknown: f64,
}

/// IoU of every class between two grids of equal geometry. A class absent
/// from both grids scores 100.
pub fn evaluate<T: Scalar>(map: &EvidenceGrid<T>, reference: &EvidenceGrid<T>) -> Result<ClassIou> {
    if map.geometry() != reference.geometry() {
        return Err(Error::GeometryMismatch(format!("{:?} vs {:?}", map.geometry(), reference.geometry())));
    }
    let mut inter = [0u64; 3];
    let mut union = [0u64; 3];
    let slot = |c: CellClass| c as usize;
    for (a, b) in map.cells().iter().zip(reference.cells()) {
        let (ca, cb) = (classify(a), classify(b));
        if ca == cb {
            inter[slot(ca)] += 1;
            union[slot(ca)] += 1;
        } else {
            union[slot(ca)] += 1;
            union[slot(cb)] += 1;
        }
    }
    let iou = |k: usize| if union[k] == 0 { 100.0 } else { 100.0 * inter[k] as f64 / union[k] as f64 };
    Ok(ClassIou {
        free: iou(0),
        occupied: iou(1),
        unknown: iou(2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochScore {
    pub epoch: usize,
    pub timestamp: f64,
    pub iou: ClassIou,
}

/// Scores of one variant's run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: MappingVariant,
    /// Final map against the final ray-ILM reference map.
    pub iou: ClassIou,
    /// Final map against the simulated world, when known.
    pub ground_truth_iou: Option<ClassIou>,
    pub series: Vec<EpochScore>,
    pub config_hash: String,
}

/// Hex SHA-256 of the run parameters and recording metadata.
pub fn config_hash(params: &PipelineParams, meta: &RecordingMeta, scan_count: usize) -> String {
    let doc = serde_json::json!({ "params": params, "recording": meta, "scans": scan_count });
    let digest = Sha256::digest(doc.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl EvalReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("reports serialize");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, "report", e.to_string()))
    }

    /// One row per epoch plus a final row with epoch `final`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(["variant", "epoch", "timestamp", "free", "occupied", "unknown"]).map_err(|e| csv_error(path, e))?;
        let row = |epoch: String, t: String, iou: &ClassIou| {
            [self.variant.name().to_string(), epoch, t, iou.free.to_string(), iou.occupied.to_string(), iou.unknown.to_string()]
        };
        for s in &self.series {
            w.write_record(row(s.epoch.to_string(), s.timestamp.to_string(), &s.iou)).map_err(|e| csv_error(path, e))?;
        }
        w.write_record(row("final".into(), String::new(), &self.iou)).map_err(|e| csv_error(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, "report table", format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridGeometry;
    use proptest::prelude::*;

    fn m(f: f64, o: f64, u: f64) -> MassFunction<f64> {
        MassFunction::new(f, o, u).unwrap()
    }

    fn grid(cells: Vec<MassFunction<f64>>) -> EvidenceGrid<f64> {
        let side = (cells.len() as f64).sqrt() as usize;
        EvidenceGrid::from_cells(GridGeometry::centered(side, 1.0), "g", cells).unwrap()
    }

    #[test]
    fn ties_classify_as_unknown() {
        assert_eq!(classify(&m(0.5, 0.5, 0.0)), CellClass::Unknown);
        assert_eq!(classify(&m(0.4, 0.2, 0.4)), CellClass::Unknown);
        assert_eq!(classify(&m(0.5, 0.2, 0.3)), CellClass::Free);
        assert_eq!(classify(&m(0.0, 0.5, 0.5)), CellClass::Unknown);
        assert_eq!(classify(&m(0.0, 0.6, 0.4)), CellClass::Occupied);
    }

    #[test]
    fn evaluate_examples() {
        let a = grid((0..16).map(|i| if i % 3 == 0 { m(0.7, 0.1, 0.2) } else { m(0.1, 0.8, 0.1) }).collect());
        assert_eq!(evaluate(&a, &a).unwrap(), ClassIou { free: 100.0, occupied: 100.0, unknown: 100.0 });

        let vac = grid(vec![MassFunction::vacuous(); 16]);
        let free = grid(vec![m(1.0, 0.0, 0.0); 16]);
        let iou = evaluate(&vac, &free).unwrap();
        assert_eq!((iou.free, iou.unknown, iou.occupied), (0.0, 0.0, 100.0));

        let checker = |flip: bool| grid((0..16).map(|i| if ((i % 4 + i / 4) % 2 == 0) ^ flip { m(1.0, 0.0, 0.0) } else { m(0.0, 1.0, 0.0) }).collect());
        let iou = evaluate(&checker(false), &checker(true)).unwrap();
        assert_eq!((iou.free, iou.occupied), (0.0, 0.0));

        let other = EvidenceGrid::<f64>::new(GridGeometry::centered(5, 1.0), "g");
        assert!(evaluate(&a, &other).is_err());
    }

    proptest! {
        #[test]
        fn evaluate_is_symmetric(a in proptest::collection::vec(0u8..4, 25), b in proptest::collection::vec(0u8..4, 25)) {
            let pick = |k: u8| match k { 0 => m(1.0, 0.0, 0.0), 1 => m(0.0, 1.0, 0.0), 2 => m(0.5, 0.5, 0.0), _ => MassFunction::vacuous() };
            let ga = grid(a.into_iter().map(pick).collect());
            let gb = grid(b.into_iter().map(pick).collect());
            prop_assert_eq!(evaluate(&ga, &gb).unwrap(), evaluate(&gb, &ga).unwrap());
        }
    }

    #[test]
    fn reports_round_trip_and_tabulate() {
        let dir = tempfile::tempdir().unwrap();
        let iou = ClassIou { free: 90.0, occupied: 50.5, unknown: 70.25 };
        let report = EvalReport {
            variant: MappingVariant::FusedIrm,
            iou,
            ground_truth_iou: None,
            series: vec![EpochScore { epoch: 0, timestamp: 0.0, iou }],
            config_hash: "ab".into(),
        };
        report.write_json(dir.path().join("r.json")).unwrap();
        assert_eq!(EvalReport::read_json(dir.path().join("r.json")).unwrap(), report);
        report.write_csv(dir.path().join("r.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().last().unwrap().starts_with("FusedIrm,final,,90,50.5,70.25"));
    }
}
