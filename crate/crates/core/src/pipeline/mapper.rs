use std::collections::VecDeque;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::deep_ism::{integrate_grid, load_prediction, replace_grid, surrogate_predict, FusionParams, SurrogateParams};
use crate::error::{Error, Result};
use crate::evidence::CombinationRule;
use crate::geometric_ism::{ray_ilm, ray_irm, RayIlmParams, RayIrmParams};
use crate::grid::{transform_grid, EvidenceGrid, GridGeometry, Pose2D, Scan, SensorKind};
use crate::recording::{Recording, RecordingMeta};
use crate::simulator::World;

/// The mapping strategies compared by the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MappingVariant {
    /// Reference: ray ILM fused with Dempster's rule.
    RayIlmDempster,
    /// Deep ISM fused with Dempster's rule as if it were a geometric model.
    DeepIrmAccumulated,
    /// Deep ISM overwrites cells where it is more certain than the map.
    DeepIrmReplace,
    /// Deep ISM fused through floor limiting, discounting and Yager's rule.
    DeepIrmDiscounted,
    RayIrmDempster,
    /// Discounted deep ISM followed by the ray IRM under Dempster's rule.
    FusedIrm,
}

impl MappingVariant {
    pub const ALL: [MappingVariant; 6] = [
        MappingVariant::RayIlmDempster,
        MappingVariant::DeepIrmAccumulated,
        MappingVariant::DeepIrmReplace,
        MappingVariant::DeepIrmDiscounted,
        MappingVariant::RayIrmDempster,
        MappingVariant::FusedIrm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MappingVariant::RayIlmDempster => "RayIlmDempster",
            MappingVariant::DeepIrmAccumulated => "DeepIrmAccumulated",
            MappingVariant::DeepIrmReplace => "DeepIrmReplace",
            MappingVariant::DeepIrmDiscounted => "DeepIrmDiscounted",
            MappingVariant::RayIrmDempster => "RayIrmDempster",
            MappingVariant::FusedIrm => "FusedIrm",
        }
    }

    pub fn uses_deep_ism(&self) -> bool {
        matches!(
            self,
            MappingVariant::DeepIrmAccumulated | MappingVariant::DeepIrmReplace | MappingVariant::DeepIrmDiscounted | MappingVariant::FusedIrm
        )
    }

    pub fn uses_ray_irm(&self) -> bool {
        matches!(self, MappingVariant::RayIrmDempster | MappingVariant::FusedIrm)
    }

    pub fn required_sensor(&self) -> SensorKind {
        match self {
            MappingVariant::RayIlmDempster => SensorKind::Lidar,
            _ => SensorKind::Radar,
        }
    }
}

impl fmt::Display for MappingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MappingVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        MappingVariant::ALL
            .into_iter()
            .find(|v| v.name().to_ascii_lowercase() == key)
            .ok_or_else(|| {
                let names: Vec<_> = MappingVariant::ALL.iter().map(|v| v.name()).collect();
                format!("unknown variant {s:?} (expected one of {})", names.join(", "))
            })
    }
}

/// Every tunable of a mapping run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub fusion: FusionParams,
    pub ilm: RayIlmParams,
    pub irm: RayIrmParams,
    pub surrogate: SurrogateParams,
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        self.fusion.validate()?;
        self.ilm.validate()?;
        self.irm.validate()?;
        self.surrogate.validate()
    }
}

/// Where deep-ISM predictions come from.
#[derive(Debug, Clone)]
pub enum PredictionSource {
    /// The built-in surrogate, labelling against this world.
    Surrogate(World),
    /// Precomputed grids `NNNNN.evgr` (zero-based epoch) in the vehicle frame.
    Directory(PathBuf),
}

impl PredictionSource {
    /// The surrogate when the recording carries its world, otherwise `None`.
    pub fn for_recording(meta: &RecordingMeta) -> Option<Self> {
        meta.world.clone().map(PredictionSource::Surrogate)
    }
}

/// Incremental map builder for one variant; feed it one epoch at a time.
///
/// The map frame is the vehicle frame of the first epoch. Sensor models run
/// in a grid of the recording's geometry attached to the current vehicle
/// pose and are resampled into the map frame before fusion.
pub struct Mapper<'a> {
    variant: MappingVariant,
    meta: &'a RecordingMeta,
    params: PipelineParams,
    source: Option<&'a PredictionSource>,
    map: EvidenceGrid<f64>,
    anchor: Option<Pose2D>,
    radar: VecDeque<Scan>,
    epoch: u64,
    irm_touched: Vec<bool>,
}

impl<'a> Mapper<'a> {
    pub fn new(variant: MappingVariant, meta: &'a RecordingMeta, params: &PipelineParams, source: Option<&'a PredictionSource>) -> Result<Self> {
        params.validate()?;
        meta.grid.validate()?;
        if variant.uses_deep_ism() && source.is_none() {
            return Err(Error::RecordingMismatch(format!(
                "{variant} needs deep-ISM predictions but the recording has no world and no prediction directory was given"
            )));
        }
        Ok(Self {
            variant,
            meta,
            params: *params,
            source,
            map: EvidenceGrid::new(meta.grid, "map"),
            anchor: None,
            radar: VecDeque::new(),
            epoch: 0,
            irm_touched: if variant.uses_ray_irm() { vec![false; meta.grid.len()] } else { Vec::new() },
        })
    }

    pub fn variant(&self) -> MappingVariant {
        self.variant
    }

    pub fn map(&self) -> &EvidenceGrid<f64> {
        &self.map
    }

    pub fn into_map(self) -> EvidenceGrid<f64> {
        self.map
    }

    /// Map frame in world coordinates, once the first epoch has been seen.
    pub fn anchor(&self) -> Option<Pose2D> {
        self.anchor
    }

    pub fn epochs_seen(&self) -> u64 {
        self.epoch
    }

    /// Cells that ever received a non-vacuous ray-IRM mass (IRM variants only).
    pub fn irm_touched(&self) -> &[bool] {
        &self.irm_touched
    }

    fn vehicle_pose(&self, scan: &Scan) -> Result<Pose2D> {
        let spec = self
            .meta
            .sensor(scan.sensor_id)
            .ok_or_else(|| Error::RecordingMismatch(format!("scan from undeclared sensor {}", scan.sensor_id)))?;
        Ok(scan.sensor_pose.compose(&spec.extrinsic.inverse()))
    }

    fn window(&self, depth: usize, vehicle: &Pose2D) -> Vec<Scan> {
        let skip = self.radar.len().saturating_sub(depth);
        self.radar.iter().skip(skip).map(|s| s.reframed(vehicle)).collect()
    }

    fn prediction(&self, vehicle: &Pose2D, local: &GridGeometry) -> Result<EvidenceGrid<f64>> {
        match self.source.expect("checked in new") {
            PredictionSource::Surrogate(world) => {
                let scans = self.window(self.params.fusion.accumulation_window, vehicle);
                surrogate_predict(&scans, world, vehicle, &self.params.surrogate, local, self.epoch)
            }
            PredictionSource::Directory(dir) => load_prediction(dir.join(format!("{:05}.evgr", self.epoch)), local),
        }
    }

    /// Folds one epoch (scans sharing a timestamp, world-frame poses) into the map.
    pub fn step(&mut self, scans: &[Scan]) -> Result<()> {
        let Some(first) = scans.first() else {
            return Ok(());
        };
        let vehicle = self.vehicle_pose(first)?;
        let anchor = *self.anchor.get_or_insert(vehicle);
        let relative = anchor.inverse().compose(&vehicle);
        let local = self.meta.grid;
        let has_radar = scans.iter().any(|s| s.sensor_kind == SensorKind::Radar);
        for scan in scans.iter().filter(|s| s.sensor_kind == SensorKind::Radar) {
            self.radar.push_back(scan.clone());
        }
        let keep = self.params.irm.history_depth.max(self.params.fusion.accumulation_window);
        while self.radar.len() > keep {
            self.radar.pop_front();
        }

        let to_map = |grid: &EvidenceGrid<f64>| transform_grid(grid, &relative, &local);
        let floor_limited = self.variant.uses_deep_ism() && has_radar;
        let prediction = if floor_limited { Some(to_map(&self.prediction(&vehicle, &local)?)) } else { None };

        match self.variant {
            MappingVariant::RayIlmDempster => {
                for scan in scans.iter().filter(|s| s.sensor_kind == SensorKind::Lidar) {
                    let ilm = ray_ilm::<f64>(&scan.reframed(&vehicle), &self.params.ilm, &local)?;
                    self.map.fuse(&to_map(&ilm), CombinationRule::Dempster)?;
                }
            }
            MappingVariant::DeepIrmAccumulated => {
                if let Some(p) = &prediction {
                    self.map.fuse(p, CombinationRule::Dempster)?;
                }
            }
            MappingVariant::DeepIrmReplace => {
                if let Some(p) = &prediction {
                    replace_grid(&mut self.map, p, &self.params.fusion)?;
                }
            }
            MappingVariant::DeepIrmDiscounted | MappingVariant::FusedIrm => {
                if let Some(p) = &prediction {
                    integrate_grid(&mut self.map, p, &self.params.fusion)?;
                }
            }
            MappingVariant::RayIrmDempster => {}
        }
        if self.variant.uses_ray_irm() && has_radar {
            let window = self.window(self.params.irm.history_depth, &vehicle);
            let irm = to_map(&ray_irm::<f64>(&window, &self.params.irm, &local)?);
            for (touched, cell) in self.irm_touched.iter_mut().zip(irm.cells()) {
                *touched |= !cell.is_vacuous();
            }
            self.map.fuse(&irm, CombinationRule::Dempster)?;
        }
        self.epoch += 1;
        Ok(())
    }
}

/// Checks that the recording carries the sensor `variant` consumes.
pub fn check_recording(recording: &Recording, variant: MappingVariant) -> Result<()> {
    let kind = variant.required_sensor();
    if !recording.scans.is_empty() && !recording.has_kind(kind) {
        return Err(Error::RecordingMismatch(format!("{variant} needs {} scans", kind.as_str())));
    }
    Ok(())
}

/// Runs one variant over a recording, calling `on_epoch` after every epoch.
/// Returns the final map.
pub fn run_variant_with(
    recording: &Recording,
    variant: MappingVariant,
    params: &PipelineParams,
    source: Option<&PredictionSource>,
    mut on_epoch: impl FnMut(usize, &Mapper<'_>),
) -> Result<EvidenceGrid<f64>> {
    check_recording(recording, variant)?;
    let mut mapper = Mapper::new(variant, &recording.meta, params, source)?;
    for (i, epoch) in recording.epochs().into_iter().enumerate() {
        mapper.step(epoch)?;
        on_epoch(i, &mapper);
    }
    Ok(mapper.into_map())
}

/// The map after every epoch. Memory grows with the recording length;
/// prefer [`run_variant_with`] for long runs.
pub fn run_variant(recording: &Recording, variant: MappingVariant, params: &PipelineParams, source: Option<&PredictionSource>) -> Result<Vec<EvidenceGrid<f64>>> {
    let mut maps = Vec::new();
    run_variant_with(recording, variant, params, source, |_, m| maps.push(m.map().clone()))?;
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScanPoint;
    use crate::recording::SensorSpec;

    fn meta() -> RecordingMeta {
        let spec = |id, kind| SensorSpec { id, kind, extrinsic: Pose2D::identity(), beam_count: 10, max_range: 10.0 };
        RecordingMeta {
            grid: GridGeometry::centered(64, 0.25),
            sensors: vec![spec(0, SensorKind::Lidar), spec(1, SensorKind::Radar)],
            world: None,
            seed: None,
            scan_period: 0.1,
        }
    }

    fn scan(kind: SensorKind, pose: Pose2D, points: &[[f64; 2]]) -> Scan {
        Scan {
            timestamp: 0.0,
            sensor_pose: pose,
            sensor_kind: kind,
            sensor_id: if kind == SensorKind::Lidar { 0 } else { 1 },
            points: points.iter().map(|p| ScanPoint::new(p[0], p[1], 1.0)).collect(),
        }
    }

    #[test]
    fn empty_recording_gives_no_maps() {
        let rec = Recording { meta: meta(), scans: Vec::new() };
        assert!(run_variant(&rec, MappingVariant::RayIlmDempster, &PipelineParams::default(), None).unwrap().is_empty());
    }

    #[test]
    fn single_lidar_scan_reproduces_the_ilm() {
        let pose = Pose2D::new(3.0, -2.0, 0.7);
        let s = scan(SensorKind::Lidar, pose, &[[4.0, 1.0], [-2.0, 3.0]]);
        let rec = Recording { meta: meta(), scans: vec![s.clone()] };
        let maps = run_variant(&rec, MappingVariant::RayIlmDempster, &PipelineParams::default(), None).unwrap();
        let ilm = ray_ilm::<f64>(&s.reframed(&pose), &RayIlmParams::default(), &rec.meta.grid).unwrap();
        assert_eq!(maps.len(), 1);
        assert_eq!(maps[0].cells(), ilm.cells());
    }

    #[test]
    fn deep_variants_need_a_prediction_source() {
        let rec = Recording { meta: meta(), scans: vec![scan(SensorKind::Radar, Pose2D::identity(), &[])] };
        let err = run_variant(&rec, MappingVariant::FusedIrm, &PipelineParams::default(), None).unwrap_err();
        assert!(matches!(err, Error::RecordingMismatch(_)));
        let rec = Recording { meta: meta(), scans: vec![scan(SensorKind::Lidar, Pose2D::identity(), &[])] };
        let err = run_variant(&rec, MappingVariant::RayIrmDempster, &PipelineParams::default(), None).unwrap_err();
        assert!(matches!(err, Error::RecordingMismatch(_)));
    }

    #[test]
    fn variant_names_parse() {
        for v in MappingVariant::ALL {
            assert_eq!(v.name().parse::<MappingVariant>().unwrap(), v);
        }
        assert_eq!("fused-irm".parse::<MappingVariant>().unwrap(), MappingVariant::FusedIrm);
        assert!("nope".parse::<MappingVariant>().is_err());
    }
}
