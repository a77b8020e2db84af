use rayon::prelude::*;

use super::eval::{config_hash, evaluate, ClassIou, EpochScore, EvalReport};
use super::mapper::{check_recording, Mapper, MappingVariant, PipelineParams, PredictionSource};
use crate::error::{Error, Result};
use crate::grid::EvidenceGrid;
use crate::recording::Recording;

/// Outcome of one variant within an experiment.
#[derive(Debug, Clone)]
pub struct VariantRun {
    pub variant: MappingVariant,
    pub map: EvidenceGrid<f64>,
    pub report: EvalReport,
    /// Cells ever written by the ray IRM; empty for variants without it.
    pub irm_touched: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub runs: Vec<VariantRun>,
    /// Final ray-ILM map every variant is scored against.
    pub reference: EvidenceGrid<f64>,
    pub ground_truth: Option<EvidenceGrid<f64>>,
}

impl Experiment {
    pub fn run(&self, variant: MappingVariant) -> Option<&VariantRun> {
        self.runs.iter().find(|r| r.variant == variant)
    }
}

/// Runs `variants` side by side with the ray-ILM reference, scoring each
/// against the reference after every epoch.
pub fn run_experiment(recording: &Recording, variants: &[MappingVariant], params: &PipelineParams, source: Option<&PredictionSource>) -> Result<Experiment> {
    if variants.is_empty() {
        return Err(Error::InvalidParameter {
            name: "variant list",
            reason: "is empty".into(),
        });
    }
    check_recording(recording, MappingVariant::RayIlmDempster)?;
    for &v in variants {
        check_recording(recording, v)?;
    }
    let mut variants = variants.to_vec();
    variants.dedup();
    let mut reference = Mapper::new(MappingVariant::RayIlmDempster, &recording.meta, params, source)?;
    let mut mappers = variants
        .iter()
        .filter(|&&v| v != MappingVariant::RayIlmDempster)
        .map(|&v| Mapper::new(v, &recording.meta, params, source))
        .collect::<Result<Vec<_>>>()?;
    let mut series: Vec<Vec<EpochScore>> = vec![Vec::new(); variants.len()];

    for (i, epoch) in recording.epochs().into_iter().enumerate() {
        let (reference_step, others) = rayon::join(
            || reference.step(epoch),
            || mappers.par_iter_mut().map(|m| m.step(epoch)).collect::<Result<Vec<()>>>(),
        );
        reference_step?;
        others?;
        let scores = variants
            .par_iter()
            .map(|&v| {
                let map = mappers.iter().find(|m| m.variant() == v).map_or(reference.map(), |m| m.map());
                evaluate(map, reference.map())
            })
            .collect::<Result<Vec<ClassIou>>>()?;
        for (s, iou) in series.iter_mut().zip(scores) {
            s.push(EpochScore {
                epoch: i,
                timestamp: epoch[0].timestamp,
                iou,
            });
        }
    }

    let anchor = reference.anchor();
    let ground_truth = match (&recording.meta.world, anchor) {
        (Some(world), Some(anchor)) => Some(world.ground_truth::<f64>(&recording.meta.grid, &anchor)),
        _ => None,
    };
    let hash = config_hash(params, &recording.meta, recording.scans.len());
    let reference_map = reference.map().clone();
    let mut by_variant: Vec<(MappingVariant, EvidenceGrid<f64>, Vec<bool>)> = mappers
        .into_iter()
        .map(|m| (m.variant(), m.map().clone(), m.irm_touched().to_vec()))
        .collect();
    let mut runs = Vec::with_capacity(variants.len());
    for (variant, series) in variants.iter().zip(series) {
        let (map, irm_touched) = match by_variant.iter().position(|(v, ..)| v == variant) {
            Some(k) => {
                let (_, map, touched) = by_variant.swap_remove(k);
                (map, touched)
            }
            None => (reference_map.clone(), Vec::new()),
        };
        let iou = evaluate(&map, &reference_map)?;
        let ground_truth_iou = ground_truth.as_ref().map(|gt| evaluate(&map, gt)).transpose()?;
        runs.push(VariantRun {
            variant: *variant,
            report: EvalReport {
                variant: *variant,
                iou,
                ground_truth_iou,
                series,
                config_hash: hash.clone(),
            },
            map,
            irm_touched,
        });
    }
    Ok(Experiment {
        runs,
        reference: reference_map,
        ground_truth,
    })
}
