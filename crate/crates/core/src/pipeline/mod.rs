//! Mapping variants, their side-by-side evaluation and map rendering.

mod eval;
mod experiment;
mod mapper;
mod render;

pub use eval::{classify, config_hash, evaluate, CellClass, ClassIou, EpochScore, EvalReport};
pub use experiment::{run_experiment, Experiment, VariantRun};
pub use mapper::{check_recording, run_variant, run_variant_with, Mapper, MappingVariant, PipelineParams, PredictionSource};
pub use render::{render, render_image};
