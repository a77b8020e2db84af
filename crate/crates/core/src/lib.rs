//! Evidential occupancy mapping with redundancy-aware fusion of learned and
//! geometric inverse sensor models.
//!
//! The evidence algebra and grids are generic over the scalar type; the
//! aliases below fix the common choices.

pub mod deep_ism;
pub mod error;
pub mod evidence;
pub mod geometric_ism;
pub mod grid;
pub mod pipeline;
pub mod recording;
pub mod scalar;
pub mod simulator;

pub use deep_ism::{integrate_prediction, surrogate_predict, FusionParams, GammaMode, SurrogateParams};
pub use error::{Error, Result};
pub use evidence::{evidential_loss, CombinationRule, EvidenceError, LossTerms, MassFunction, SubjectiveOpinion};
pub use grid::{fuse_cell, rasterize, transform_grid, DetectionImage, EvidenceGrid, GridGeometry, Pose2D, Scan, ScanPoint, SensorKind};
pub use pipeline::{evaluate, run_experiment, run_variant, EvalReport, Mapper, MappingVariant, PipelineParams, PredictionSource};
pub use recording::Recording;
pub use scalar::{Rational, Real, Scalar};

pub type Mass = MassFunction<f64>;
pub type Mass32 = MassFunction<f32>;
pub type ExactMass = MassFunction<Rational>;
pub type Opinion = SubjectiveOpinion<f64>;
pub type Grid = EvidenceGrid<f64>;
pub type Grid32 = EvidenceGrid<f32>;
