//! Mapping-run configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use evigrid::{Error, GammaMode, MappingVariant, PipelineParams, Result};
use serde::{Deserialize, Serialize};

pub const THREADS_ENV: &str = "EVIGRID_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Recording directory; relative paths resolve against the config file.
    pub recording: PathBuf,
    pub variants: Vec<MappingVariant>,
    pub output: PathBuf,
    #[serde(default)]
    pub params: PipelineParams,
    /// Precomputed deep-ISM grids; the built-in surrogate is used otherwise.
    #[serde(default)]
    pub predictions: Option<PathBuf>,
    /// Seed for the surrogate's noise.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub unknown_floor: Option<f64>,
    pub gamma_mode: Option<GammaMode>,
    pub variants: Vec<MappingVariant>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let invalid = |detail: String| Error::Config { path: path.into(), detail };
        let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;

        let base = path.parent().unwrap_or(Path::new(""));
        for p in [Some(&mut config.recording), Some(&mut config.output), config.predictions.as_mut()].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(floor) = overrides.unknown_floor {
            config.params.fusion.unknown_floor = floor;
        }
        if let Some(mode) = overrides.gamma_mode {
            config.params.fusion.gamma_mode = mode;
        }
        if !overrides.variants.is_empty() {
            config.variants = overrides.variants.clone();
        }
        if let Some(seed) = config.seed {
            config.params.surrogate.rng_seed = seed;
        }

        if config.variants.is_empty() {
            return Err(invalid("variant list is empty".into()));
        }
        if config.threads == Some(0) {
            return Err(invalid("threads must be positive".into()));
        }
        config.params.validate().map_err(|e| invalid(e.to_string()))?;
        if !config.recording.is_dir() {
            return Err(invalid(format!("recording {} is not a directory", config.recording.display())));
        }
        if let Some(dir) = &config.predictions {
            if !dir.is_dir() {
                return Err(invalid(format!("prediction directory {} does not exist", dir.display())));
            }
        }
        Ok(config)
    }

    /// Worker count: the smaller of the file's `threads` and `EVIGRID_THREADS`.
    pub fn thread_limit(&self, env: Option<&str>) -> Result<Option<usize>> {
        let from_env = match env {
            None => None,
            Some(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => {
                    return Err(Error::InvalidParameter {
                        name: "EVIGRID_THREADS",
                        reason: format!("{v:?} is not a positive integer"),
                    })
                }
            },
        };
        Ok(match (self.threads, from_env) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        })
    }
}
