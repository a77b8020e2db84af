//! Deep radar ISM: the surrogate predictor and the redundancy-aware fusion of
//! its output into an evidential map.

mod fusion;
mod surrogate;

use std::path::Path;

pub use fusion::{compute_gamma, delta_unknown, integrate_grid, integrate_prediction, replace_grid, FusionParams, GammaMode};
pub use surrogate::{squared_distance_transform, surrogate_predict, visibility_labels, SurrogateParams, Visibility};

use crate::error::{Error, Result};
use crate::grid::io::read_grid;
use crate::grid::{EvidenceGrid, GridGeometry};
use crate::scalar::Scalar;

/// Reads a precomputed prediction and checks it against `expected`.
/// Resolution and origin are compared at file (`f32`) precision.
pub fn load_prediction<T: Scalar>(path: impl AsRef<Path>, expected: &GridGeometry) -> Result<EvidenceGrid<T>> {
    let path = path.as_ref();
    let grid = read_grid::<T>(path)?;
    let got = grid.geometry();
    let mismatch = |field: &str, got: String, want: String| {
        Err(Error::format(path, "prediction geometry", format!("{field} is {got}, expected {want}")))
    };
    if (got.width, got.height) != (expected.width, expected.height) {
        return mismatch("shape", format!("{}×{}", got.width, got.height), format!("{}×{}", expected.width, expected.height));
    }
    if got.resolution as f32 != expected.resolution as f32 {
        return mismatch("resolution", got.resolution.to_string(), expected.resolution.to_string());
    }
    if got.origin.map(|v| v as f32) != expected.origin.map(|v| v as f32) {
        return mismatch("origin", format!("{:?}", got.origin), format!("{:?}", expected.origin));
    }
    let mut grid = grid;
    grid.set_frame_id("prediction");
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::io::write_grid;

    #[test]
    fn load_checks_geometry() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.evgr");
        let geometry = GridGeometry::centered(8, 0.25);
        write_grid(&path, &EvidenceGrid::<f32>::new(geometry, "p")).unwrap();
        assert!(load_prediction::<f32>(&path, &geometry).unwrap().is_vacuous());
        let err = load_prediction::<f32>(&path, &GridGeometry::centered(9, 0.25)).unwrap_err().to_string();
        assert!(err.contains("shape"), "{err}");
        let err = load_prediction::<f32>(&path, &GridGeometry::centered(8, 0.5)).unwrap_err().to_string();
        assert!(err.contains("resolution") || err.contains("origin"), "{err}");
        assert!(load_prediction::<f32>(dir.path().join("missing"), &geometry).is_err());
    }
}
