//! Evidence grids with metric geometry.
//!
//! Grids are dense and row-major. Per-cell operations run in parallel through
//! rayon; every cell update depends only on that cell, so results are
//! identical for any thread count.

mod geometry;
pub mod io;
mod scan;

use rayon::prelude::*;

pub use geometry::{normalize_angle, GridGeometry, Pose2D};
pub use scan::{Scan, ScanPoint, SensorKind};

use crate::error::{Error, Result};
use crate::evidence::{CombinationRule, MassFunction};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceGrid<T> {
    geometry: GridGeometry,
    frame_id: String,
    cells: Vec<MassFunction<T>>,
}

impl<T: Scalar> EvidenceGrid<T> {
    /// All-vacuous grid.
    pub fn new(geometry: GridGeometry, frame_id: impl Into<String>) -> Self {
        assert!(geometry.validate().is_ok(), "degenerate grid geometry {geometry:?}");
        Self {
            geometry,
            frame_id: frame_id.into(),
            cells: vec![MassFunction::vacuous(); geometry.len()],
        }
    }

    pub fn from_cells(
        geometry: GridGeometry,
        frame_id: impl Into<String>,
        cells: Vec<MassFunction<T>>,
    ) -> Result<Self> {
        geometry.validate()?;
        if cells.len() != geometry.len() {
            return Err(Error::GeometryMismatch(format!(
                "{} cells for a {} × {} grid",
                cells.len(),
                geometry.width,
                geometry.height
            )));
        }
        Ok(Self {
            geometry,
            frame_id: frame_id.into(),
            cells,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn frame_id(&self) -> &str {
        &self.frame_id
    }

    pub fn set_frame_id(&mut self, frame_id: impl Into<String>) {
        self.frame_id = frame_id.into();
    }

    pub fn cells(&self) -> &[MassFunction<T>] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [MassFunction<T>] {
        &mut self.cells
    }

    pub fn get(&self, ix: usize, iy: usize) -> MassFunction<T> {
        self.cells[self.geometry.index(ix, iy)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, mass: MassFunction<T>) {
        let index = self.geometry.index(ix, iy);
        self.cells[index] = mass;
    }

    /// Mass at the cell containing world point `p`, if inside.
    pub fn at(&self, p: [f64; 2]) -> Option<MassFunction<T>> {
        self.geometry.cell_of(p).map(|(ix, iy)| self.get(ix, iy))
    }

    pub fn is_vacuous(&self) -> bool {
        self.cells.iter().all(MassFunction::is_vacuous)
    }

    /// Folds `update` into this grid cell by cell.
    pub fn fuse(&mut self, update: &EvidenceGrid<T>, rule: CombinationRule) -> Result<()> {
        self.zip_apply(update, |cell, upd| {
            if !upd.is_vacuous() {
                *cell = fuse_cell(cell, upd, rule);
            }
        })
    }

    /// Applies `op` to every `(cell, other_cell)` pair in parallel.
    pub fn zip_apply<F>(&mut self, other: &EvidenceGrid<T>, op: F) -> Result<()>
    where
        F: Fn(&mut MassFunction<T>, &MassFunction<T>) + Sync + Send,
    {
        if self.geometry != other.geometry {
            return Err(Error::GeometryMismatch(format!(
                "{:?} vs {:?}",
                self.geometry, other.geometry
            )));
        }
        self.cells
            .par_iter_mut()
            .zip(other.cells.par_iter())
            .for_each(|(cell, upd)| op(cell, upd));
        Ok(())
    }

    /// Converts every cell to another scalar type, renormalizing as needed.
    pub fn convert<U: Scalar>(&self) -> Result<EvidenceGrid<U>> {
        let cells = self
            .cells
            .iter()
            .map(|m| {
                m.map_scalar(|v| U::from_f64(v.to_f64_lossy()).expect("finite mass component"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        EvidenceGrid::from_cells(self.geometry, self.frame_id.clone(), cells)
    }
}

/// Combines one map cell with one update under `rule`; a total conflict under
/// Dempster's rule leaves the map cell unchanged.
pub fn fuse_cell<T: Scalar>(map_cell: &MassFunction<T>, update: &MassFunction<T>, rule: CombinationRule) -> MassFunction<T> {
    map_cell.fuse(update, rule)
}

/// Resamples `src` into `dst` geometry. `pose` maps source-frame coordinates
/// into destination-frame coordinates; every destination cell takes the mass of
/// the source cell containing its back-projected centre, or stays vacuous.
///
/// # Panics
///
/// On degenerate source or destination geometry.
pub fn transform_grid<T: Scalar>(src: &EvidenceGrid<T>, pose: &Pose2D, dst: &GridGeometry) -> EvidenceGrid<T> {
    assert!(dst.validate().is_ok(), "degenerate destination geometry {dst:?}");
    assert!(src.geometry.validate().is_ok(), "degenerate source geometry");
    let mut out = EvidenceGrid::new(*dst, src.frame_id.clone());
    let src_geometry = src.geometry;
    let (s, c) = pose.theta.sin_cos();
    out.cells
        .par_chunks_mut(dst.width)
        .enumerate()
        .for_each(|(iy, row)| {
            for (ix, cell) in row.iter_mut().enumerate() {
                let q = dst.cell_center(ix, iy);
                let (dx, dy) = (q[0] - pose.x, q[1] - pose.y);
                let p = [c * dx + s * dy, -s * dx + c * dy];
                if let Some((sx, sy)) = src_geometry.cell_of(p) {
                    *cell = src.cells[src_geometry.index(sx, sy)];
                }
            }
        });
    out
}

/// Per-cell detection counts of a scan rasterized into a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionImage {
    geometry: GridGeometry,
    counts: Vec<u32>,
}

impl DetectionImage {
    pub fn new(geometry: GridGeometry) -> Self {
        Self {
            geometry,
            counts: vec![0; geometry.len()],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, ix: usize, iy: usize) -> u32 {
        self.counts[self.geometry.index(ix, iy)]
    }

    pub fn is_detection(&self, ix: usize, iy: usize) -> bool {
        self.count(ix, iy) > 0
    }

    /// Adds one detection at `p`; returns false if `p` is outside the grid.
    pub fn add(&mut self, p: [f64; 2]) -> bool {
        match self.geometry.cell_of(p) {
            Some((ix, iy)) => {
                let index = self.geometry.index(ix, iy);
                self.counts[index] += 1;
                true
            }
            None => false,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Bins a scan's detections into `geometry`; the scan's sensor pose must be
/// expressed in the grid's frame. Points outside the grid are dropped.
pub fn rasterize(scan: &Scan, geometry: &GridGeometry) -> DetectionImage {
    let mut image = DetectionImage::new(*geometry);
    for p in scan.points_in_frame() {
        image.add(p);
    }
    image
}
