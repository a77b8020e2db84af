use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rigid 2D transform; `theta` is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

pub fn normalize_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut wrapped = theta.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped -= 2.0 * PI;
    }
    wrapped
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Maps a point expressed in this pose's frame into the parent frame.
    pub fn transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }

    /// Maps a parent-frame point into this pose's frame.
    pub fn inverse_transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        let (dx, dy) = (p[0] - self.x, p[1] - self.y);
        [c * dx + s * dy, -s * dx + c * dy]
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Pose2D) -> Pose2D {
        let [x, y] = self.transform_point([other.x, other.y]);
        Pose2D::new(x, y, self.theta + other.theta)
    }

    pub fn inverse(&self) -> Pose2D {
        let (s, c) = self.theta.sin_cos();
        Pose2D::new(-(c * self.x + s * self.y), s * self.x - c * self.y, -self.theta)
    }
}

impl Default for Pose2D {
    fn default() -> Self {
        Self::identity()
    }
}

/// Metric layout of a dense grid: `origin` is the world position of the
/// outer corner of cell `(0, 0)`; `x` grows with the column index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: [f64; 2],
}

impl GridGeometry {
    pub fn new(width: usize, height: usize, resolution: f64, origin: [f64; 2]) -> Result<Self> {
        let geometry = Self {
            width,
            height,
            resolution,
            origin,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    /// Square grid of `cells × cells` centred on the frame origin.
    pub fn centered(cells: usize, resolution: f64) -> Self {
        let half = cells as f64 * resolution / 2.0;
        Self {
            width: cells,
            height: cells,
            resolution,
            origin: [-half, -half],
        }
    }

    /// Default mapping layout: 512 × 512 cells over 40 m × 40 m.
    pub fn bev_default() -> Self {
        Self::centered(512, 40.0 / 512.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter {
                name: "grid size",
                reason: format!("{} × {} has no cells", self.width, self.height),
            });
        }
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(Error::InvalidParameter {
                name: "resolution",
                reason: format!("{} is not a positive length", self.resolution),
            });
        }
        if !(self.origin[0].is_finite() && self.origin[1].is_finite()) {
            return Err(Error::InvalidParameter {
                name: "origin",
                reason: "non-finite coordinate".into(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.resolution,
            self.origin[1] + (iy as f64 + 0.5) * self.resolution,
        ]
    }

    /// Continuous cell coordinates: cell `(i, j)` spans `[i, i+1) × [j, j+1)`.
    pub fn to_cell_units(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.origin[0]) / self.resolution,
            (p[1] - self.origin[1]) / self.resolution,
        ]
    }

    /// Cell containing `p`, if inside the grid.
    pub fn cell_of(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let [u, v] = self.to_cell_units(p);
        let (fx, fy) = (u.floor(), v.floor());
        if fx >= 0.0 && fy >= 0.0 && fx < self.width as f64 && fy < self.height as f64 {
            Some((fx as usize, fy as usize))
        } else {
            None
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.cell_of(p).is_some()
    }

    /// Same shape and resolution, possibly a different origin.
    pub fn same_shape(&self, other: &GridGeometry) -> bool {
        self.width == other.width && self.height == other.height && self.resolution == other.resolution
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_layout_matches_bev_grid() {
        let g = GridGeometry::bev_default();
        assert_eq!((g.width, g.height), (512, 512));
        assert_eq!(g.resolution, 0.078125);
        assert_eq!(g.origin, [-20.0, -20.0]);
    }

    #[test]
    fn cell_lookup() {
        let g = GridGeometry::new(4, 3, 0.5, [1.0, -1.0]).unwrap();
        assert_eq!(g.cell_of([1.0, -1.0]), Some((0, 0)));
        assert_eq!(g.cell_of([2.99, 0.49]), Some((3, 2)));
        assert_eq!(g.cell_of([3.0, 0.0]), None);
        assert_eq!(g.cell_of([0.99, 0.0]), None);
        assert_eq!(g.cell_center(1, 1), [1.75, -0.25]);
        assert!(GridGeometry::new(4, 3, 0.0, [0.0, 0.0]).is_err());
        assert!(GridGeometry::new(0, 3, 1.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((normalize_angle(7.0 * PI) - PI).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn pose_inverse_round_trip(x in -50.0..50.0f64, y in -50.0..50.0f64, t in -10.0..10.0f64,
                                   px in -20.0..20.0f64, py in -20.0..20.0f64) {
            let pose = Pose2D::new(x, y, t);
            prop_assert!(pose.theta > -PI && pose.theta <= PI);
            let q = pose.inverse().transform_point(pose.transform_point([px, py]));
            prop_assert!((q[0] - px).abs() < 1e-9 && (q[1] - py).abs() < 1e-9);
            let q = pose.inverse_transform_point(pose.transform_point([px, py]));
            prop_assert!((q[0] - px).abs() < 1e-9 && (q[1] - py).abs() < 1e-9);
            let id = pose.compose(&pose.inverse());
            prop_assert!(id.x.abs() < 1e-9 && id.y.abs() < 1e-9 && id.theta.abs() < 1e-9);
        }
    }
}
