use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::MassFunction;
use crate::grid::{EvidenceGrid, GridGeometry, Pose2D};
use crate::scalar::Scalar;

#[inline]
fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Convex polygon, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
    bounds: [f64; 4],
}

impl TryFrom<Vec<[f64; 2]>> for Polygon {
    type Error = Error;

    fn try_from(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Polygon::new(vertices)
    }
}

impl From<Polygon> for Vec<[f64; 2]> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

impl Polygon {
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidParameter { name: "obstacle polygon", reason };
        if vertices.len() < 3 {
            return Err(invalid(format!("{} vertices, need at least 3", vertices.len())));
        }
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite vertex".into()));
        }
        let n = vertices.len();
        let signed_area: f64 = (0..n).map(|i| cross(vertices[i], vertices[(i + 1) % n])).sum::<f64>() / 2.0;
        if signed_area == 0.0 {
            return Err(invalid("zero area".into()));
        }
        if signed_area < 0.0 {
            vertices.reverse();
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if cross(sub(b, a), sub(c, b)) < 0.0 {
                return Err(invalid(format!("not convex at vertex {}", (i + 1) % n)));
            }
        }
        let bounds = vertices.iter().fold([f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY], |b, v| {
            [b[0].min(v[0]), b[1].min(v[1]), b[2].max(v[0]), b[3].max(v[1])]
        });
        Ok(Self { vertices, bounds })
    }

    /// Axis-aligned rectangle with corners `min` and `max`.
    pub fn rectangle(min: [f64; 2], max: [f64; 2]) -> Result<Self> {
        Self::new(vec![min, [max[0], min[1]], max, [min[0], max[1]]])
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n])).sum::<f64>() / 2.0
    }

    pub fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Closed containment test: boundary points count as inside.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let b = self.bounds;
        if p[0] < b[0] || p[1] < b[1] || p[0] > b[2] || p[1] > b[3] {
            return false;
        }
        self.edges().all(|(a, b)| cross(sub(b, a), sub(p, a)) >= 0.0)
    }
}

/// Rectangular region of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }
}

/// First intersection of a ray with the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub range: f64,
    pub point: [f64; 2],
    pub obstacle: usize,
    pub edge: ([f64; 2], [f64; 2]),
}

/// Planar world of convex obstacles; everything else is free space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub extent: Bounds,
    pub obstacles: Vec<Polygon>,
}

impl World {
    pub fn new(extent: Bounds, obstacles: Vec<Polygon>) -> Result<Self> {
        let world = Self { extent, obstacles };
        world.validate(0.0)?;
        Ok(world)
    }

    /// Checks extent containment and that every obstacle is larger than
    /// `min_area` (typically one grid cell).
    pub fn validate(&self, min_area: f64) -> Result<()> {
        if !(self.extent.min[0] < self.extent.max[0] && self.extent.min[1] < self.extent.max[1]) {
            return Err(Error::InvalidParameter {
                name: "world extent",
                reason: "min must lie below max".into(),
            });
        }
        for (i, polygon) in self.obstacles.iter().enumerate() {
            if let Some(v) = polygon.vertices().iter().find(|v| !self.extent.contains(**v)) {
                return Err(Error::InvalidParameter {
                    name: "obstacle polygon",
                    reason: format!("obstacle {i} vertex {v:?} lies outside the world extent"),
                });
            }
            if polygon.area() <= min_area {
                return Err(Error::InvalidParameter {
                    name: "obstacle polygon",
                    reason: format!("obstacle {i} area {} is not above {min_area}", polygon.area()),
                });
            }
        }
        Ok(())
    }

    pub fn is_occupied(&self, p: [f64; 2]) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Nearest obstacle boundary along the ray `origin + t·dir`, `0 < t ≤ max_range`.
    /// `dir` must be a unit vector.
    pub fn first_hit(&self, origin: [f64; 2], dir: [f64; 2], max_range: f64) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for (index, polygon) in self.obstacles.iter().enumerate() {
            for (a, b) in polygon.edges() {
                let e = sub(b, a);
                let denom = cross(dir, e);
                if denom == 0.0 {
                    continue;
                }
                let w = sub(a, origin);
                let t = cross(w, e) / denom;
                let s = cross(w, dir) / denom;
                if t > 0.0 && t <= max_range && (0.0..=1.0).contains(&s) && best.is_none_or(|h| t < h.range) {
                    best = Some(Hit {
                        range: t,
                        point: [origin[0] + t * dir[0], origin[1] + t * dir[1]],
                        obstacle: index,
                        edge: (a, b),
                    });
                }
            }
        }
        best
    }

    /// Whether the closed segment `a → b` touches any obstacle.
    pub fn segment_blocked(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        if self.is_occupied(a) || self.is_occupied(b) {
            return true;
        }
        let d = sub(b, a);
        let len = d[0].hypot(d[1]);
        len > 0.0 && self.first_hit(a, [d[0] / len, d[1] / len], len).is_some()
    }

    /// Ground-truth occupancy sampled at cell centres: `[0, 1, 0]` inside
    /// obstacles, `[1, 0, 0]` elsewhere. `frame` places the grid in the world.
    pub fn ground_truth<T: Scalar>(&self, geometry: &GridGeometry, frame: &Pose2D) -> EvidenceGrid<T> {
        let free = MassFunction::from_committed(T::one(), T::zero()).expect("certain mass");
        let occupied = MassFunction::from_committed(T::zero(), T::one()).expect("certain mass");
        let cells = (0..geometry.len())
            .map(|i| {
                let (ix, iy) = geometry.coords(i);
                if self.is_occupied(frame.transform_point(geometry.cell_center(ix, iy))) {
                    occupied
                } else {
                    free
                }
            })
            .collect();
        EvidenceGrid::from_cells(*geometry, "ground_truth", cells).expect("cell count matches geometry")
    }
}
