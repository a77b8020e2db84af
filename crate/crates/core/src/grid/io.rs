//! EVGR grid files.
//!
//! Layout (all little-endian):
//!
//! | offset | type    | field                         |
//! |--------|---------|-------------------------------|
//! | 0      | `[u8;4]`| magic `EVGR`                  |
//! | 4      | `u32`   | width                         |
//! | 8      | `u32`   | height                        |
//! | 12     | `u32`   | plane count (3 masses, 2 evidence counts) |
//! | 16     | `f32`   | resolution (m / cell)         |
//! | 20     | `f32`   | origin x (m)                  |
//! | 24     | `f32`   | origin y (m)                  |
//! | 28     | `u32`   | reserved, 0                   |
//!
//! followed by `planes` row-major planes of `width × height` `f32` values:
//! `(m_f, m_o, m_u)` for mass grids, `(e_f, e_o)` for evidence grids.

use std::fs;
use std::path::Path;

use super::{EvidenceGrid, GridGeometry};
use crate::error::{Error, Result};
use crate::evidence::{MassFunction, SubjectiveOpinion};
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"EVGR";
pub const HEADER_LEN: usize = 32;
pub const MASS_PLANES: u32 = 3;
pub const EVIDENCE_PLANES: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub geometry: GridGeometry,
    pub planes: u32,
}

fn encode_header(geometry: &GridGeometry, planes: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(geometry.width as u32).to_le_bytes());
    out.extend_from_slice(&(geometry.height as u32).to_le_bytes());
    out.extend_from_slice(&planes.to_le_bytes());
    out.extend_from_slice(&(geometry.resolution as f32).to_le_bytes());
    out.extend_from_slice(&(geometry.origin[0] as f32).to_le_bytes());
    out.extend_from_slice(&(geometry.origin[1] as f32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

fn f32_at(bytes: &[u8], offset: usize) -> f32 {
    f32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

pub fn decode_header(bytes: &[u8], path: &Path) -> Result<Header> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(path, "grid header", format!("{} bytes, need {HEADER_LEN}", bytes.len())));
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::format(path, "grid header", "magic is not EVGR"));
    }
    let width = u32_at(bytes, 4) as usize;
    let height = u32_at(bytes, 8) as usize;
    let planes = u32_at(bytes, 12);
    if width == 0 || height == 0 {
        return Err(Error::format(path, "grid header", format!("width/height {width} × {height}")));
    }
    if planes != MASS_PLANES && planes != EVIDENCE_PLANES {
        return Err(Error::format(path, "grid header", format!("plane count {planes}")));
    }
    let resolution = f32_at(bytes, 16) as f64;
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::format(path, "grid header", format!("resolution {resolution}")));
    }
    let origin = [f32_at(bytes, 20) as f64, f32_at(bytes, 24) as f64];
    if !(origin[0].is_finite() && origin[1].is_finite()) {
        return Err(Error::format(path, "grid header", "non-finite origin"));
    }
    let expected = HEADER_LEN + planes as usize * width * height * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            "grid body",
            format!("{} bytes, header implies {expected}", bytes.len()),
        ));
    }
    Ok(Header {
        geometry: GridGeometry {
            width,
            height,
            resolution,
            origin,
        },
        planes,
    })
}

fn plane(bytes: &[u8], index: usize, len: usize) -> impl Iterator<Item = f32> + '_ {
    let start = HEADER_LEN + index * len * 4;
    bytes[start..start + len * 4]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
}

/// Serializes a mass grid; components are stored as `f32`.
pub fn encode_grid<T: Scalar>(grid: &EvidenceGrid<T>) -> Vec<u8> {
    let geometry = grid.geometry();
    let mut out = encode_header(geometry, MASS_PLANES);
    out.reserve(grid.cells().len() * 12);
    for component in [MassFunction::free, MassFunction::occupied, MassFunction::unknown] {
        for cell in grid.cells() {
            out.extend_from_slice(&(component(cell).to_f64_lossy() as f32).to_le_bytes());
        }
    }
    out
}

/// Serializes per-cell evidence counts as a two-plane file.
pub fn encode_evidence(geometry: &GridGeometry, opinions: &[SubjectiveOpinion<f32>]) -> Vec<u8> {
    assert_eq!(opinions.len(), geometry.len(), "one opinion per cell");
    let mut out = encode_header(geometry, EVIDENCE_PLANES);
    for component in [SubjectiveOpinion::free, SubjectiveOpinion::occupied] {
        for o in opinions {
            out.extend_from_slice(&component(o).to_le_bytes());
        }
    }
    out
}

/// Parses either a three-plane mass file or a two-plane evidence file.
/// Evidence counts are converted through the subjective-logic mapping.
pub fn decode_grid<T: Scalar>(bytes: &[u8], path: &Path) -> Result<EvidenceGrid<T>> {
    let header = decode_header(bytes, path)?;
    let len = header.geometry.len();
    let convert = |v: f32| T::from_f32(v);
    let mut cells = Vec::with_capacity(len);
    if header.planes == MASS_PLANES {
        let triples = plane(bytes, 0, len).zip(plane(bytes, 1, len)).zip(plane(bytes, 2, len));
        for (index, ((f, o), u)) in triples.enumerate() {
            let mass = match (convert(f), convert(o), convert(u)) {
                (Some(f), Some(o), Some(u)) => MassFunction::new(f, o, u).map_err(|e| e.to_string()),
                _ => Err("non-finite component".to_string()),
            }
            .map_err(|e| Error::format(path, "mass cell", format!("cell {index}: {e}")))?;
            cells.push(mass);
        }
    } else {
        for (index, (e_f, e_o)) in plane(bytes, 0, len).zip(plane(bytes, 1, len)).enumerate() {
            let opinion = match (convert(e_f), convert(e_o)) {
                (Some(f), Some(o)) if e_f.is_finite() && e_o.is_finite() => {
                    SubjectiveOpinion::new(f, o).map_err(|e| e.to_string())
                }
                _ => Err("non-finite evidence".to_string()),
            }
            .map_err(|e| Error::format(path, "evidence cell", format!("cell {index}: {e}")))?;
            cells.push(opinion.to_mass());
        }
    }
    EvidenceGrid::from_cells(header.geometry, "file", cells)
}

pub fn write_grid<T: Scalar>(path: impl AsRef<Path>, grid: &EvidenceGrid<T>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_grid(grid)).map_err(|e| Error::io(path, e))
}

pub fn read_grid<T: Scalar>(path: impl AsRef<Path>) -> Result<EvidenceGrid<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_grid(&bytes, path)
}
