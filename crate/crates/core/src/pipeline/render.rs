use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::grid::EvidenceGrid;
use crate::scalar::Scalar;

fn channel(v: f64) -> u8 {
    (255.0 * v).round().clamp(0.0, 255.0) as u8
}

/// RGB image of a mass grid: red free, green occupied, blue unknown.
/// Row `iy = 0` is the bottom of the image.
pub fn render_image<T: Scalar>(grid: &EvidenceGrid<T>) -> RgbImage {
    let g = grid.geometry();
    RgbImage::from_fn(g.width as u32, g.height as u32, |x, y| {
        let m = grid.get(x as usize, g.height - 1 - y as usize);
        Rgb([channel(m.free().to_f64_lossy()), channel(m.occupied().to_f64_lossy()), channel(m.unknown().to_f64_lossy())])
    })
}

pub fn render<T: Scalar>(grid: &EvidenceGrid<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    render_image(grid).save_with_format(path, image::ImageFormat::Png).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path, "image", other.to_string()),
    })
}
