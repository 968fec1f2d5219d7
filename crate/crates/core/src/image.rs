//! Iteration-count coloring and binary PPM (P6) output.
//!
//! Pixels that never escaped (count = `max_iterations`) are black in every
//! colormap. The image's top row is the grid's last row, i.e. the row
//! sampled closest to `im_max`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::kernel::{IterationGrid, Iterations};

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("iteration count {iteration} outside [1, {max_iterations}]")]
    OutOfRange { iteration: Iterations, max_iterations: Iterations },
    #[error("write failed after {bytes_written} bytes: {source}")]
    Io { bytes_written: usize, source: io::Error },
    #[error("unknown colormap '{0}' (expected grayscale or classic)")]
    UnknownColorMap(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorMap {
    /// Linear ramp from black (escaped on the first iteration) towards white.
    #[default]
    Grayscale,
    /// Three bands over the escape range: black→blue, blue→white,
    /// white→orange.
    Classic,
}

impl fmt::Display for ColorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            ColorMap::Grayscale => "grayscale",
            ColorMap::Classic => "classic",
        })
    }
}

impl FromStr for ColorMap {
    type Err = ImageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grayscale" | "greyscale" | "gray" | "grey" => Ok(ColorMap::Grayscale),
            "classic" => Ok(ColorMap::Classic),
            _ => Err(ImageError::UnknownColorMap(s.to_string())),
        }
    }
}

pub type Rgb = [u8; 3];

fn ramp(fraction: f64) -> u8 {
    (255.0 * fraction).round().clamp(0.0, 255.0) as u8
}

/// Maps an iteration count to a color.
pub fn map_color(iteration: Iterations, max_iterations: Iterations, mode: ColorMap) -> Result<Rgb, ImageError> {
    if iteration == 0 || iteration > max_iterations {
        return Err(ImageError::OutOfRange { iteration, max_iterations });
    }
    if iteration == max_iterations {
        return Ok([0, 0, 0]);
    }
    // escaped, so max_iterations >= 2
    let t = f64::from(iteration - 1) / f64::from(max_iterations - 1);
    Ok(match mode {
        ColorMap::Grayscale => {
            let v = ramp(t);
            [v, v, v]
        }
        ColorMap::Classic => {
            let scaled = 3.0 * t;
            let band = scaled.floor().min(2.0);
            let v = ramp(scaled - band);
            match band as u8 {
                0 => [0, 0, v],
                1 => [v, v, 255],
                _ => [255, 255 - v / 2, 255 - v],
            }
        }
    })
}

/// The PPM header for a `width × height` image.
pub fn ppm_header(width: usize, height: usize) -> String {
    format!("P6\n{width} {height}\n255\n")
}

/// Bytes [`write_ppm`] produces for the given dimensions.
pub fn ppm_len(width: usize, height: usize) -> usize {
    ppm_header(width, height).len() + 3 * width * height
}

/// Encodes `grid` as binary PPM into `out` and returns the bytes written.
pub fn write_ppm<W: Write + ?Sized>(grid: &IterationGrid, mode: ColorMap, out: &mut W) -> Result<usize, ImageError> {
    let mut written = 0usize;
    let mut emit = |out: &mut W, bytes: &[u8]| -> Result<(), ImageError> {
        out.write_all(bytes).map_err(|source| ImageError::Io { bytes_written: written, source })?;
        written += bytes.len();
        Ok(())
    };
    emit(out, ppm_header(grid.width(), grid.height()).as_bytes())?;
    let max = grid.max_iterations();
    let mut line = Vec::with_capacity(grid.width() * 3);
    for row in grid.rows().rev() {
        line.clear();
        for &cell in row {
            line.extend_from_slice(&map_color(cell, max, mode)?);
        }
        emit(out, &line)?;
    }
    out.flush().map_err(|source| ImageError::Io { bytes_written: written, source })?;
    Ok(written)
}
