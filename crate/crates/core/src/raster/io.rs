use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::orbit::{OrbitVerdict, Status};

use super::PixelGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    /// Format implied by the file extension (`.png`, else PGM).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("png") => ImageFormat::Png,
            _ => ImageFormat::Pgm,
        }
    }
}

/// Bounded 0, Undetermined 128, Escaped from 255 (escape at iterate 0)
/// darkening logarithmically to 129 at `max_iter`.
pub fn gray_level(verdict: &OrbitVerdict, max_iter: usize) -> u8 {
    match verdict.status {
        Status::Bounded => 0,
        Status::Undetermined => 128,
        Status::Escaped => {
            let e = verdict.escape_iteration.unwrap_or(0).min(max_iter) as f64;
            let shade = (126.0 * e.ln_1p() / (max_iter as f64).ln_1p()).floor();
            255 - shade as u8
        }
    }
}

fn gray_bytes(grid: &PixelGrid) -> Vec<u8> {
    grid.verdicts
        .iter()
        .map(|v| gray_level(v, grid.budget.max_iter))
        .collect()
}

/// Binary PGM (`P5`, maxval 255).
pub fn pgm_bytes(grid: &PixelGrid) -> Vec<u8> {
    let mut out = format!("P5 {} {} 255\n", grid.window.width_px, grid.window.height_px).into_bytes();
    out.extend(gray_bytes(grid));
    out
}

pub fn write_image(grid: &PixelGrid, path: &Path, format: ImageFormat) -> Result<()> {
    match format {
        ImageFormat::Pgm => fs::write(path, pgm_bytes(grid))?,
        ImageFormat::Png => image::save_buffer_with_format(
            path,
            &gray_bytes(grid),
            grid.window.width_px as u32,
            grid.window.height_px as u32,
            image::ExtendedColorType::L8,
            image::ImageFormat::Png,
        )?,
    }
    Ok(())
}

fn bad(reason: &str) -> Error {
    Error::Parse {
        input: "pgm".into(),
        reason: reason.into(),
    }
}

/// Reads a binary 8-bit PGM, returning `(width, height, pixels)`.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = fs::read(path)?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad("expected P5 with maxval 255"));
    }
    let dim = |s: &str| s.parse::<usize>().map_err(|_| bad("bad dimension"));
    let (w, h) = (dim(&fields[1])?, dim(&fields[2])?);
    let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing data"))?;
    if data.len() != w * h {
        return Err(bad("pixel count does not match header"));
    }
    Ok((w, h, data.to_vec()))
}
