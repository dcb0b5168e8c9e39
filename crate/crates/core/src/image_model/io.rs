//! PNG / ASCII PNM images and full-precision CSV data-images.
//!
//! 8-bit samples map to `byte / 255` on reading. On writing, screen values are
//! quantized to `round(255 v)` with halves rounded away from zero.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};
use ndarray::Array2;

use super::{MonoImage, PixelState, RgbImage};
use crate::error::{domain, Error, Result};

/// A decoded picture: gray files give one channel, colour files three.
#[derive(Debug, Clone, PartialEq)]
pub enum Picture {
    Mono(MonoImage),
    Rgb(RgbImage),
}

impl Picture {
    pub fn side(&self) -> usize {
        match self {
            Self::Mono(m) => m.side(),
            Self::Rgb(c) => c.side(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RasterFormat {
    Png,
    Pgm,
    Ppm,
}

fn raster_format(path: &Path) -> Result<RasterFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("png") => Ok(RasterFormat::Png),
        Some("pgm") => Ok(RasterFormat::Pgm),
        Some("ppm") => Ok(RasterFormat::Ppm),
        _ => Err(domain(format!(
            "{}: unsupported image extension (png, pgm, ppm)",
            path.display()
        ))),
    }
}

/// `byte / 255`
pub fn byte_to_unit(b: u8) -> f64 {
    f64::from(b) / 255.0
}

/// `round(255 v)`, halves away from zero. `v` must lie in `[0, 1]`.
pub fn unit_to_byte(v: f64) -> u8 {
    (255.0 * v).round().clamp(0.0, 255.0) as u8
}

fn plane(side: usize, samples: impl Iterator<Item = u8>) -> Result<MonoImage> {
    let values: Vec<f64> = samples.map(byte_to_unit).collect();
    let pixels = Array2::from_shape_vec((side, side), values).map_err(|e| domain(e.to_string()))?;
    MonoImage::new(pixels, PixelState::Screen)
}

/// Reads an 8-bit gray or RGB PNG/PGM/PPM file.
pub fn read_picture(path: &Path) -> Result<Picture> {
    let decoded = ImageReader::open(path)?.with_guessed_format()?.decode()?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    if w != h {
        return Err(domain(format!(
            "{}: screen must be square N×N (got {w}x{h})",
            path.display()
        )));
    }
    match decoded {
        DynamicImage::ImageLuma8(buf) => Ok(Picture::Mono(plane(w, buf.into_raw().into_iter())?)),
        DynamicImage::ImageRgb8(buf) => {
            let raw = buf.into_raw();
            let ch = |k: usize| plane(w, raw.iter().skip(k).step_by(3).copied());
            Ok(Picture::Rgb(RgbImage::new(ch(0)?, ch(1)?, ch(2)?)?))
        }
        other => {
            let color = other.color();
            let why = if color.has_alpha() {
                "alpha channels are not supported"
            } else {
                "only 8-bit gray or 8-bit RGB samples are supported"
            };
            Err(Error::Format(format!("{}: {why} ({color:?})", path.display())))
        }
    }
}

fn screen_bytes(image: &MonoImage) -> Result<Vec<u8>> {
    if image.state() != PixelState::Screen {
        return Err(domain(
            "data-images must be normalized or clipped before writing as pictures",
        ));
    }
    Ok(image.pixels().iter().map(|&v| unit_to_byte(v)).collect())
}

fn encode(path: &Path, bytes: &[u8], side: usize, color: ExtendedColorType) -> Result<()> {
    let fmt = raster_format(path)?;
    let rgb = color == ExtendedColorType::Rgb8;
    let side = u32::try_from(side).map_err(|_| domain("image too large"))?;
    let mut w = BufWriter::new(File::create(path)?);
    match fmt {
        RasterFormat::Png => PngEncoder::new(&mut w).write_image(bytes, side, side, color)?,
        RasterFormat::Pgm | RasterFormat::Ppm => {
            if rgb != (fmt == RasterFormat::Ppm) {
                return Err(domain(format!(
                    "{}: use .pgm for gray and .ppm for colour images",
                    path.display()
                )));
            }
            let subtype = if rgb {
                PnmSubtype::Pixmap(SampleEncoding::Ascii)
            } else {
                PnmSubtype::Graymap(SampleEncoding::Ascii)
            };
            PnmEncoder::new(&mut w)
                .with_subtype(subtype)
                .write_image(bytes, side, side, color)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a screen-image as an 8-bit gray picture.
pub fn write_mono_picture(image: &MonoImage, path: &Path) -> Result<()> {
    let bytes = screen_bytes(image)?;
    encode(path, &bytes, image.side(), ExtendedColorType::L8)
}

/// Writes a screen-image as an 8-bit RGB picture.
pub fn write_rgb_picture(image: &RgbImage, path: &Path) -> Result<()> {
    let planes = image
        .channels()
        .iter()
        .map(screen_bytes)
        .collect::<Result<Vec<_>>>()?;
    let n = planes[0].len();
    let mut bytes = Vec::with_capacity(3 * n);
    for k in 0..n {
        bytes.extend(planes.iter().map(|p| p[k]));
    }
    encode(path, &bytes, image.side(), ExtendedColorType::Rgb8)
}

pub fn write_picture(picture: &Picture, path: &Path) -> Result<()> {
    match picture {
        Picture::Mono(m) => write_mono_picture(m, path),
        Picture::Rgb(c) => write_rgb_picture(c, path),
    }
}

fn write_rows<'a>(path: &Path, planes: impl Iterator<Item = &'a MonoImage>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for plane in planes {
        for row in plane.pixels().rows() {
            // shortest representation that parses back to the same bits
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One CSV row per raster row, values at full precision.
pub fn write_mono_csv(image: &MonoImage, path: &Path) -> Result<()> {
    write_rows(path, std::iter::once(image))
}

/// R, G and B blocks of `N` rows each.
pub fn write_rgb_csv(image: &RgbImage, path: &Path) -> Result<()> {
    write_rows(path, image.channels().iter())
}

pub fn write_picture_csv(picture: &Picture, path: &Path) -> Result<()> {
    match picture {
        Picture::Mono(m) => write_mono_csv(m, path),
        Picture::Rgb(c) => write_rgb_csv(c, path),
    }
}

/// Reads a CSV written by [`write_mono_csv`] or [`write_rgb_csv`]; the row
/// count decides which (`N` or `3N` rows of `N` values). Values are data.
pub fn read_csv(path: &Path) -> Result<Picture> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    Error::Format(format!("{}: row {}: bad number {s:?}", path.display(), k + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let Some(width) = rows.first().map(Vec::len) else {
        return Err(Error::Format(format!("{}: empty CSV", path.display())));
    };
    if rows.len() == width {
        return Ok(Picture::Mono(MonoImage::from_rows(&rows, PixelState::Data)?));
    }
    if rows.len() == 3 * width {
        let mut chans = rows
            .chunks(width)
            .map(|block| MonoImage::from_rows(block, PixelState::Data));
        let (r, g, b) = (chans.next().unwrap()?, chans.next().unwrap()?, chans.next().unwrap()?);
        return Ok(Picture::Rgb(RgbImage::new(r, g, b)?));
    }
    Err(domain(format!(
        "{}: screen must be square N×N ({} rows of {width} values)",
        path.display(),
        rows.len()
    )))
}

/// Reads either a picture or, for `.csv`, a data-image.
pub fn read_any(path: &Path) -> Result<Picture> {
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        read_csv(path)
    } else {
        read_picture(path)
    }
}
