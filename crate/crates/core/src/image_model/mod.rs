//! Square mono and RGB images, their rotation, and the two display tactics
//! (affine normalization and clipping) that bring rotated data back into
//! `[0, 1]`.
//!
//! Pixels are stored as a raster `pixels[[iy, ix]]` with `ix = qx + j` and
//! `iy = qy + j`; file row 0 is `iy = 0`.

pub mod io;

use std::fmt;

use ndarray::{Array2, Zip};

use crate::error::{domain, Result};
use crate::kernel::{apply_kernel, KernelSource};
use crate::oscillator::OscillatorRep;

/// Whether pixel values are raw transform output or display-ready.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelState {
    /// Unbounded real values.
    Data,
    /// Every value in `[0, 1]`.
    Screen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonoImage {
    rep: OscillatorRep,
    state: PixelState,
    pixels: Array2<f64>,
}

impl MonoImage {
    pub fn new(pixels: Array2<f64>, state: PixelState) -> Result<Self> {
        let (rows, cols) = pixels.dim();
        if rows != cols {
            return Err(domain(format!(
                "screen must be square N×N (got {cols} wide, {rows} high)"
            )));
        }
        let rep = OscillatorRep::from_side(rows)?;
        if let Some(v) = pixels.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("pixel value {v} is not finite")));
        }
        if state == PixelState::Screen {
            if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(domain(format!("screen-image value {v} outside [0, 1]")));
            }
        }
        Ok(Self { rep, state, pixels })
    }

    /// Builds an image from raster rows (`rows[iy][ix]`).
    pub fn from_rows(rows: &[Vec<f64>], state: PixelState) -> Result<Self> {
        let side = rows.len();
        if rows.iter().any(|r| r.len() != side) {
            return Err(domain("screen must be square N×N (ragged or non-square rows)"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let pixels = Array2::from_shape_vec((side, side), flat).map_err(|e| domain(e.to_string()))?;
        Self::new(pixels, state)
    }

    pub fn zeros(rep: OscillatorRep) -> Self {
        let side = rep.side();
        Self {
            rep,
            state: PixelState::Screen,
            pixels: Array2::zeros((side, side)),
        }
    }

    pub fn rep(&self) -> OscillatorRep {
        self.rep
    }

    pub fn side(&self) -> usize {
        self.rep.side()
    }

    pub fn state(&self) -> PixelState {
        self.state
    }

    pub fn pixels(&self) -> &Array2<f64> {
        &self.pixels
    }

    pub fn into_pixels(self) -> Array2<f64> {
        self.pixels
    }

    /// Value at column `ix`, row `iy`.
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.pixels[[iy, ix]]
    }

    /// Same pixels, relabelled as a data-image.
    pub fn into_data(mut self) -> Self {
        self.state = PixelState::Data;
        self
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// `Σ v²`
    pub fn energy(&self) -> f64 {
        self.pixels.iter().map(|v| v * v).sum()
    }

    /// True when every value already lies in `[0, 1]`.
    pub fn fits_screen(&self) -> bool {
        self.pixels.iter().all(|v| (0.0..=1.0).contains(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    channels: [MonoImage; 3],
}

impl RgbImage {
    pub fn new(r: MonoImage, g: MonoImage, b: MonoImage) -> Result<Self> {
        if r.rep() != g.rep() || r.rep() != b.rep() {
            return Err(domain("colour channels differ in size"));
        }
        if r.state() != g.state() || r.state() != b.state() {
            return Err(domain("colour channels mix data and screen values"));
        }
        Ok(Self { channels: [r, g, b] })
    }

    /// The same mono image in all three channels.
    pub fn gray(image: MonoImage) -> Self {
        Self {
            channels: [image.clone(), image.clone(), image],
        }
    }

    pub fn rep(&self) -> OscillatorRep {
        self.channels[0].rep()
    }

    pub fn side(&self) -> usize {
        self.rep().side()
    }

    pub fn state(&self) -> PixelState {
        self.channels[0].state()
    }

    pub fn channels(&self) -> &[MonoImage; 3] {
        &self.channels
    }

    pub fn into_channels(self) -> [MonoImage; 3] {
        self.channels
    }

    pub fn r(&self) -> &MonoImage {
        &self.channels[0]
    }

    pub fn g(&self) -> &MonoImage {
        &self.channels[1]
    }

    pub fn b(&self) -> &MonoImage {
        &self.channels[2]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.channels.iter().map(MonoImage::min_max).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), (a, b)| (lo.min(a), hi.max(b)),
        )
    }
}

/// Extremes of the data values and the affine map they define.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationStats {
    /// Smallest data value `s`.
    pub min: f64,
    /// Largest data value `S`.
    pub max: f64,
}

impl NormalizationStats {
    pub fn from_range(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// `min(0, s)`
    pub fn lower(&self) -> f64 {
        self.min.min(0.0)
    }

    /// `max(1, S)`
    pub fn upper(&self) -> f64 {
        self.max.max(1.0)
    }

    /// True when the map is the identity (data already within `[0, 1]`).
    pub fn is_identity(&self) -> bool {
        self.lower() == 0.0 && self.upper() == 1.0
    }

    /// `v ↦ (v - s') / (S' - s')`
    pub fn map(&self, v: f64) -> f64 {
        let (lo, hi) = (self.lower(), self.upper());
        if self.is_identity() {
            return v;
        }
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    }
}

fn map_pixels(image: &MonoImage, f: impl Fn(f64) -> f64) -> MonoImage {
    MonoImage {
        rep: image.rep,
        state: PixelState::Screen,
        pixels: image.pixels.mapv(f),
    }
}

/// Affine map into `[0, 1]` with the widened bounds `min(0, s)`, `max(1, S)`.
/// An image already inside `[0, 1]` comes back unchanged.
pub fn normalize_mono(image: &MonoImage) -> (MonoImage, NormalizationStats) {
    let (min, max) = image.min_max();
    let stats = NormalizationStats::from_range(min, max);
    (map_pixels(image, |v| stats.map(v)), stats)
}

/// `v ↦ min(1, max(0, v))`
pub fn clip_mono(image: &MonoImage) -> MonoImage {
    map_pixels(image, |v| v.clamp(0.0, 1.0))
}

pub fn clip_rgb(image: &RgbImage) -> RgbImage {
    RgbImage {
        channels: image.channels.clone().map(|c| clip_mono(&c)),
    }
}

/// Rotation of a mono image by `theta`. The result is a data-image.
pub fn rotate_mono(
    image: &MonoImage,
    theta: f64,
    source: &(impl KernelSource + ?Sized),
) -> Result<MonoImage> {
    let kernel = source.kernel(image.rep(), theta)?;
    apply_kernel(&kernel, image)
}

/// Rotation of all three channels by one kernel, fetched once.
pub fn rotate_rgb(
    image: &RgbImage,
    theta: f64,
    source: &(impl KernelSource + ?Sized),
) -> Result<RgbImage> {
    let kernel = source.kernel(image.rep(), theta)?;
    let [r, g, b] = &image.channels;
    RgbImage::new(
        apply_kernel(&kernel, r)?,
        apply_kernel(&kernel, g)?,
        apply_kernel(&kernel, b)?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMode {
    /// One map from the extremes over all channels.
    Joint,
    /// A separate map per channel; shifts hue.
    PerChannel,
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Joint => "joint",
            Self::PerChannel => "per-channel",
        })
    }
}

/// What a colour normalization did, for output metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationReport {
    pub mode: NormalizationMode,
    /// The map applied to R, G and B. All three are equal in joint mode.
    pub stats: [NormalizationStats; 3],
}

impl fmt::Display for NormalizationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "normalization={}", self.mode)?;
        for (name, st) in ["r", "g", "b"].iter().zip(&self.stats) {
            write!(f, " {name}:[{:.17e},{:.17e}]", st.lower(), st.upper())?;
        }
        Ok(())
    }
}

/// One affine map from the extremes over all channels and pixels.
pub fn normalize_rgb_joint(image: &RgbImage) -> (RgbImage, NormalizationReport) {
    let (min, max) = image.min_max();
    let stats = NormalizationStats::from_range(min, max);
    let out = RgbImage {
        channels: image.channels.clone().map(|c| map_pixels(&c, |v| stats.map(v))),
    };
    let report = NormalizationReport {
        mode: NormalizationMode::Joint,
        stats: [stats; 3],
    };
    (out, report)
}

/// Each channel normalized on its own extremes.
pub fn normalize_rgb_per_channel(image: &RgbImage) -> (RgbImage, NormalizationReport) {
    let mut stats = [NormalizationStats::from_range(0.0, 1.0); 3];
    let mut channels = image.channels.clone();
    for (c, st) in channels.iter_mut().zip(stats.iter_mut()) {
        let (out, s) = normalize_mono(c);
        *c = out;
        *st = s;
    }
    let report = NormalizationReport {
        mode: NormalizationMode::PerChannel,
        stats,
    };
    (RgbImage { channels }, report)
}

/// `a F + b G`
pub fn linear_combination(a: f64, f: &MonoImage, b: f64, g: &MonoImage) -> Result<MonoImage> {
    if f.rep() != g.rep() {
        return Err(domain("images differ in size"));
    }
    let pixels = Zip::from(&f.pixels).and(&g.pixels).map_collect(|x, y| a * x + b * y);
    MonoImage::new(pixels, PixelState::Data)
}

/// Ones on the centre row `qy = 0`, zeros elsewhere. Odd `N` only.
pub fn pattern_delta(side: usize) -> Result<MonoImage> {
    if side.is_multiple_of(2) {
        return Err(domain(format!(
            "delta pattern needs an odd side (a centre row), got N = {side}"
        )));
    }
    let centre = side / 2;
    let pixels = Array2::from_shape_fn((side, side), |(iy, _)| if iy == centre { 1.0 } else { 0.0 });
    MonoImage::new(pixels, PixelState::Screen)
}

/// Zeros for `qy < 0`, ones for `qy > 0`. Even `N` only.
pub fn pattern_step(side: usize) -> Result<MonoImage> {
    if side % 2 == 1 || side == 0 {
        return Err(domain(format!(
            "step pattern needs an even side (no centre row), got N = {side}"
        )));
    }
    let half = side / 2;
    let pixels = Array2::from_shape_fn((side, side), |(iy, _)| if iy >= half { 1.0 } else { 0.0 });
    MonoImage::new(pixels, PixelState::Screen)
}

const GLYPH_R: [&str; 7] = [
    "####.", //
    "#...#",
    "#...#",
    "####.",
    "#.#..",
    "#..#.",
    "#...#",
];

/// A binary capital letter R, drawn upright with file row 0 at the top and
/// scaled into the central three quarters of the screen. Needs `N ≥ 8`.
pub fn pattern_letter_r(side: usize) -> Result<MonoImage> {
    if side < 8 {
        return Err(domain(format!("letter pattern needs N ≥ 8, got {side}")));
    }
    let margin = side / 8;
    let inner = side - 2 * margin;
    let (gw, gh) = (GLYPH_R[0].len(), GLYPH_R.len());
    let pixels = Array2::from_shape_fn((side, side), |(iy, ix)| {
        if ix < margin || iy < margin || ix >= margin + inner || iy >= margin + inner {
            return 0.0;
        }
        let gx = (ix - margin) * gw / inner;
        let gy = (iy - margin) * gh / inner;
        if GLYPH_R[gy].as_bytes()[gx] == b'#' {
            1.0
        } else {
            0.0
        }
    });
    MonoImage::new(pixels, PixelState::Screen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: &[&[f64]]) -> MonoImage {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        MonoImage::from_rows(&rows, PixelState::Data).unwrap()
    }

    #[test]
    fn non_square_rejected() {
        let err = MonoImage::new(Array2::zeros((3, 4)), PixelState::Data).unwrap_err();
        assert!(err.to_string().contains("screen must be square N×N"));
        assert!(MonoImage::from_rows(&[vec![0.0, 1.0]], PixelState::Data).is_err());
    }

    #[test]
    fn screen_state_is_enforced() {
        assert!(MonoImage::new(Array2::from_elem((2, 2), 1.2), PixelState::Screen).is_err());
        assert!(MonoImage::new(Array2::from_elem((2, 2), 1.2), PixelState::Data).is_ok());
        assert!(MonoImage::new(Array2::from_elem((2, 2), f64::NAN), PixelState::Data).is_err());
    }

    #[test]
    fn normalize_example() {
        let img = data(&[&[-0.2, 0.5], &[1.3, 0.5]]);
        let (out, st) = normalize_mono(&img);
        assert_eq!((st.min, st.max), (-0.2, 1.3));
        assert_eq!(out.get(0, 0), 0.0);
        assert!((out.get(1, 0) - 0.7 / 1.5).abs() < 1e-15);
        assert_eq!(out.get(0, 1), 1.0);
        assert_eq!(out.state(), PixelState::Screen);
    }

    #[test]
    fn normalize_keeps_screen_values() {
        let img = data(&[&[0.1, 0.25], &[0.3, 0.9]]);
        let (out, st) = normalize_mono(&img);
        assert!(st.is_identity());
        assert_eq!(out.pixels(), img.pixels());
    }

    #[test]
    fn clip_example() {
        let img = data(&[&[-0.2, 0.5], &[1.3, 0.5]]);
        let out = clip_mono(&img);
        assert_eq!(out.pixels().iter().copied().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn joint_example() {
        let r = data(&[&[-0.5, 0.5], &[0.0, 0.0]]);
        let g = data(&[&[0.0, 1.0], &[0.5, 0.5]]);
        let b = data(&[&[0.0, 1.5], &[1.0, 1.0]]);
        let img = RgbImage::new(r, g, b).unwrap();
        let (out, rep) = normalize_rgb_joint(&img);
        assert_eq!(rep.mode, NormalizationMode::Joint);
        for (src, dst) in img.channels().iter().zip(out.channels()) {
            for (v, w) in src.pixels().iter().zip(dst.pixels()) {
                assert_eq!(*w, (v + 0.5) / 2.0);
            }
        }
        let (per, prep) = normalize_rgb_per_channel(&img);
        assert_eq!(prep.mode, NormalizationMode::PerChannel);
        assert_ne!(per, out);
        assert_ne!(rep.to_string(), prep.to_string());
    }

    #[test]
    fn delta_pattern() {
        let d = pattern_delta(11).unwrap();
        for iy in 0..11 {
            for ix in 0..11 {
                assert_eq!(d.get(ix, iy), if iy == 5 { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(d.pixels().sum(), 11.0);
        assert!(pattern_delta(10).is_err());
        assert_eq!(pattern_delta(3).unwrap().get(0, 1), 1.0);
    }

    #[test]
    fn step_pattern() {
        let s = pattern_step(2).unwrap();
        assert_eq!(s.pixels(), &ndarray::arr2(&[[0.0, 0.0], [1.0, 1.0]]));
        let s = pattern_step(10).unwrap();
        for iy in 0..10 {
            assert_eq!(s.get(3, iy), if iy >= 5 { 1.0 } else { 0.0 });
        }
        assert!(pattern_step(11).is_err());
    }

    #[test]
    fn letter_is_binary_and_nonempty() {
        let r = pattern_letter_r(50).unwrap();
        let ones = r.pixels().iter().filter(|v| **v == 1.0).count();
        let zeros = r.pixels().iter().filter(|v| **v == 0.0).count();
        assert_eq!(ones + zeros, 2500);
        assert!(ones > 300 && zeros > 300);
        assert!(pattern_letter_r(5).is_err());
    }
}
