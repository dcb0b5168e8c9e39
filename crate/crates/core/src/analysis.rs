//! Over/undershoot statistics of rotated binary patterns.
//!
//! A rotated sharp pattern leaves `[0, 1]` near its discontinuities. The
//! reports here expose the undershoot `|s|` and the overshoot `S - 1`
//! separately, since the two are generally unequal.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{domain, Result};
use crate::image_model::{pattern_delta, pattern_step, rotate_mono, MonoImage};
use crate::kernel::KernelSource;

/// Values at `(row i, column N-1-i)`, `i = 0..N`.
pub fn antidiagonal_profile(image: &MonoImage) -> Vec<f64> {
    let n = image.side();
    (0..n).map(|i| image.pixels()[[i, n - 1 - i]]).collect()
}

/// Extreme value with its pixel `(ix, iy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extreme {
    pub value: f64,
    pub ix: usize,
    pub iy: usize,
}

/// Minimum and maximum over a set of pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub min: Extreme,
    pub max: Extreme,
}

/// Extremes over the pixels selected by `keep`, scanned in kernel order
/// (`ix` major) so ties go to the smallest flattened index.
fn extremes(image: &MonoImage, keep: impl Fn(usize, usize) -> bool) -> Option<Extremes> {
    let n = image.side();
    let mut acc: Option<Extremes> = None;
    for ix in 0..n {
        for iy in 0..n {
            if !keep(ix, iy) {
                continue;
            }
            let here = Extreme { value: image.get(ix, iy), ix, iy };
            match &mut acc {
                None => acc = Some(Extremes { min: here, max: here }),
                Some(e) => {
                    if here.value < e.min.value {
                        e.min = here;
                    }
                    if here.value > e.max.value {
                        e.max = here;
                    }
                }
            }
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct OvershootReport {
    pub global: Extremes,
    /// Extremes over the outermost ring of pixels.
    pub border: Extremes,
    /// Extremes away from the outermost ring; `None` for `N ≤ 2`.
    pub interior: Option<Extremes>,
    pub profile: Vec<f64>,
}

impl OvershootReport {
    /// Most negative value `s`.
    pub fn min(&self) -> f64 {
        self.global.min.value
    }

    /// Largest value `S`.
    pub fn max(&self) -> f64 {
        self.global.max.value
    }

    /// `|s|`
    pub fn undershoot(&self) -> f64 {
        self.min().abs()
    }

    /// `S - 1`; negative when the image never exceeds 1.
    pub fn overshoot(&self) -> f64 {
        self.max() - 1.0
    }

    /// `s < 0 < 1 < S`
    pub fn escapes_both_sides(&self) -> bool {
        self.min() < 0.0 && self.max() > 1.0
    }
}

pub fn overshoot_stats(image: &MonoImage) -> OvershootReport {
    let n = image.side();
    let on_border = move |ix: usize, iy: usize| ix == 0 || iy == 0 || ix == n - 1 || iy == n - 1;
    OvershootReport {
        global: extremes(image, |_, _| true).expect("images have at least one pixel"),
        border: extremes(image, on_border).expect("images have at least one pixel"),
        interior: extremes(image, |ix, iy| !on_border(ix, iy)),
        profile: antidiagonal_profile(image),
    }
}

/// Test pattern used in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// Centre row of ones; odd sides.
    Delta,
    /// Upper half of ones; even sides.
    Step,
}

impl PatternKind {
    pub fn build(self, side: usize) -> Result<MonoImage> {
        match self {
            Self::Delta => pattern_delta(side),
            Self::Step => pattern_step(side),
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Delta => "delta",
            Self::Step => "step",
        })
    }
}

impl FromStr for PatternKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "delta" => Ok(Self::Delta),
            "step" => Ok(Self::Step),
            _ => Err(domain(format!("unknown pattern {s:?} (delta, step)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub side: usize,
    pub report: OvershootReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSweep {
    pub kind: PatternKind,
    pub theta: f64,
    pub rows: Vec<SweepRow>,
}

/// Strict decrease of `max(0, v)`: a shoot that never happens has no
/// magnitude to shrink.
fn magnitudes_decreasing(values: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.map(|x| x.max(0.0)).collect();
    v.windows(2).all(|w| w[1] < w[0])
}

impl GibbsSweep {
    /// `S - 1` shrinks strictly with each successive side.
    pub fn overshoot_decreasing(&self) -> bool {
        magnitudes_decreasing(self.rows.iter().map(|r| r.report.overshoot()))
    }

    /// `|s|` shrinks strictly with each successive side.
    pub fn undershoot_decreasing(&self) -> bool {
        magnitudes_decreasing(self.rows.iter().map(|r| r.report.undershoot()))
    }

    /// One-line monotonicity summary for logs.
    pub fn summary(&self) -> String {
        let word = |b: bool| if b { "strictly decreasing" } else { "not strictly decreasing" };
        format!(
            "{} sweep at θ = {}: overshoot {}, undershoot {}",
            self.kind,
            self.theta,
            word(self.overshoot_decreasing()),
            word(self.undershoot_decreasing())
        )
    }

    /// Header `N,s,S,undershoot,overshoot`, one row per side.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["N", "s", "S", "undershoot", "overshoot"])?;
        for row in &self.rows {
            let r = &row.report;
            w.write_record([
                row.side.to_string(),
                format!("{:?}", r.min()),
                format!("{:?}", r.max()),
                format!("{:?}", r.undershoot()),
                format!("{:?}", r.overshoot()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rotates the pattern at every side in `sides` and collects the extremes.
pub fn gibbs_sweep(
    kind: PatternKind,
    sides: &[usize],
    theta: f64,
    source: &(impl KernelSource + ?Sized),
) -> Result<GibbsSweep> {
    let patterns = sides
        .iter()
        .map(|&n| kind.build(n))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(sides.len());
    for (pattern, &side) in patterns.iter().zip(sides) {
        let rotated = rotate_mono(pattern, theta, source)?;
        rows.push(SweepRow { side, report: overshoot_stats(&rotated) });
    }
    Ok(GibbsSweep { kind, theta, rows })
}

/// Header `i,value`, one row per anti-diagonal pixel.
pub fn write_profile_csv(profile: &[f64], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "value"])?;
    for (i, v) in profile.iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:?}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_model::PixelState;
    use crate::kernel::CartesianBuilder;

    #[test]
    fn profile_index_arithmetic() {
        let img = MonoImage::from_rows(
            &[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]],
            PixelState::Data,
        )
        .unwrap();
        assert_eq!(antidiagonal_profile(&img), vec![3.0, 5.0, 7.0]);
    }

    #[test]
    fn unrotated_delta_profile() {
        let p = antidiagonal_profile(&pattern_delta(11).unwrap());
        let mut want = vec![0.0; 11];
        want[5] = 1.0;
        assert_eq!(p, want);
    }

    #[test]
    fn ties_go_to_smallest_flat_index() {
        let img = MonoImage::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]], PixelState::Data).unwrap();
        let r = overshoot_stats(&img);
        // flat index ix * N + iy: (0,0) -> 0, (1,0) -> 2, (0,1) -> 1
        assert_eq!((r.global.max.ix, r.global.max.iy), (0, 0));
        assert_eq!((r.global.min.ix, r.global.min.iy), (0, 1));
    }

    #[test]
    fn screen_images_stay_in_range() {
        let r = overshoot_stats(&pattern_step(10).unwrap());
        assert!(r.min() >= 0.0 && r.max() <= 1.0);
        assert_eq!(r.undershoot(), 0.0);
        assert_eq!(r.overshoot(), 0.0);
    }

    #[test]
    fn zero_angle_sweep_rows() {
        let sweep = gibbs_sweep(PatternKind::Delta, &[3, 5, 7], 0.0, &CartesianBuilder).unwrap();
        for row in &sweep.rows {
            assert!(row.report.min().abs() < 1e-12);
            assert!((row.report.max() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_errors() {
        assert!(gibbs_sweep(PatternKind::Delta, &[11, 10], 0.1, &CartesianBuilder).is_err());
        assert!(gibbs_sweep(PatternKind::Step, &[11], 0.1, &CartesianBuilder).is_err());
    }

    #[test]
    fn absent_shoots_do_not_count_as_shrinking() {
        assert!(magnitudes_decreasing([0.3, 0.2, 0.1].into_iter()));
        assert!(!magnitudes_decreasing([-0.03, -0.07, -0.09].into_iter()));
        assert!(!magnitudes_decreasing([0.1, 0.2].into_iter()));
    }

    #[test]
    fn sweep_csv_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let sweep = gibbs_sweep(PatternKind::Step, &[4], 0.3, &CartesianBuilder).unwrap();
        sweep.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("N,s,S,undershoot,overshoot\n4,"));
    }
}
