//! End-to-end checks of the rotation pipeline at screen sizes too large for
//! the property suites.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::time::Instant;

use finrot::analysis::{antidiagonal_profile, overshoot_stats};
use finrot::image_model::{
    clip_mono, normalize_mono, pattern_delta, pattern_letter_r, pattern_step, rotate_mono,
    rotate_rgb,
};
use finrot::kernel::{
    apply_kernel, build_kernel_cartesian, build_kernel_polar, unitarity_residual,
};
use finrot::polar::PolarBasis;
use finrot::{MonoImage, OscillatorRep, PixelState, RgbImage, RotationKernel, WavefunctionTable};
use ndarray::Array2;
use num_complex::Complex64;

fn cartesian(two_j: u32, theta: f64) -> RotationKernel {
    let rep = OscillatorRep::from_two_j(two_j);
    build_kernel_cartesian(rep, theta, &WavefunctionTable::new(rep)).unwrap()
}

#[test]
fn large_screen_kernel_is_unitary() {
    let k = cartesian(50, FRAC_PI_4);
    let r = unitarity_residual(&k);
    assert!(r < 1e-8, "{r}");
}

#[test]
fn polar_kernel_is_unitary() {
    let rep = OscillatorRep::from_two_j(10);
    let basis = PolarBasis::new(&WavefunctionTable::new(rep));
    let built = build_kernel_polar(rep, FRAC_PI_8, &basis).unwrap();
    assert!(unitarity_residual(&built.kernel) < 1e-9);
    assert!(!built.suspicious());
}

#[test]
fn rotated_delta_normalizes_onto_unit_range() {
    let delta = pattern_delta(51).unwrap();
    let k = cartesian(50, FRAC_PI_4);
    let rotated = rotate_mono(&delta, FRAC_PI_4, &k).unwrap();
    let (lo, hi) = rotated.min_max();
    assert!(lo < 0.0, "undershoot expected, min {lo}");

    let (shown, stats) = normalize_mono(&rotated);
    assert_eq!(stats.lower(), lo);
    assert_eq!(stats.upper(), hi.max(1.0));
    let (slo, shi) = shown.min_max();
    assert_eq!(slo, 0.0);
    assert!((shi - stats.map(hi)).abs() < 1e-15 && shi <= 1.0);
    // every value is an affine image, none was clamped
    for (v, s) in rotated.pixels().iter().zip(shown.pixels()) {
        let expect = (v - stats.lower()) / (stats.upper() - stats.lower());
        assert!((s - expect).abs() < 1e-15);
    }
}

#[test]
fn rotated_letter_escapes_unit_range() {
    let r = pattern_letter_r(50).unwrap();
    let k = cartesian(49, FRAC_PI_4);
    let rotated = rotate_mono(&r, FRAC_PI_4, &k).unwrap();
    let (lo, hi) = rotated.min_max();
    assert!(lo < 0.0 && hi > 1.0, "[{lo}, {hi}]");

    let clipped = clip_mono(&rotated);
    let (normalized, _) = normalize_mono(&rotated);
    let mut outside = 0;
    for ((v, c), n) in rotated.pixels().iter().zip(clipped.pixels()).zip(normalized.pixels()) {
        if *v == lo || *v == hi {
            assert_eq!(c, n);
        } else if !(0.0..=1.0).contains(v) {
            outside += 1;
            assert_ne!(c, n);
        }
    }
    assert!(outside > 0);
}

#[test]
fn gray_replicated_channels_stay_equal() {
    let gray = pattern_letter_r(12).unwrap();
    let k = cartesian(11, 0.7);
    let out = rotate_rgb(&RgbImage::gray(gray), 0.7, &k).unwrap();
    let [r, g, b] = out.channels();
    assert_eq!(r.pixels(), g.pixels());
    assert_eq!(g.pixels(), b.pixels());
}

#[test]
fn rotated_step_profile_crosses_half_near_centre() {
    let step = pattern_step(30).unwrap();
    let k = cartesian(29, FRAC_PI_4);
    let profile = antidiagonal_profile(&rotate_mono(&step, FRAC_PI_4, &k).unwrap());
    assert_eq!(profile.len(), 30);
    let crossings: Vec<usize> = (0..29)
        .filter(|&i| (profile[i] - 0.5) * (profile[i + 1] - 0.5) < 0.0)
        .collect();
    assert!(crossings.iter().any(|&i| (12..=16).contains(&i)), "{crossings:?}");
    // oscillation: the profile changes direction more than once
    let turns = (1..29)
        .filter(|&i| (profile[i] - profile[i - 1]) * (profile[i + 1] - profile[i]) < 0.0)
        .count();
    assert!(turns >= 2, "{profile:?}");
}

#[test]
fn real_part_of_polar_mode_rotates_by_phase() {
    let rep = OscillatorRep::from_two_j(4);
    let basis = PolarBasis::new(&WavefunctionTable::new(rep));
    let theta = 0.9;
    let k = cartesian(4, theta);
    let mut worst: f64 = 0.0;
    for mode in basis.modes() {
        let re = MonoImage::new(mode.values.mapv(|c| c.re), PixelState::Data).unwrap();
        let out = apply_kernel(&k, &re).unwrap();
        let phase = Complex64::from_polar(1.0, -(mode.index.m() as f64) * theta);
        let expect: Array2<f64> = mode.values.mapv(|c| (phase * c).re);
        let diff = (out.pixels() - &expect).mapv(f64::abs).fold(0.0, |a: f64, &b| a.max(b));
        worst = worst.max(diff);
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn screen_image_has_no_overshoot() {
    let report = overshoot_stats(&pattern_letter_r(16).unwrap());
    assert!(report.min() >= 0.0 && report.max() <= 1.0);
}

/// Whether R(π/2) is the pixel permutation `F'(qx, qy) = F(-qy, qx)`.
/// Reported, not asserted.
#[test]
fn quarter_turn_permutation_report() {
    for two_j in 1..=8u32 {
        let k = cartesian(two_j, FRAC_PI_2);
        let side = two_j as usize + 1;
        let mut worst: f64 = 0.0;
        for ix in 0..side {
            for iy in 0..side {
                for src in 0..side * side {
                    let want = if src == (side - 1 - iy) * side + ix { 1.0 } else { 0.0 };
                    worst = worst.max((k.matrix()[[ix * side + iy, src]] - want).abs());
                }
            }
        }
        println!("N={side}: max |R(π/2) - permutation| = {worst:.2e}");
    }
}

/// Build time at N = 52 with 1 and 4 worker threads.
#[test]
fn parallel_build_speedup() {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    if cores < 4 {
        println!("SKIP parallel speedup: {cores} core(s) available, 4 needed");
        return;
    }
    let rep = OscillatorRep::from_two_j(51);
    let table = WavefunctionTable::new(rep);
    let time = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let start = Instant::now();
            build_kernel_cartesian(rep, FRAC_PI_8, &table).unwrap();
            start.elapsed()
        })
    };
    let one = time(1);
    let four = time(4);
    let speedup = one.as_secs_f64() / four.as_secs_f64();
    println!("N=52 build: 1 thread {one:.2?}, 4 threads {four:.2?}, speedup {speedup:.2}");
    assert!(speedup >= 2.0);
}
