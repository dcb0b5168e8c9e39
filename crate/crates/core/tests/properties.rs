//! Invariants over randomly drawn spins, angles and images.

use std::f64::consts::PI;

use finrot::image_model::{
    clip_mono, linear_combination, normalize_mono, normalize_rgb_joint, rotate_mono, rotate_rgb,
};
use finrot::kernel::{apply_kernel, build_kernel_cartesian, max_abs_diff, unitarity_residual};
use finrot::oscillator::WignerMatrix;
use finrot::{MonoImage, OscillatorRep, PixelState, RgbImage, RotationKernel, WavefunctionTable};
use ndarray::Array2;
use proptest::prelude::*;

fn kernel(two_j: u32, theta: f64) -> RotationKernel {
    let rep = OscillatorRep::from_two_j(two_j);
    build_kernel_cartesian(rep, theta, &WavefunctionTable::new(rep)).unwrap()
}

fn image(two_j: u32, seed: u64, scale: f64) -> MonoImage {
    let side = two_j as usize + 1;
    // cheap deterministic noise, values in [-scale, scale]
    let mut state = seed | 1;
    let px = Array2::from_shape_fn((side, side), |_| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        scale * ((state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
    });
    MonoImage::new(px, PixelState::Data).unwrap()
}

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn little_d_is_orthogonal(two_j in 0u32..=64, beta in angle()) {
        let d = WignerMatrix::new(two_j, beta);
        let v = d.values();
        let prod = v.dot(&v.t());
        let dim = v.nrows();
        prop_assert!(max_abs_diff(&prod, &Array2::eye(dim)) < 1e-10);
    }

    #[test]
    fn little_d_group_property(two_j in 0u32..=64, a in angle(), b in angle()) {
        let prod = WignerMatrix::new(two_j, a).values().dot(WignerMatrix::new(two_j, b).values());
        let sum = WignerMatrix::new(two_j, a + b);
        prop_assert!(max_abs_diff(&prod, sum.values()) < 1e-10);
    }

    #[test]
    fn wavefunctions_orthonormal(two_j in 0u32..=80) {
        let t = WavefunctionTable::new(OscillatorRep::from_two_j(two_j));
        let v = t.values();
        let dim = v.nrows();
        prop_assert!(max_abs_diff(&v.dot(&v.t()), &Array2::eye(dim)) < 1e-10);
        prop_assert!(max_abs_diff(&v.t().dot(v), &Array2::eye(dim)) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kernel_unitary_and_inverse(two_j in 0u32..=12, theta in angle()) {
        let k = kernel(two_j, theta);
        prop_assert!(unitarity_residual(&k) < 1e-9);
        let back = kernel(two_j, -theta);
        prop_assert!(max_abs_diff(back.matrix(), k.inverse().matrix()) < 1e-9);
    }

    #[test]
    fn rotation_conserves_energy(two_j in 0u32..=12, theta in angle(), seed in any::<u64>()) {
        let img = image(two_j, seed, 2.0);
        let out = apply_kernel(&kernel(two_j, theta), &img).unwrap();
        prop_assert!((out.energy().sqrt() - img.energy().sqrt()).abs() < 1e-9);
    }

    #[test]
    fn rotation_is_linear(
        two_j in 0u32..=12,
        theta in angle(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let k = kernel(two_j, theta);
        let f = image(two_j, seed, 1.0);
        let g = image(two_j, seed.wrapping_add(77), 1.0);
        let lhs = rotate_mono(&linear_combination(a, &f, b, &g).unwrap(), theta, &k).unwrap();
        let rhs = linear_combination(
            a,
            &rotate_mono(&f, theta, &k).unwrap(),
            b,
            &rotate_mono(&g, theta, &k).unwrap(),
        )
        .unwrap();
        prop_assert!(max_abs_diff(lhs.pixels(), rhs.pixels()) < 1e-9);
    }

    #[test]
    fn rgb_is_channelwise_mono(two_j in 0u32..=10, theta in angle(), seed in any::<u64>()) {
        let k = kernel(two_j, theta);
        let chans = [0, 1, 2].map(|c| image(two_j, seed.wrapping_add(c), 1.0));
        let rgb = RgbImage::new(chans[0].clone(), chans[1].clone(), chans[2].clone()).unwrap();
        let out = rotate_rgb(&rgb, theta, &k).unwrap();
        for (c, o) in chans.iter().zip(out.channels()) {
            prop_assert_eq!(&rotate_mono(c, theta, &k).unwrap(), o);
        }
    }

    #[test]
    fn display_maps_are_idempotent(two_j in 0u32..=20, seed in any::<u64>(), scale in 0.1f64..3.0) {
        let img = image(two_j, seed, scale);
        let once = clip_mono(&img);
        let twice = clip_mono(&once.clone().into_data());
        prop_assert_eq!(twice.pixels(), once.pixels());
        let (n1, _) = normalize_mono(&img);
        let (n2, st) = normalize_mono(&n1.clone().into_data());
        prop_assert!(st.is_identity());
        prop_assert_eq!(n2.pixels(), n1.pixels());
        prop_assert!(n1.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
        let (lo, hi) = img.min_max();
        let (nlo, nhi) = n1.min_max();
        prop_assert_eq!(nlo == 0.0 && nhi == 1.0, lo <= 0.0 && hi >= 1.0);
    }

    #[test]
    fn joint_normalization_keeps_channel_ratios(two_j in 1u32..=10, seed in any::<u64>()) {
        let chans = [0, 1, 2].map(|c| image(two_j, seed.wrapping_add(c), 1.5));
        let rgb = RgbImage::new(chans[0].clone(), chans[1].clone(), chans[2].clone()).unwrap();
        let (out, report) = normalize_rgb_joint(&rgb);
        let st = report.stats[0];
        let scale = 1.0 / (st.upper() - st.lower());
        for (src, dst) in rgb.channels().iter().zip(out.channels()) {
            for (v, w) in src.pixels().iter().zip(dst.pixels()) {
                prop_assert!((w - (v - st.lower()) * scale).abs() < 1e-15);
            }
        }
    }
}
