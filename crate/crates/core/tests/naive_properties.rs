mod common;

use common::{dilate, random_image, rng, sobel_edge_mask};
use proptest::prelude::*;
use wavedge::dwt::{decompose, max_levels};
use wavedge::naive::{enhance_naive, enhance_naive_raw, NaiveConfig, Renormalize};
use wavedge::Image;

#[test]
fn full_depth_output_has_zero_mean() {
    let mut r = rng(8);
    for (w, h) in [(32, 32), (16, 8), (64, 32)] {
        let img = random_image(&mut r, w, h, 1);
        let raw = enhance_naive_raw(&img, max_levels(w, h)).unwrap();
        assert!(raw.mean().abs() < 1e-9, "{w}x{h}: {}", raw.mean());
    }
}

#[test]
fn enhanced_output_has_no_coarse_content() {
    let mut r = rng(9);
    for levels in 1..=3 {
        let img = random_image(&mut r, 32, 16, 1);
        let raw = enhance_naive_raw(&img, levels).unwrap();
        let pyr = &decompose(&raw, levels).unwrap()[0];
        assert!(pyr
            .coarsest_approx
            .as_slice()
            .iter()
            .all(|v| v.abs() < 1e-9));
    }
}

pub fn stroke_energy_fraction(img: &Image, levels: usize) -> f64 {
    let raw = enhance_naive_raw(img, levels).unwrap();
    let (w, h) = (img.width(), img.height());
    let near = dilate(&sobel_edge_mask(&img.plane(0), 0.1), w, h, 2);
    let total: f64 = raw.as_slice().iter().map(|v| v * v).sum();
    let inside: f64 = raw
        .as_slice()
        .iter()
        .zip(&near)
        .filter(|(_, &m)| m)
        .map(|(v, _)| v * v)
        .sum();
    inside / total
}

#[test]
fn mnist_energy_concentrates_near_strokes() {
    let digit = common::mnist_digit();
    for levels in 1..=3 {
        let frac = stroke_energy_fraction(&digit, levels);
        assert!(frac >= 0.7, "levels {levels}: {frac}");
    }
}

#[test]
fn mapped_outputs_stay_in_range() {
    let digit = common::mnist_digit();
    for renormalize in [Renormalize::Rescale, Renormalize::Clamp] {
        let out = enhance_naive(
            &digit,
            &NaiveConfig {
                levels: 2,
                renormalize,
            },
        )
        .unwrap();
        assert!(out.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(out.shape(), digit.shape());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn raw_enhancement_is_linear(w in 2usize..30, h in 2usize..30, a in -4.0f64..4.0, seed in any::<u64>()) {
        let img = random_image(&mut rng(seed), w, h, 1);
        let levels = max_levels(w, h).min(3);
        let scaled = Image::new(w, h, 1, img.as_slice().iter().map(|v| a * v).collect()).unwrap();
        let lhs = enhance_naive_raw(&scaled, levels).unwrap();
        let rhs = enhance_naive_raw(&img, levels).unwrap();
        for (u, v) in lhs.as_slice().iter().zip(rhs.as_slice()) {
            prop_assert!((u - a * v).abs() <= 1e-10);
        }
    }
}
