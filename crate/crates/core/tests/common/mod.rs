//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the transform code it checks.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavedge::{Image, Plane};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_plane(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Plane {
    Plane::from_fn(w, h, |_, _| rng.gen::<f64>())
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> Image {
    let data = (0..w * h * c).map(|_| rng.gen::<f64>()).collect();
    Image::new(w, h, c, data).unwrap()
}

/// Dense orthonormal Haar analysis matrix: first `n/2` rows average pairs,
/// last `n/2` rows difference them.
pub fn haar_matrix(n: usize) -> Vec<Vec<f64>> {
    assert!(n.is_multiple_of(2));
    let s = 0.5f64.sqrt();
    let mut m = vec![vec![0.0; n]; n];
    for k in 0..n / 2 {
        m[k][2 * k] = s;
        m[k][2 * k + 1] = s;
        m[n / 2 + k][2 * k] = s;
        m[n / 2 + k][2 * k + 1] = -s;
    }
    m
}

/// `H_h * X * H_w^T` for an even-sized plane, returned as the four
/// quadrants `(LL, LH, HL, HH)` in row-major order. Rows of the result
/// index vertical frequency, columns horizontal frequency.
#[allow(clippy::needless_range_loop)]
pub fn dwt2_matrix_oracle(plane: &Plane) -> [Vec<f64>; 4] {
    let (w, h) = plane.shape();
    let hw = haar_matrix(w);
    let hh = haar_matrix(h);
    // t = X * H_w^T
    let mut t = vec![vec![0.0; w]; h];
    for y in 0..h {
        for j in 0..w {
            t[y][j] = (0..w).map(|x| plane.get(x, y) * hw[j][x]).sum();
        }
    }
    // y = H_h * t
    let mut full = vec![vec![0.0; w]; h];
    for i in 0..h {
        for j in 0..w {
            full[i][j] = (0..h).map(|y| hh[i][y] * t[y][j]).sum();
        }
    }
    let quad = |row0: usize, col0: usize| {
        let mut out = Vec::with_capacity(w * h / 4);
        for row in full.iter().skip(row0).take(h / 2) {
            out.extend_from_slice(&row[col0..col0 + w / 2]);
        }
        out
    };
    [
        quad(0, 0),
        quad(h / 2, 0),
        quad(0, w / 2),
        quad(h / 2, w / 2),
    ]
}

/// Straight transcription of the four-case non-maximal suppression with
/// the bins written out as explicit intervals of the unfolded angle in
/// `(-pi, pi]`. `i` runs along x and `j` along y; the outer frame is never
/// retained.
pub fn nms_oracle(modulus: &Plane, angle: &Plane) -> Vec<bool> {
    let (w, h) = modulus.shape();
    let p8 = PI / 8.0;
    let mut out = vec![false; w * h];
    for j in 1..h - 1 {
        for i in 1..w - 1 {
            let a = angle.get(i, j);
            let m = |x: usize, y: usize| modulus.get(x, y);
            let c = m(i, j);
            let keep = if (-p8..=p8).contains(&a) || a >= 7.0 * p8 || a <= -7.0 * p8 {
                c > m(i + 1, j) && c > m(i - 1, j)
            } else if (3.0 * p8..=5.0 * p8).contains(&a) || (-5.0 * p8..=-3.0 * p8).contains(&a) {
                c > m(i, j + 1) && c > m(i, j - 1)
            } else if (p8 < a && a < 3.0 * p8) || (-7.0 * p8 < a && a < -5.0 * p8) {
                c > m(i + 1, j + 1) && c > m(i - 1, j - 1)
            } else {
                c > m(i + 1, j - 1) && c > m(i - 1, j + 1)
            };
            out[j * w + i] = keep;
        }
    }
    out
}

/// 3x3 Sobel magnitude with replicated borders.
pub fn sobel_magnitude(plane: &Plane) -> Plane {
    let (w, h) = plane.shape();
    let at = |x: isize, y: isize| {
        plane.get(
            x.clamp(0, w as isize - 1) as usize,
            y.clamp(0, h as isize - 1) as usize,
        )
    };
    Plane::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let gx = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
            - at(x - 1, y - 1)
            - 2.0 * at(x - 1, y)
            - at(x - 1, y + 1);
        let gy = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
            - at(x - 1, y - 1)
            - 2.0 * at(x, y - 1)
            - at(x + 1, y - 1);
        (gx * gx + gy * gy).sqrt()
    })
}

/// Pixels whose Sobel magnitude exceeds `rel` times the maximum.
pub fn sobel_edge_mask(plane: &Plane, rel: f64) -> Vec<bool> {
    let mag = sobel_magnitude(plane);
    let (_, hi) = mag.min_max();
    mag.as_slice().iter().map(|&v| v > rel * hi).collect()
}

/// Chebyshev dilation by `r` pixels.
pub fn dilate(mask: &[bool], w: usize, h: usize, r: usize) -> Vec<bool> {
    let r = r as isize;
    let mut out = vec![false; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            out[(y as usize) * w + x as usize] = (-r..=r).any(|dy| {
                (-r..=r).any(|dx| {
                    let (nx, ny) = (x + dx, y + dy);
                    nx >= 0
                        && ny >= 0
                        && nx < w as isize
                        && ny < h as isize
                        && mask[ny as usize * w + nx as usize]
                })
            });
        }
    }
    out
}

/// Directly evaluated, renormalized Gaussian taps for offsets `-r..=r`.
pub fn gaussian_taps(sigma: f64, r: isize) -> Vec<f64> {
    let raw: Vec<f64> = (-r..=r)
        .map(|k| (-(k as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

/// Plain sliding-window 1D convolution with index clamping.
pub fn convolve_1d_clamped(signal: &[f64], taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let n = signal.len() as isize;
    (0..n)
        .map(|i| {
            taps.iter()
                .enumerate()
                .map(|(t, w)| w * signal[(i + t as isize - r).clamp(0, n - 1) as usize])
                .sum()
        })
        .collect()
}

pub const SQUARE_SIDE: usize = 32;
pub const SQUARE_LO: usize = 7;
pub const SQUARE_HI: usize = 23;

/// 32x32 black image with a white 16x16 square covering `[7, 23)` on both
/// axes. Both square edges fall inside a Haar pair.
pub fn white_square() -> Image {
    let p = Plane::from_fn(SQUARE_SIDE, SQUARE_SIDE, |x, y| {
        let inside = |v: usize| (SQUARE_LO..SQUARE_HI).contains(&v);
        if inside(x) && inside(y) {
            1.0
        } else {
            0.0
        }
    });
    Image::from_planes(vec![p]).unwrap()
}

/// Boundary of the square in first-level subband coordinates.
pub fn square_boundary_subband() -> Vec<(usize, usize)> {
    let (lo, hi) = (SQUARE_LO / 2, (SQUARE_HI - 1) / 2);
    let mut out = Vec::new();
    for t in lo..=hi {
        out.extend([(lo, t), (hi, t), (t, lo), (t, hi)]);
    }
    out.sort();
    out.dedup();
    out
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn mnist_digit() -> Image {
    wavedge::dataset::pnm::read_pnm(&fixture_dir().join("mnist_train_00000_label5.pgm")).unwrap()
}
