//! Orthonormal Haar wavelet transform in one and two dimensions.
//!
//! One analysis step maps each pair `(a, b)` to `((a + b) / sqrt2, (a - b) / sqrt2)`.
//! The 2D level transforms every row first and then the columns of both
//! halves. Subband naming follows the filter order (rows, columns):
//!
//! | field   | name | rows      | columns   | responds to       |
//! |---------|------|-----------|-----------|-------------------|
//! | `approx`| LL   | low-pass  | low-pass  | local mean        |
//! | `horiz` | LH   | low-pass  | high-pass | horizontal edges  |
//! | `vert`  | HL   | high-pass | low-pass  | vertical edges    |
//! | `diag`  | HH   | high-pass | high-pass | diagonal detail   |
//!
//! so `vert` carries the derivative along x and `horiz` the derivative along y.
//!
//! A dimension of odd length is padded with one copy of its last sample
//! before transforming; the inverse strips it again, so reconstruction is
//! exact for every shape.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::image::{Image, Plane};

/// Single-level Haar analysis of an even-length signal.
///
/// # Panics
///
/// If `signal` is empty or has odd length.
pub fn haar_fwd_1d(signal: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert!(
        !signal.is_empty() && signal.len().is_multiple_of(2),
        "haar_fwd_1d needs a non-empty even-length signal, got length {}",
        signal.len()
    );
    let half = signal.len() / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    fwd_pairs(signal, 1, &mut approx, &mut detail);
    (approx, detail)
}

/// Single-level Haar synthesis; exact inverse of [`haar_fwd_1d`].
///
/// # Panics
///
/// If `approx` and `detail` differ in length.
pub fn haar_inv_1d(approx: &[f64], detail: &[f64]) -> Vec<f64> {
    assert_eq!(
        approx.len(),
        detail.len(),
        "haar_inv_1d needs equal-length approximation and detail"
    );
    let mut out = vec![0.0; approx.len() * 2];
    for (k, (&a, &d)) in approx.iter().zip(detail).enumerate() {
        out[2 * k] = (a + d) * FRAC_1_SQRT_2;
        out[2 * k + 1] = (a - d) * FRAC_1_SQRT_2;
    }
    out
}

#[inline]
fn fwd_pairs(src: &[f64], stride: usize, approx: &mut [f64], detail: &mut [f64]) {
    for k in 0..approx.len() {
        let a = src[2 * k * stride];
        let b = src[(2 * k + 1) * stride];
        approx[k] = (a + b) * FRAC_1_SQRT_2;
        detail[k] = (a - b) * FRAC_1_SQRT_2;
    }
}

/// Length after one level: odd lengths gain one padding sample first.
#[inline]
pub fn half_len(n: usize) -> usize {
    n.div_ceil(2)
}

/// The four subbands of one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffQuad {
    /// LL
    pub approx: Plane,
    /// LH: low-pass rows, high-pass columns.
    pub horiz: Plane,
    /// HL: high-pass rows, low-pass columns.
    pub vert: Plane,
    /// HH
    pub diag: Plane,
}

impl CoeffQuad {
    /// Shared `(width, height)` of the subbands.
    pub fn shape(&self) -> (usize, usize) {
        self.approx.shape()
    }

    fn check(&self) -> Result<()> {
        let s = self.approx.shape();
        if self.horiz.shape() != s || self.vert.shape() != s || self.diag.shape() != s {
            return Err(Error::shape("subbands of one level differ in shape"));
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.approx.energy() + self.horiz.energy() + self.vert.energy() + self.diag.energy()
    }
}

/// Subband label used in dumps and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subband {
    LL,
    LH,
    HL,
    HH,
}

impl Subband {
    pub fn name(self) -> &'static str {
        match self {
            Subband::LL => "ll",
            Subband::LH => "lh",
            Subband::HL => "hl",
            Subband::HH => "hh",
        }
    }
}

impl fmt::Display for Subband {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One level of the separable 2D transform, rows first.
pub fn dwt2_level(plane: &Plane) -> Result<CoeffQuad> {
    let (w, h) = plane.shape();
    if w < 2 || h < 2 {
        return Err(Error::shape(format!(
            "2D transform needs at least 2x2 samples, got {w}x{h}"
        )));
    }
    let (pw, ph) = (w + w % 2, h + h % 2);
    let (hw, hh) = (pw / 2, ph / 2);

    // Row pass: each padded row splits into low (L) and high (H) halves.
    let mut low = vec![0.0; hw * ph];
    let mut high = vec![0.0; hw * ph];
    let mut row = vec![0.0; pw];
    for y in 0..ph {
        let src = plane.row(y.min(h - 1));
        row[..w].copy_from_slice(src);
        if pw > w {
            row[w] = src[w - 1];
        }
        fwd_pairs(
            &row,
            1,
            &mut low[y * hw..(y + 1) * hw],
            &mut high[y * hw..(y + 1) * hw],
        );
    }

    // Column pass on both halves.
    let column_pass = |half: &[f64]| {
        let mut lo = vec![0.0; hw * hh];
        let mut hi = vec![0.0; hw * hh];
        let mut col = vec![0.0; ph];
        let mut a = vec![0.0; hh];
        let mut d = vec![0.0; hh];
        for x in 0..hw {
            for (y, c) in col.iter_mut().enumerate() {
                *c = half[y * hw + x];
            }
            fwd_pairs(&col, 1, &mut a, &mut d);
            for k in 0..hh {
                lo[k * hw + x] = a[k];
                hi[k * hw + x] = d[k];
            }
        }
        (lo, hi)
    };
    let (ll, lh) = column_pass(&low);
    let (hl, hhb) = column_pass(&high);

    Ok(CoeffQuad {
        approx: Plane::new(hw, hh, ll)?,
        horiz: Plane::new(hw, hh, lh)?,
        vert: Plane::new(hw, hh, hl)?,
        diag: Plane::new(hw, hh, hhb)?,
    })
}

/// Inverse of [`dwt2_level`]; `target_shape` is the `(width, height)` of the
/// plane that was transformed, and any padding sample is dropped.
pub fn idwt2_level(quad: &CoeffQuad, target_shape: (usize, usize)) -> Result<Plane> {
    quad.check()?;
    let (w, h) = target_shape;
    let (hw, hh) = quad.shape();
    if w < 2 || h < 2 || half_len(w) != hw || half_len(h) != hh {
        return Err(Error::shape(format!(
            "subbands of {hw}x{hh} cannot reconstruct a {w}x{h} plane"
        )));
    }
    let (pw, ph) = (2 * hw, 2 * hh);

    let column_pass = |lo: &Plane, hi: &Plane| {
        let mut out = vec![0.0; hw * ph];
        for x in 0..hw {
            for k in 0..hh {
                let a = lo.get(x, k);
                let d = hi.get(x, k);
                out[2 * k * hw + x] = (a + d) * FRAC_1_SQRT_2;
                out[(2 * k + 1) * hw + x] = (a - d) * FRAC_1_SQRT_2;
            }
        }
        out
    };
    let low = column_pass(&quad.approx, &quad.horiz);
    let high = column_pass(&quad.vert, &quad.diag);

    let mut data = Vec::with_capacity(w * h);
    let mut row = vec![0.0; pw];
    for y in 0..h {
        let lo = &low[y * hw..(y + 1) * hw];
        let hi = &high[y * hw..(y + 1) * hw];
        for k in 0..hw {
            row[2 * k] = (lo[k] + hi[k]) * FRAC_1_SQRT_2;
            row[2 * k + 1] = (lo[k] - hi[k]) * FRAC_1_SQRT_2;
        }
        data.extend_from_slice(&row[..w]);
    }
    Plane::new(w, h, data)
}

/// Detail subbands of one pyramid level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailBands {
    pub horiz: Plane,
    pub vert: Plane,
    pub diag: Plane,
}

impl DetailBands {
    pub fn shape(&self) -> (usize, usize) {
        self.horiz.shape()
    }

    pub fn energy(&self) -> f64 {
        self.horiz.energy() + self.vert.energy() + self.diag.energy()
    }

    fn map(&self, f: impl Fn(&Plane) -> Plane) -> DetailBands {
        DetailBands {
            horiz: f(&self.horiz),
            vert: f(&self.vert),
            diag: f(&self.diag),
        }
    }
}

/// Multilevel decomposition of one plane: detail bands finest first, plus
/// the coarsest approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPyramid {
    pub levels: Vec<DetailBands>,
    pub coarsest_approx: Plane,
    /// `(width, height)` of the decomposed plane.
    pub original_shape: (usize, usize),
}

impl CoeffPyramid {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Input shape seen by each level, finest first.
    pub fn level_input_shapes(&self) -> Vec<(usize, usize)> {
        level_input_shapes(self.original_shape, self.levels.len())
    }

    /// Sum of squares over every stored coefficient.
    pub fn energy(&self) -> f64 {
        self.levels.iter().map(DetailBands::energy).sum::<f64>() + self.coarsest_approx.energy()
    }

    /// Applies `f` to every subband, keeping the structure.
    pub fn map(&self, f: impl Fn(&Plane) -> Plane) -> CoeffPyramid {
        CoeffPyramid {
            levels: self.levels.iter().map(|l| l.map(&f)).collect(),
            coarsest_approx: f(&self.coarsest_approx),
            original_shape: self.original_shape,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::shape("pyramid has no levels"));
        }
        let shapes = self.level_input_shapes();
        for (i, (level, &(w, h))) in self.levels.iter().zip(&shapes).enumerate() {
            let want = (half_len(w), half_len(h));
            for band in [&level.horiz, &level.vert, &level.diag] {
                if band.shape() != want {
                    return Err(Error::shape(format!(
                        "level {} subband is {:?}, expected {want:?}",
                        i + 1,
                        band.shape()
                    )));
                }
            }
        }
        let (w, h) = shapes[shapes.len() - 1];
        if self.coarsest_approx.shape() != (half_len(w), half_len(h)) {
            return Err(Error::shape(format!(
                "coarsest approximation is {:?}, expected {:?}",
                self.coarsest_approx.shape(),
                (half_len(w), half_len(h))
            )));
        }
        Ok(())
    }
}

fn level_input_shapes(shape: (usize, usize), levels: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(levels);
    let (mut w, mut h) = shape;
    for _ in 0..levels {
        out.push((w, h));
        w = half_len(w);
        h = half_len(h);
    }
    out
}

/// Deepest decomposition a `width x height` plane admits: every level's
/// input must be at least 2x2.
pub fn max_levels(width: usize, height: usize) -> usize {
    let (mut w, mut h) = (width, height);
    let mut levels = 0;
    while w >= 2 && h >= 2 {
        w = half_len(w);
        h = half_len(h);
        levels += 1;
    }
    levels
}

fn check_levels(width: usize, height: usize, levels: usize) -> Result<()> {
    let max = max_levels(width, height);
    if levels == 0 {
        return Err(Error::param("decomposition levels must be at least 1"));
    }
    if levels > max {
        return Err(Error::param(format!(
            "{levels} decomposition levels requested for a {width}x{height} image; \
             max feasible levels is {max}"
        )));
    }
    Ok(())
}

/// `levels`-deep decomposition of one plane; each level transforms the
/// previous level's approximation.
pub fn decompose_plane(plane: &Plane, levels: usize) -> Result<CoeffPyramid> {
    check_levels(plane.width(), plane.height(), levels)?;
    let mut details = Vec::with_capacity(levels);
    let mut current = plane.clone();
    for _ in 0..levels {
        let quad = dwt2_level(&current)?;
        details.push(DetailBands {
            horiz: quad.horiz,
            vert: quad.vert,
            diag: quad.diag,
        });
        current = quad.approx;
    }
    Ok(CoeffPyramid {
        levels: details,
        coarsest_approx: current,
        original_shape: plane.shape(),
    })
}

/// Inverse of [`decompose_plane`], coarsest level first. No clamping.
pub fn reconstruct_plane(pyr: &CoeffPyramid) -> Result<Plane> {
    pyr.validate()?;
    let shapes = pyr.level_input_shapes();
    let mut approx = pyr.coarsest_approx.clone();
    for (level, &shape) in pyr.levels.iter().zip(&shapes).rev() {
        let quad = CoeffQuad {
            approx,
            horiz: level.horiz.clone(),
            vert: level.vert.clone(),
            diag: level.diag.clone(),
        };
        approx = idwt2_level(&quad, shape)?;
    }
    Ok(approx)
}

/// Decomposes every channel of `img`; one pyramid per channel.
pub fn decompose(img: &Image, levels: usize) -> Result<Vec<CoeffPyramid>> {
    check_levels(img.width(), img.height(), levels)?;
    img.planes()
        .iter()
        .map(|p| decompose_plane(p, levels))
        .collect()
}

/// Rebuilds an image from per-channel pyramids.
pub fn reconstruct(pyramids: &[CoeffPyramid]) -> Result<Image> {
    let planes = pyramids
        .iter()
        .map(reconstruct_plane)
        .collect::<Result<Vec<_>>>()?;
    Image::from_planes(planes)
}
