//! Modulus-maxima edge enhancement.
//!
//! The pipeline per channel plane is: Gaussian smoothing, one Haar level,
//! gradient modulus and angle from the two directional detail bands,
//! non-maximal suppression along the quantized gradient direction,
//! thresholding, and reconstruction from the retained detail coefficients
//! together with the untouched approximation band.
//!
//! The horizontal derivative `W^x` is the `vert` (HL) band and the vertical
//! derivative `W^y` the `horiz` (LH) band; see [`crate::dwt`].

use std::f64::consts::{FRAC_PI_8, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dwt::{dwt2_level, idwt2_level, CoeffQuad};
use crate::error::{Error, Result};
use crate::image::{smooth_plane, Image, Plane};
use crate::naive::Renormalize;

/// Per-sample gradient modulus and four-quadrant angle.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub modulus: Plane,
    /// Radians in `(-pi, pi]`; zero where the modulus is zero.
    pub angle: Plane,
}

impl GradientField {
    /// Builds the field from the x and y derivative arrays.
    pub fn from_components(wx: &Plane, wy: &Plane) -> Result<Self> {
        if wx.shape() != wy.shape() {
            return Err(Error::shape(format!(
                "gradient components differ in shape: {:?} vs {:?}",
                wx.shape(),
                wy.shape()
            )));
        }
        let (w, h) = wx.shape();
        let mut modulus = Vec::with_capacity(w * h);
        let mut angle = Vec::with_capacity(w * h);
        for (&gx, &gy) in wx.as_slice().iter().zip(wy.as_slice()) {
            modulus.push((gx * gx + gy * gy).sqrt());
            // atan2(+-0, +-0) can return +-pi; pin the degenerate case to 0.
            angle.push(if gx == 0.0 && gy == 0.0 {
                0.0
            } else {
                let a = gy.atan2(gx);
                if a == -PI {
                    PI
                } else {
                    a
                }
            });
        }
        Ok(GradientField {
            modulus: Plane::new(w, h, modulus)?,
            angle: Plane::new(w, h, angle)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.modulus.shape()
    }
}

/// Gradient of one decomposition level.
pub fn gradient_field(quad: &CoeffQuad) -> GradientField {
    GradientField::from_components(&quad.vert, &quad.horiz)
        .expect("subbands of one level share a shape")
}

/// Gradient direction quantized to one of four neighbour axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Gradient along x: compare with left and right neighbours.
    Horizontal,
    /// Gradient along y: compare with the neighbours above and below.
    Vertical,
    /// Gradient along (1, 1).
    Diagonal,
    /// Gradient along (1, -1).
    AntiDiagonal,
}

impl Direction {
    /// Folds `angle` modulo pi and assigns it to the nearest of 0, pi/4,
    /// pi/2 and 3pi/4. Ties on a bin edge go to the horizontal bin first,
    /// then the vertical one.
    pub fn quantize(angle: f64) -> Direction {
        let t = if angle < 0.0 { angle + PI } else { angle };
        if t <= FRAC_PI_8 || t >= 7.0 * FRAC_PI_8 {
            Direction::Horizontal
        } else if (3.0 * FRAC_PI_8..=5.0 * FRAC_PI_8).contains(&t) {
            Direction::Vertical
        } else if t < 3.0 * FRAC_PI_8 {
            Direction::Diagonal
        } else {
            Direction::AntiDiagonal
        }
    }

    /// `(dx, dy)` of the forward comparison neighbour; the other one is
    /// its mirror.
    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::Horizontal => (1, 0),
            Direction::Vertical => (0, 1),
            Direction::Diagonal => (1, 1),
            Direction::AntiDiagonal => (1, -1),
        }
    }
}

/// Retained local maxima of the gradient modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    values: Plane,
    mask: Vec<bool>,
}

impl EdgeMap {
    fn from_values(values: Plane) -> Self {
        let mask = values.as_slice().iter().map(|&v| v > 0.0).collect();
        EdgeMap { values, mask }
    }

    pub fn values(&self) -> &Plane {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    #[inline]
    pub fn is_edge(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.values.width() + x]
    }

    /// Number of retained samples.
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Mask as a 0/1 plane, handy for dumps.
    pub fn mask_plane(&self) -> Plane {
        self.values.map(|v| if v > 0.0 { 1.0 } else { 0.0 })
    }
}

/// Non-maximal suppression: keeps a sample only if its modulus strictly
/// exceeds both neighbours along its quantized gradient direction. Samples
/// on the outer frame are never kept.
pub fn nms(field: &GradientField) -> EdgeMap {
    let (w, h) = field.shape();
    let m = &field.modulus;
    let mut out = Plane::zeros(w, h);
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let v = m.get(x, y);
            let (dx, dy) = Direction::quantize(field.angle.get(x, y)).offset();
            let fwd = m.get((x as isize + dx) as usize, (y as isize + dy) as usize);
            let back = m.get((x as isize - dx) as usize, (y as isize - dy) as usize);
            if v > fwd && v > back {
                out.set(x, y, v);
            }
        }
    }
    EdgeMap::from_values(out)
}

/// Rule for discarding weak maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum ThresholdPolicy {
    /// Drop values below `t`.
    Fixed(f64),
    /// Drop values below the `q`-quantile of the retained (nonzero) values.
    /// The quantile is the sorted value at index `floor(q * (n - 1))`.
    Quantile(f64),
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::Quantile(0.75)
    }
}

impl ThresholdPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdPolicy::Fixed(t) if !(t >= 0.0 && t.is_finite()) => Err(Error::param(
                format!("fixed threshold must be finite and >= 0, got {t}"),
            )),
            ThresholdPolicy::Quantile(q) if !(0.0..1.0).contains(&q) => Err(Error::param(format!(
                "threshold quantile must lie in [0, 1), got {q}"
            ))),
            _ => Ok(()),
        }
    }
}

impl FromStr for ThresholdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s.split_once(':').ok_or_else(|| {
            Error::param(format!(
                "threshold {s:?} must look like fixed:T or quantile:Q"
            ))
        })?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("threshold value {value:?} is not a number")))?;
        let policy = match kind.trim() {
            "fixed" => ThresholdPolicy::Fixed(value),
            "quantile" => ThresholdPolicy::Quantile(value),
            other => {
                return Err(Error::param(format!(
                    "unknown threshold kind {other:?} (expected fixed or quantile)"
                )))
            }
        };
        policy.validate()?;
        Ok(policy)
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdPolicy::Fixed(t) => write!(f, "fixed:{t}"),
            ThresholdPolicy::Quantile(q) => write!(f, "quantile:{q}"),
        }
    }
}

pub fn threshold(edges: &EdgeMap, policy: ThresholdPolicy) -> Result<EdgeMap> {
    policy.validate()?;
    let cut = match policy {
        ThresholdPolicy::Fixed(t) => t,
        ThresholdPolicy::Quantile(q) => {
            let mut kept: Vec<f64> = edges
                .values
                .as_slice()
                .iter()
                .copied()
                .filter(|&v| v > 0.0)
                .collect();
            if kept.is_empty() {
                return Ok(edges.clone());
            }
            kept.sort_by(f64::total_cmp);
            kept[(q * (kept.len() - 1) as f64).floor() as usize]
        }
    };
    Ok(EdgeMap::from_values(edges.values.map(|v| {
        if v < cut {
            0.0
        } else {
            v
        }
    })))
}

/// How the edge map is written back into the detail subbands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EdgeInjection {
    /// Keep the original H, V and D coefficients on edge samples, zero
    /// elsewhere.
    #[default]
    MaskDetails,
    /// Rebuild the x/y bands from the edge magnitude and angle on edge
    /// samples (`vert = LM cos A`, `horiz = LM sin A`); diagonal zeroed.
    SplitByAngle,
}

impl FromStr for EdgeInjection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mask" | "mask_details" => Ok(EdgeInjection::MaskDetails),
            "angle" | "split_by_angle" => Ok(EdgeInjection::SplitByAngle),
            other => Err(Error::param(format!(
                "unknown edge injection {other:?} (expected mask or angle)"
            ))),
        }
    }
}

impl fmt::Display for EdgeInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeInjection::MaskDetails => "mask",
            EdgeInjection::SplitByAngle => "angle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmConfig {
    pub sigma: f64,
    pub threshold: ThresholdPolicy,
    pub injection: EdgeInjection,
    /// Mapping of the reconstruction into `[0, 1]`.
    pub renormalize: Renormalize,
}

impl Default for MmConfig {
    fn default() -> Self {
        MmConfig {
            sigma: 1.0,
            threshold: ThresholdPolicy::default(),
            injection: EdgeInjection::default(),
            renormalize: Renormalize::Clamp,
        }
    }
}

impl MmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        self.threshold.validate()
    }
}

/// Write the thresholded edge map into a copy of `quad`'s detail bands.
pub fn inject_edges(
    quad: &CoeffQuad,
    field: &GradientField,
    edges: &EdgeMap,
    injection: EdgeInjection,
) -> CoeffQuad {
    let (w, h) = quad.shape();
    let mut horiz = Plane::zeros(w, h);
    let mut vert = Plane::zeros(w, h);
    let mut diag = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            if !edges.is_edge(x, y) {
                continue;
            }
            match injection {
                EdgeInjection::MaskDetails => {
                    horiz.set(x, y, quad.horiz.get(x, y));
                    vert.set(x, y, quad.vert.get(x, y));
                    diag.set(x, y, quad.diag.get(x, y));
                }
                EdgeInjection::SplitByAngle => {
                    let lm = edges.values().get(x, y);
                    let a = field.angle.get(x, y);
                    vert.set(x, y, lm * a.cos());
                    horiz.set(x, y, lm * a.sin());
                }
            }
        }
    }
    CoeffQuad {
        approx: quad.approx.clone(),
        horiz,
        vert,
        diag,
    }
}

/// Intermediate results for one channel plane, in pipeline order.
#[derive(Debug, Clone)]
pub struct PlaneStages {
    pub smoothed: Plane,
    /// Horizontal derivative band (HL).
    pub wx: Plane,
    /// Vertical derivative band (LH).
    pub wy: Plane,
    pub field: GradientField,
    pub maxima: EdgeMap,
    pub edges: EdgeMap,
    /// Reconstruction before output mapping.
    pub raw: Plane,
}

/// Runs the pipeline on a single plane, keeping every stage.
pub fn enhance_plane(plane: &Plane, cfg: &MmConfig) -> Result<PlaneStages> {
    cfg.validate()?;
    let smoothed = smooth_plane(plane, cfg.sigma)?;
    let quad = dwt2_level(&smoothed)?;
    let field = gradient_field(&quad);
    let maxima = nms(&field);
    let edges = threshold(&maxima, cfg.threshold)?;
    let rebuilt = inject_edges(&quad, &field, &edges, cfg.injection);
    let raw = idwt2_level(&rebuilt, smoothed.shape())?;
    Ok(PlaneStages {
        smoothed,
        wx: quad.vert,
        wy: quad.horiz,
        field,
        maxima,
        edges,
        raw,
    })
}

/// Full trace of [`enhance_mm`]: per-channel stages plus the mapped output.
#[derive(Debug, Clone)]
pub struct MmTrace {
    pub channels: Vec<PlaneStages>,
    pub output: Image,
}

pub fn enhance_mm_traced(img: &Image, cfg: &MmConfig) -> Result<MmTrace> {
    cfg.validate()?;
    if img.width() < 2 || img.height() < 2 {
        return Err(Error::shape(format!(
            "modulus-maxima enhancement needs at least 2x2 pixels, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let channels = img
        .planes()
        .iter()
        .map(|p| enhance_plane(p, cfg))
        .collect::<Result<Vec<_>>>()?;
    let raw = Image::from_planes(channels.iter().map(|s| s.raw.clone()).collect())?;
    let output = cfg.renormalize.apply(&raw)?;
    Ok(MmTrace { channels, output })
}

pub fn enhance_mm(img: &Image, cfg: &MmConfig) -> Result<Image> {
    Ok(enhance_mm_traced(img, cfg)?.output)
}
