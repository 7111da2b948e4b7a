//! Detail-only reconstruction: decompose, zero the coarsest approximation,
//! reconstruct.

use serde::{Deserialize, Serialize};

use crate::dwt::{decompose, reconstruct};
use crate::error::{Error, Result};
use crate::image::{Image, Plane};

/// How a raw reconstruction is mapped back into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Renormalize {
    /// Affine map of the image's `[min, max]` onto `[0, 1]`. A flat image
    /// maps to zero.
    #[default]
    Rescale,
    /// Saturate to `[0, 1]`.
    Clamp,
}

impl Renormalize {
    pub fn apply(self, img: &Image) -> Result<Image> {
        let data = img.as_slice();
        let mapped: Vec<f64> = match self {
            Renormalize::Clamp => data.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            Renormalize::Rescale => {
                let (lo, hi) = data
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                let span = hi - lo;
                if span <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
                    vec![0.0; data.len()]
                } else {
                    data.iter()
                        .map(|v| ((v - lo) / span).clamp(0.0, 1.0))
                        .collect()
                }
            }
        };
        Image::new(img.width(), img.height(), img.channels(), mapped)
    }
}

impl std::str::FromStr for Renormalize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rescale" => Ok(Renormalize::Rescale),
            "clamp" => Ok(Renormalize::Clamp),
            other => Err(Error::param(format!(
                "unknown renormalization {other:?} (expected rescale or clamp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaiveConfig {
    pub levels: usize,
    pub renormalize: Renormalize,
}

impl Default for NaiveConfig {
    fn default() -> Self {
        NaiveConfig {
            levels: 2,
            renormalize: Renormalize::Rescale,
        }
    }
}

impl NaiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::param("naive enhancement needs at least 1 level"));
        }
        Ok(())
    }
}

/// Reconstruction without the coarsest approximation, before any output
/// mapping. Values are signed and centred near zero.
pub fn enhance_naive_raw(img: &Image, levels: usize) -> Result<Image> {
    let pyramids = decompose(img, levels)?
        .into_iter()
        .map(|mut p| {
            let (w, h) = p.coarsest_approx.shape();
            p.coarsest_approx = Plane::zeros(w, h);
            p
        })
        .collect::<Vec<_>>();
    reconstruct(&pyramids)
}

pub fn enhance_naive(img: &Image, cfg: &NaiveConfig) -> Result<Image> {
    cfg.validate()?;
    let raw = enhance_naive_raw(img, cfg.levels)?;
    cfg.renormalize.apply(&raw)
}
