//! Image and plane types, 8-bit conversion and Gaussian smoothing.
//!
//! An [`Image`] stores real samples in channel-planar, row-major order with a
//! nominal range of `[0, 1]`. Every pipeline stage works on single planes, so
//! [`Plane`] is the type the transforms actually consume.

use crate::error::{Error, Result};

/// A single real-valued 2D array in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::shape(format!("empty plane {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::shape(format!(
                "plane {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "empty plane {width}x{height}");
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds a plane by evaluating `f(x, y)` at every sample.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "empty plane {width}x{height}");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn transpose(&self) -> Plane {
        Plane::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }
}

/// A real-valued image with one or three channel planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// Creates an image from channel-planar samples.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::shape(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::shape(format!(
                "unsupported channel count {channels} (expected 1 or 3)"
            )));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::shape(format!(
                "image {width}x{height}x{channels} needs {expected} samples, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::format(format!("non-finite sample at index {i}")));
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn from_planes(planes: Vec<Plane>) -> Result<Self> {
        let first = planes
            .first()
            .ok_or_else(|| Error::shape("image needs at least one plane"))?;
        let (width, height) = first.shape();
        if planes.iter().any(|p| p.shape() != (width, height)) {
            return Err(Error::shape("channel planes differ in shape"));
        }
        let channels = planes.len();
        let data = planes.into_iter().flat_map(Plane::into_vec).collect();
        Image::new(width, height, channels, data)
    }

    /// Converts interleaved 8-bit pixels (`RGBRGB...` for colour) to a
    /// channel-planar image with each byte `b` mapped to `b / 255`.
    pub fn from_u8(bytes: &[u8], width: usize, height: usize, channels: usize) -> Result<Self> {
        let expected = width * height * channels;
        if bytes.len() != expected {
            return Err(Error::format(format!(
                "pixel buffer for {width}x{height}x{channels} needs {expected} bytes, got {}",
                bytes.len()
            )));
        }
        let pixels = width * height;
        let mut data = vec![0.0; expected];
        for (i, px) in bytes.chunks_exact(channels.max(1)).enumerate() {
            for (c, &b) in px.iter().enumerate() {
                data[c * pixels + i] = f64::from(b) / 255.0;
            }
        }
        Image::new(width, height, channels, data)
    }

    /// Like [`Image::from_u8`] but for bytes that are already channel-planar.
    pub fn from_planar_u8(
        bytes: &[u8],
        width: usize,
        height: usize,
        channels: usize,
    ) -> Result<Self> {
        let expected = width * height * channels;
        if bytes.len() != expected {
            return Err(Error::format(format!(
                "pixel buffer for {width}x{height}x{channels} needs {expected} bytes, got {}",
                bytes.len()
            )));
        }
        let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Image::new(width, height, channels, data)
    }

    /// Quantizes to interleaved 8-bit pixels: `round(clamp(v, 0, 1) * 255)`
    /// with halves rounded up.
    pub fn to_u8(&self) -> Vec<u8> {
        let pixels = self.width * self.height;
        let mut out = vec![0u8; self.data.len()];
        for c in 0..self.channels {
            for i in 0..pixels {
                out[i * self.channels + c] = quantize(self.data[c * pixels + i]);
            }
        }
        out
    }

    /// Channel-planar variant of [`Image::to_u8`].
    pub fn to_planar_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `(width, height, channels)`
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn plane(&self, channel: usize) -> Plane {
        let n = self.width * self.height;
        Plane {
            width: self.width,
            height: self.height,
            data: self.data[channel * n..(channel + 1) * n].to_vec(),
        }
    }

    pub fn planes(&self) -> Vec<Plane> {
        (0..self.channels).map(|c| self.plane(c)).collect()
    }

    /// Applies `f` to every channel plane independently.
    pub fn map_planes<F>(&self, f: F) -> Result<Image>
    where
        F: Fn(&Plane) -> Result<Plane>,
    {
        let planes = self.planes().iter().map(f).collect::<Result<Vec<_>>>()?;
        Image::from_planes(planes)
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

#[inline]
fn quantize(v: f64) -> u8 {
    // NaN never reaches here: Image rejects non-finite samples.
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Odd-length 1D convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    taps: Vec<f64>,
}

impl Kernel1D {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.len().is_multiple_of(2) {
            return Err(Error::param(format!(
                "kernel length must be odd, got {}",
                taps.len()
            )));
        }
        Ok(Kernel1D { taps })
    }

    /// Sampled Gaussian `exp(-k^2 / (2 sigma^2))` for `|k| <= ceil(3 sigma)`,
    /// renormalized to unit sum.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::param(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        let radius = (3.0 * sigma).ceil() as isize;
        let raw: Vec<f64> = (-radius..=radius)
            .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        Kernel1D::new(raw.into_iter().map(|w| w / total).collect())
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn radius(&self) -> usize {
        self.taps.len() / 2
    }

    pub fn normalization(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Convolves `src` into `dst` with edge replication. `src` and `dst` are
    /// strided views of equal length `n`.
    fn apply_strided(&self, src: &[f64], dst: &mut [f64], n: usize, stride: usize) {
        let r = self.radius() as isize;
        let last = n as isize - 1;
        for i in 0..n {
            let center = src[i * stride];
            // Accumulating differences from the centre keeps constant
            // signals exact regardless of how the taps round.
            let mut acc = 0.0;
            for (t, &w) in self.taps.iter().enumerate() {
                let k = t as isize - r;
                if k == 0 {
                    continue;
                }
                let j = (i as isize + k).clamp(0, last) as usize;
                acc += w * (src[j * stride] - center);
            }
            dst[i * stride] = center + acc;
        }
    }
}

/// Separable convolution of a plane: rows first, then columns.
pub fn convolve_separable(plane: &Plane, kernel: &Kernel1D) -> Plane {
    let (w, h) = plane.shape();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        kernel.apply_strided(plane.row(y), &mut tmp[y * w..(y + 1) * w], w, 1);
    }
    let mut out = vec![0.0; w * h];
    for x in 0..w {
        kernel.apply_strided(&tmp[x..], &mut out[x..], h, w);
    }
    Plane {
        width: w,
        height: h,
        data: out,
    }
}

/// Gaussian smoothing of a single plane.
pub fn smooth_plane(plane: &Plane, sigma: f64) -> Result<Plane> {
    let kernel = Kernel1D::gaussian(sigma)?;
    Ok(convolve_separable(plane, &kernel))
}

/// Gaussian smoothing of every channel of `img` with standard deviation
/// `sigma`, kernel radius `ceil(3 sigma)` and replicated borders.
pub fn gaussian_smooth(img: &Image, sigma: f64) -> Result<Image> {
    let kernel = Kernel1D::gaussian(sigma)?;
    img.map_planes(|p| Ok(convolve_separable(p, &kernel)))
}
