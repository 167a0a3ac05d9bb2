//! RGB rasters, HSV conversion, the 128-bin color quantizer, and the
//! Cartesian color-difference metric.
//!
//! HSV is a cylinder, so hue distances cannot be measured componentwise.
//! Pixels are mapped to Cartesian coordinates (H', S', V') with
//! H' = S*cos(H), S' = S*sin(H), V' = V, and color difference is the
//! Euclidean distance in that space.

use thiserror::Error;

/// Number of quantized color bins (8 hue x 4 saturation x 4 value).
pub const COLOR_BINS: usize = 128;

const HUE_BIN_WIDTH_DEG: f64 = 45.0;

/// Errors from raster construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RasterError {
    /// Both dimensions must be at least 3 so a 3x3 window fits.
    #[error("image too small: {width}x{height}, need at least 3x3")]
    ImageTooSmall { width: usize, height: usize },
    /// Pixel buffer length must equal width * height.
    #[error("pixel count mismatch: expected {expected}, got {actual}")]
    PixelCountMismatch { expected: usize, actual: usize },
}

/// A decoded RGB image, row-major, 8 bits per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RasterImage {
    /// Smallest accepted width/height; a 3x3 neighborhood must fit.
    pub const MIN_DIMENSION: usize = 3;

    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self, RasterError> {
        if width < Self::MIN_DIMENSION || height < Self::MIN_DIMENSION {
            return Err(RasterError::ImageTooSmall { width, height });
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(RasterError::PixelCountMismatch {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image from interleaved RGB bytes (as produced by decoders).
    pub fn from_raw_rgb(width: usize, height: usize, data: &[u8]) -> Result<Self, RasterError> {
        if data.len() != width * height * 3 {
            return Err(RasterError::PixelCountMismatch {
                expected: width * height * 3,
                actual: data.len(),
            });
        }
        let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Self::new(width, height, pixels)
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self, RasterError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }
}

/// Per-pixel HSV planes plus the Cartesian (H', S', V') transform.
///
/// Hue is in degrees `[0, 360)`; saturation and value are in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct HsvPlanes {
    width: usize,
    height: usize,
    pub h: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub h_prime: Vec<f64>,
    pub s_prime: Vec<f64>,
    pub v_prime: Vec<f64>,
}

impl HsvPlanes {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub(crate) fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }
}

/// Hexcone RGB -> HSV for one 8-bit pixel. Achromatic pixels (max = min)
/// get hue 0 and saturation 0.
pub fn hsv_from_rgb8(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let r = f64::from(r) / 255.0;
    let g = f64::from(g) / 255.0;
    let b = f64::from(b) / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;

    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta > 0.0 {
        let sector = if max == r {
            ((g - b) / delta).rem_euclid(6.0)
        } else if max == g {
            (b - r) / delta + 2.0
        } else {
            (r - g) / delta + 4.0
        };
        sector * 60.0
    } else {
        0.0
    };
    (h, s, v)
}

/// Converts a raster to HSV planes and the Cartesian color coordinates.
pub fn rgb_to_hsv(img: &RasterImage) -> HsvPlanes {
    let len = img.width() * img.height();
    let mut planes = HsvPlanes {
        width: img.width(),
        height: img.height(),
        h: Vec::with_capacity(len),
        s: Vec::with_capacity(len),
        v: Vec::with_capacity(len),
        h_prime: Vec::with_capacity(len),
        s_prime: Vec::with_capacity(len),
        v_prime: Vec::with_capacity(len),
    };
    for &[r, g, b] in img.pixels() {
        let (h, s, v) = hsv_from_rgb8(r, g, b);
        let h_rad = h.to_radians();
        // cos and sin are called on opaque copies of the angle so the pair
        // can never be fused into one sincos libcall: fused sincos and
        // separate sin/cos disagree in the last ulp for some angles, and
        // descriptors must reproduce bit for bit across call sites.
        let cos_h = std::hint::black_box(h_rad).cos();
        let sin_h = std::hint::black_box(h_rad).sin();
        planes.h.push(h);
        planes.s.push(s);
        planes.v.push(v);
        planes.h_prime.push(s * cos_h);
        planes.s_prime.push(s * sin_h);
        planes.v_prime.push(v);
    }
    planes
}

/// Quantizes one HSV triple into a bin in {0..127}.
///
/// Hue splits into 8 bins of 45 degrees, saturation and value into 4 bins
/// each; the index is hue-major: `hq*16 + sq*4 + vq`. Saturation or value
/// exactly 1.0 clamps into the top bin.
pub fn quantize_hsv(h: f64, s: f64, v: f64) -> u8 {
    let hq = ((h / HUE_BIN_WIDTH_DEG).floor() as usize).min(7);
    let sq = ((s * 4.0).floor() as usize).min(3);
    let vq = ((v * 4.0).floor() as usize).min(3);
    (hq * 16 + sq * 4 + vq) as u8
}

/// Quantized color map T1: one bin in {0..127} per pixel.
pub fn quantize_color(planes: &HsvPlanes) -> Vec<u8> {
    planes
        .h
        .iter()
        .zip(&planes.s)
        .zip(&planes.v)
        .map(|((&h, &s), &v)| quantize_hsv(h, s, v))
        .collect()
}

/// Euclidean distance between two pixels in (H', S', V') space.
pub fn color_difference(planes: &HsvPlanes, a: (usize, usize), b: (usize, usize)) -> f64 {
    color_difference_idx(planes, planes.index(a.0, a.1), planes.index(b.0, b.1))
}

#[inline]
pub(crate) fn color_difference_idx(planes: &HsvPlanes, i: usize, j: usize) -> f64 {
    let dh = planes.h_prime[i] - planes.h_prime[j];
    let ds = planes.s_prime[i] - planes.s_prime[j];
    let dv = planes.v_prime[i] - planes.v_prime[j];
    (dh * dh + ds * ds + dv * dv).sqrt()
}
