//! Multi-channel color gradient orientation and its 12-bin quantization.
//!
//! The gradient is computed directly on the RGB channels through the
//! 2x2 structure tensor gxx = rx^2+gx^2+bx^2, gyy = ry^2+gy^2+by^2,
//! gxy = rx*ry+gx*gy+bx*by, whose dominant direction is
//! theta = 1/2 * atan2(2*gxy, gxx-gyy), defined modulo 180 degrees.

use crate::colorspace::RasterImage;

/// Number of orientation bins over [0, 180).
pub const ORIENTATION_BINS: usize = 12;

/// Width of one orientation bin in degrees.
pub const ORIENTATION_BIN_WIDTH_DEG: f64 = 15.0;

/// Gradient magnitudes at or below this (on `[0,1]`-normalized channels) are
/// treated as degenerate: no meaningful orientation, bin 0.
pub const GRADIENT_EPSILON: f64 = 1e-6;

// Orientations this close to a bin boundary are snapped onto it so that
// analytically exact angles (0, 45, 90, ...) quantize stably despite the
// last-ulp noise of atan2/degree conversion.
const BOUNDARY_SNAP_DEG: f64 = 1e-9;

/// Per-pixel gradient orientation map.
///
/// `theta` is in degrees [0, 180); `t2` is the quantized bin, with
/// degenerate-gradient pixels (magnitude <= epsilon) assigned bin 0.
#[derive(Debug, Clone)]
pub struct OrientationMap {
    width: usize,
    height: usize,
    pub theta: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub t2: Vec<u8>,
}

impl OrientationMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

/// Quantizes an orientation in [0, 180) into one of 12 bins of 15 degrees.
/// Pixels with degenerate magnitude land in bin 0.
pub fn quantize_orientation(theta_deg: f64, magnitude: f64) -> u8 {
    if magnitude <= GRADIENT_EPSILON {
        return 0;
    }
    debug_assert!((0.0..180.0).contains(&theta_deg), "theta {theta_deg}");
    ((theta_deg / ORIENTATION_BIN_WIDTH_DEG).floor() as usize).min(ORIENTATION_BINS - 1) as u8
}

fn snap_to_boundary(theta_deg: f64) -> f64 {
    let k = (theta_deg / ORIENTATION_BIN_WIDTH_DEG).round();
    let snapped = k * ORIENTATION_BIN_WIDTH_DEG;
    if (theta_deg - snapped).abs() < BOUNDARY_SNAP_DEG {
        snapped
    } else {
        theta_deg
    }
}

/// Orientation angle and magnitude for one interior pixel given the six
/// channel partials. Exposed within the crate so reference implementations
/// in test code can mirror the exact arithmetic.
#[inline]
pub(crate) fn tensor_orientation(
    rx: f64,
    ry: f64,
    gx: f64,
    gy: f64,
    bx: f64,
    by: f64,
) -> (f64, f64) {
    let gxx = rx * rx + gx * gx + bx * bx;
    let gyy = ry * ry + gy * gy + by * by;
    let gxy = rx * ry + gx * gy + bx * by;

    // psi = 2*theta; folding theta by +180 leaves cos/sin(2*theta) unchanged.
    let psi = (2.0 * gxy).atan2(gxx - gyy);
    let mut theta = 0.5 * psi;
    if theta < 0.0 {
        theta += std::f64::consts::PI;
    }
    let mut deg = snap_to_boundary(theta.to_degrees());
    if deg >= 180.0 {
        deg -= 180.0;
    }

    // Opaque copies keep cos and sin from fusing into sincos; see
    // colorspace::rgb_to_hsv for the reproducibility constraint.
    let cos_psi = std::hint::black_box(psi).cos();
    let sin_psi = std::hint::black_box(psi).sin();
    let mag_sq = 0.5 * ((gxx + gyy) + (gxx - gyy) * cos_psi + 2.0 * gxy * sin_psi);
    (deg, mag_sq.max(0.0).sqrt())
}

/// Computes the color gradient orientation map.
///
/// Channels are normalized to `[0,1]` and differentiated with central
/// differences on interior pixels; border pixels replicate the values of
/// their nearest interior neighbor.
pub fn dizenzo_orientation(img: &RasterImage) -> OrientationMap {
    let w = img.width();
    let h = img.height();
    let len = w * h;

    let mut rn = Vec::with_capacity(len);
    let mut gn = Vec::with_capacity(len);
    let mut bn = Vec::with_capacity(len);
    for &[r, g, b] in img.pixels() {
        rn.push(f64::from(r) / 255.0);
        gn.push(f64::from(g) / 255.0);
        bn.push(f64::from(b) / 255.0);
    }

    let mut theta = vec![0.0; len];
    let mut magnitude = vec![0.0; len];
    let mut t2 = vec![0u8; len];

    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let rx = (rn[i + 1] - rn[i - 1]) * 0.5;
            let gx = (gn[i + 1] - gn[i - 1]) * 0.5;
            let bx = (bn[i + 1] - bn[i - 1]) * 0.5;
            let ry = (rn[i + w] - rn[i - w]) * 0.5;
            let gy = (gn[i + w] - gn[i - w]) * 0.5;
            let by = (bn[i + w] - bn[i - w]) * 0.5;

            let (deg, mag) = tensor_orientation(rx, ry, gx, gy, bx, by);
            theta[i] = deg;
            magnitude[i] = mag;
            t2[i] = quantize_orientation(deg, mag);
        }
    }

    // Border replication from the nearest interior pixel.
    for y in 0..h {
        for x in 0..w {
            if y > 0 && y < h - 1 && x > 0 && x < w - 1 {
                continue;
            }
            let sx = x.clamp(1, w - 2);
            let sy = y.clamp(1, h - 2);
            let src = sy * w + sx;
            let dst = y * w + x;
            theta[dst] = theta[src];
            magnitude[dst] = magnitude[src];
            t2[dst] = t2[src];
        }
    }

    OrientationMap {
        width: w,
        height: h,
        theta,
        magnitude,
        t2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rotate90(img: &RasterImage) -> RasterImage {
        // (x, y) -> (y, w-1-x): maps a vertical edge onto a horizontal one.
        let (w, h) = (img.width(), img.height());
        RasterImage::from_fn(h, w, |x, y| img.pixel(w - 1 - y, x)).unwrap()
    }

    #[test]
    fn solid_image_has_no_gradient() {
        let img = RasterImage::from_fn(9, 7, |_, _| [40, 90, 200]).unwrap();
        let map = dizenzo_orientation(&img);
        assert!(map.magnitude.iter().all(|&m| m == 0.0));
        assert!(map.t2.iter().all(|&b| b == 0));
    }

    #[test]
    fn vertical_step_edge_is_bin_zero_and_rotates_to_bin_six() {
        let img = RasterImage::from_fn(10, 8, |x, _| {
            if x < 5 {
                [0, 0, 0]
            } else {
                [255, 255, 255]
            }
        })
        .unwrap();
        let map = dizenzo_orientation(&img);
        for y in 1..7 {
            for &x in &[4usize, 5] {
                let i = y * 10 + x;
                assert!(map.magnitude[i] > GRADIENT_EPSILON);
                assert_eq!(map.theta[i], 0.0);
                assert_eq!(map.t2[i], 0);
            }
        }

        let rotated = dizenzo_orientation(&rotate90(&img));
        for x in 1..7 {
            for &y in &[4usize, 5] {
                let i = y * 8 + x;
                assert!(rotated.magnitude[i] > GRADIENT_EPSILON);
                assert_eq!(rotated.theta[i], 90.0);
                assert_eq!(rotated.t2[i], 6);
            }
        }
    }

    #[test]
    fn quantize_orientation_examples() {
        assert_eq!(quantize_orientation(0.0, 5.0), 0);
        assert_eq!(quantize_orientation(179.9, 5.0), 11);
        assert_eq!(quantize_orientation(44.0, 0.0), 0);
        assert_eq!(quantize_orientation(45.0, 1.0), 3);
        assert_eq!(quantize_orientation(14.999, 1.0), 0);
    }

    #[test]
    fn rotation_by_90_shifts_bins_by_six() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let img = RasterImage::from_fn(12, 9, |_, _| {
                [rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>()]
            })
            .unwrap();
            let base = dizenzo_orientation(&img);
            let rot = dizenzo_orientation(&rotate90(&img));
            let (w, h) = (img.width(), img.height());
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let i = y * w + x;
                    // (x, y) maps to (y, w-1-x) in the rotated image.
                    let j = (w - 1 - x) * h + y;
                    if base.magnitude[i] <= GRADIENT_EPSILON
                        || rot.magnitude[j] <= GRADIENT_EPSILON
                    {
                        continue;
                    }
                    // Skip pixels whose angle sits within a hair of a bin
                    // boundary in either image; the +6 relation is exact in
                    // angle but the floor can disagree at the last ulp.
                    let near_boundary = |t: f64| {
                        let r = (t / 15.0) - (t / 15.0).round();
                        r.abs() * 15.0 < 1e-6
                    };
                    if near_boundary(base.theta[i]) || near_boundary(rot.theta[j]) {
                        continue;
                    }
                    assert_eq!(
                        (base.t2[i] + 6) % 12,
                        rot.t2[j],
                        "at ({x},{y}): theta {} vs rotated {}",
                        base.theta[i],
                        rot.theta[j]
                    );
                }
            }
        }
    }

    #[test]
    fn map_invariants_hold_on_random_images() {
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..10 {
            let img = RasterImage::from_fn(9, 8, |_, _| {
                [rng.gen::<u8>(), rng.gen::<u8>(), rng.gen::<u8>()]
            })
            .unwrap();
            let map = dizenzo_orientation(&img);
            for i in 0..72 {
                assert!(map.magnitude[i] >= 0.0);
                assert!((0.0..180.0).contains(&map.theta[i]));
                if map.magnitude[i] > GRADIENT_EPSILON {
                    assert_eq!(map.t2[i] as f64, (map.theta[i] / 15.0).floor());
                } else {
                    assert_eq!(map.t2[i], 0);
                }
            }
        }
    }

    #[test]
    fn orientation_invariant_to_brightness_scaling() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..5 {
            let base = RasterImage::from_fn(10, 10, |_, _| {
                [
                    rng.gen_range(0..=127),
                    rng.gen_range(0..=127),
                    rng.gen_range(0..=127),
                ]
            })
            .unwrap();
            let doubled = RasterImage::from_fn(10, 10, |x, y| {
                let [r, g, b] = base.pixel(x, y);
                [r * 2, g * 2, b * 2]
            })
            .unwrap();
            let a = dizenzo_orientation(&base);
            let b = dizenzo_orientation(&doubled);
            for i in 0..100 {
                assert!(a.magnitude[i] >= 0.0);
                if a.magnitude[i] > GRADIENT_EPSILON && b.magnitude[i] > GRADIENT_EPSILON {
                    assert_eq!(a.t2[i], b.t2[i], "bin changed under 2x brightness");
                }
            }
        }
    }
}
