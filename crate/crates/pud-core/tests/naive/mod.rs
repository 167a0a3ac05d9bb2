//! Deliberately plain reference implementation of the descriptor pipeline.
//!
//! Everything is recomputed per window with explicit loops and no shared
//! state with the library: per-pixel HSV, Cartesian coordinates, quantized
//! maps, the gradient tensor, uniform-block detection, and the block
//! statistics. The arithmetic follows the same documented formulas in the
//! same accumulation order (row-major centers, row-major window neighbors),
//! so the optimized extractor must agree bit for bit.

use pud_core::RasterImage;

const OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

const COLOR_BINS: usize = 128;
const ORIENTATION_BINS: usize = 12;
const GRADIENT_EPSILON: f64 = 1e-6;

pub struct Blocks {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub varphi: Vec<f64>,
    pub eta: Vec<f64>,
    pub lc: Vec<f64>,
    pub lf: Vec<f64>,
}

pub struct Reference {
    pub color: Blocks,
    pub orientation: Blocks,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub h: Vec<f64>,
}

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

fn cartesian_at(img: &RasterImage, x: usize, y: usize) -> (f64, f64, f64) {
    let [r, g, b] = img.pixel(x, y);
    let (h, s, v) = hsv_from_rgb8(r, g, b);
    let h_rad = h.to_radians();
    // Opaque copies keep the cos/sin pair from fusing into a sincos
    // libcall, mirroring the library's evaluation exactly.
    let cos_h = std::hint::black_box(h_rad).cos();
    let sin_h = std::hint::black_box(h_rad).sin();
    (s * cos_h, s * sin_h, v)
}

fn color_diff(img: &RasterImage, a: (usize, usize), b: (usize, usize)) -> f64 {
    let (h1, s1, v1) = cartesian_at(img, a.0, a.1);
    let (h2, s2, v2) = cartesian_at(img, b.0, b.1);
    let dh = h1 - h2;
    let ds = s1 - s2;
    let dv = v1 - v2;
    (dh * dh + ds * ds + dv * dv).sqrt()
}

pub fn t1_of(rgb: [u8; 3]) -> u8 {
    let (h, s, v) = hsv_from_rgb8(rgb[0], rgb[1], rgb[2]);
    let hq = ((h / 45.0).floor() as usize).min(7);
    let sq = ((s * 4.0).floor() as usize).min(3);
    let vq = ((v * 4.0).floor() as usize).min(3);
    (hq * 16 + sq * 4 + vq) as u8
}

fn t1_at(img: &RasterImage, x: usize, y: usize) -> u8 {
    t1_of(img.pixel(x, y))
}

fn channel(img: &RasterImage, x: usize, y: usize) -> (f64, f64, f64) {
    let [r, g, b] = img.pixel(x, y);
    (
        f64::from(r) / 255.0,
        f64::from(g) / 255.0,
        f64::from(b) / 255.0,
    )
}

fn orientation_at(img: &RasterImage, x: usize, y: usize) -> (f64, f64) {
    // Border pixels replicate the nearest interior pixel.
    let cx = x.clamp(1, img.width() - 2);
    let cy = y.clamp(1, img.height() - 2);

    let right = channel(img, cx + 1, cy);
    let left = channel(img, cx - 1, cy);
    let down = channel(img, cx, cy + 1);
    let up = channel(img, cx, cy - 1);
    let rx = (right.0 - left.0) * 0.5;
    let gx = (right.1 - left.1) * 0.5;
    let bx = (right.2 - left.2) * 0.5;
    let ry = (down.0 - up.0) * 0.5;
    let gy = (down.1 - up.1) * 0.5;
    let by = (down.2 - up.2) * 0.5;

    let gxx = rx * rx + gx * gx + bx * bx;
    let gyy = ry * ry + gy * gy + by * by;
    let gxy = rx * ry + gx * gy + bx * by;

    let psi = (2.0 * gxy).atan2(gxx - gyy);
    let mut theta = 0.5 * psi;
    if theta < 0.0 {
        theta += std::f64::consts::PI;
    }
    let mut deg = theta.to_degrees();
    let k = (deg / 15.0).round();
    let snapped = k * 15.0;
    if (deg - snapped).abs() < 1e-9 {
        deg = snapped;
    }
    if deg >= 180.0 {
        deg -= 180.0;
    }

    let cos_psi = std::hint::black_box(psi).cos();
    let sin_psi = std::hint::black_box(psi).sin();
    let mag_sq = 0.5 * ((gxx + gyy) + (gxx - gyy) * cos_psi + 2.0 * gxy * sin_psi);
    (deg, mag_sq.max(0.0).sqrt())
}

fn t2_at(img: &RasterImage, x: usize, y: usize) -> u8 {
    let (deg, mag) = orientation_at(img, x, y);
    if mag <= GRADIENT_EPSILON {
        return 0;
    }
    ((deg / 15.0).floor() as usize).min(ORIENTATION_BINS - 1) as u8
}

fn block_vectors(img: &RasterImage, bins: usize, map_at: &dyn Fn(usize, usize) -> u8) -> Blocks {
    let w = img.width();
    let h = img.height();

    let mut sum_uniform = vec![0.0; bins];
    let mut sum_all = vec![0.0; bins];
    let mut uniform_neighbors = vec![0u64; bins];
    let mut centers = vec![0u64; bins];

    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let center = map_at(x, y);
            let mut uniform = false;
            for &(dx, dy) in OFFSETS.iter() {
                let nx = (x as isize + dx) as usize;
                let ny = (y as isize + dy) as usize;
                if map_at(nx, ny) == center {
                    uniform = true;
                }
            }
            if !uniform {
                continue;
            }
            let b = center as usize;
            for &(dx, dy) in OFFSETS.iter() {
                let nx = (x as isize + dx) as usize;
                let ny = (y as isize + dy) as usize;
                let d = color_diff(img, (x, y), (nx, ny));
                sum_all[b] += d;
                if map_at(nx, ny) == center {
                    sum_uniform[b] += d;
                    uniform_neighbors[b] += 1;
                }
            }
            centers[b] += 1;
        }
    }

    let mut phi = vec![0.0; bins];
    for b in 0..bins {
        if sum_all[b] > 0.0 {
            phi[b] = sum_uniform[b] / sum_all[b];
        }
    }

    let mut total_diff = 0.0;
    for &d in &sum_all {
        total_diff += d;
    }
    let mut psi = vec![0.0; bins];
    if total_diff > 0.0 {
        for b in 0..bins {
            psi[b] = sum_all[b] / total_diff;
        }
    }

    let mut total_centers = 0u64;
    for &n in &centers {
        total_centers += n;
    }
    let mut varphi = vec![0.0; bins];
    if total_centers > 0 {
        for b in 0..bins {
            varphi[b] = centers[b] as f64 / total_centers as f64;
        }
    }

    let mut eta = vec![0.0; bins];
    for b in 0..bins {
        if centers[b] > 0 {
            eta[b] = uniform_neighbors[b] as f64 / (8.0 * centers[b] as f64);
        }
    }

    let mut lc = vec![0.0; bins];
    let mut lf = vec![0.0; bins];
    for b in 0..bins {
        lc[b] = phi[b] * (psi[b] + 1.0);
        lf[b] = eta[b] * (varphi[b] + 1.0);
    }

    Blocks {
        phi,
        psi,
        varphi,
        eta,
        lc,
        lf,
    }
}

pub fn extract_pud_reference(img: &RasterImage, beta1: f64, beta2: f64) -> Reference {
    let color = block_vectors(img, COLOR_BINS, &|x, y| t1_at(img, x, y));
    let orientation = block_vectors(img, ORIENTATION_BINS, &|x, y| t2_at(img, x, y));

    let mut h1 = Vec::with_capacity(2 * COLOR_BINS);
    h1.extend_from_slice(&color.lc);
    h1.extend_from_slice(&color.lf);
    let mut h2 = Vec::with_capacity(2 * ORIENTATION_BINS);
    h2.extend_from_slice(&orientation.lc);
    h2.extend_from_slice(&orientation.lf);

    let mut h = Vec::with_capacity(2 * COLOR_BINS + 2 * ORIENTATION_BINS);
    for &v in &h1 {
        h.push(beta1 * v);
    }
    for &v in &h2 {
        h.push(beta2 * v);
    }

    Reference {
        color,
        orientation,
        h1,
        h2,
        h,
    }
}
