//! Deterministic synthetic rasters and labeled corpora for tests, benches,
//! and demos.
//!
//! `striped_class_corpus` generates classes that are separable by
//! construction: each class has a distinct dominant hue and a distinct
//! stripe orientation, with per-image jitter in hue, phase, stripe period,
//! and per-pixel noise.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::colorspace::RasterImage;

/// HSV (degrees, `[0,1]`, `[0,1]`) to 8-bit RGB.
pub fn rgb8_from_hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h = h.rem_euclid(360.0);
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let to_u8 = |f: f64| ((f + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [to_u8(r1), to_u8(g1), to_u8(b1)]
}

/// Parameters for the striped synthetic corpus.
#[derive(Debug, Clone, Copy)]
pub struct StripedCorpusConfig {
    pub classes: usize,
    pub per_class: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl Default for StripedCorpusConfig {
    fn default() -> Self {
        Self {
            classes: 8,
            per_class: 25,
            width: 48,
            height: 48,
            seed: 0x5eed,
        }
    }
}

/// One stripe-textured image: base hue with lighter/darker bands at a fixed
/// angle, plus pixel noise.
pub fn striped_image(
    width: usize,
    height: usize,
    hue_deg: f64,
    stripe_angle_deg: f64,
    stripe_period: f64,
    phase: f64,
    rng: &mut StdRng,
) -> RasterImage {
    let angle = stripe_angle_deg.to_radians();
    let (nx, ny) = (angle.cos(), angle.sin());
    RasterImage::from_fn(width, height, |x, y| {
        let t = (x as f64 * nx + y as f64 * ny + phase) / stripe_period;
        let band = (t.rem_euclid(2.0)) < 1.0;
        let base_v: f64 = if band { 0.85 } else { 0.50 };
        let h = hue_deg + rng.gen_range(-3.0..3.0);
        let s = 0.85 + rng.gen_range(-0.05..0.05);
        let v = base_v + rng.gen_range(-0.04..0.04);
        rgb8_from_hsv(h, s, v.clamp(0.0, 1.0))
    })
    .unwrap()
}

/// Generates `(image_id, class_label, image)` triples: `classes` classes of
/// `per_class` images each, dominant hue and stripe orientation distinct per
/// class.
pub fn striped_class_corpus(config: &StripedCorpusConfig) -> Vec<(String, String, RasterImage)> {
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.classes * config.per_class);
    for c in 0..config.classes {
        let hue = (c as f64 + 0.5) * 360.0 / config.classes as f64;
        let angle = c as f64 * 180.0 / config.classes as f64 + 7.0;
        let label = format!("class{c:02}");
        for i in 0..config.per_class {
            let hue_jitter = rng.gen_range(-6.0..6.0);
            let angle_jitter = rng.gen_range(-3.0..3.0);
            let period = rng.gen_range(5.0..9.0);
            let phase = rng.gen_range(0.0..20.0);
            let img = striped_image(
                config.width,
                config.height,
                hue + hue_jitter,
                angle + angle_jitter,
                period,
                phase,
                &mut rng,
            );
            out.push((format!("{label}/{i:03}"), label.clone(), img));
        }
    }
    out
}

/// A uniformly random raster, for fuzz-style tests and benches.
pub fn random_image(rng: &mut StdRng, width: usize, height: usize) -> RasterImage {
    RasterImage::from_fn(width, height, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
}

/// Cluster-structured descriptor vectors whose pairwise distances land near
/// the default kernel bandwidth. Uniform random vectors of this
/// dimensionality would sit so far apart that every affinity underflows to
/// zero, leaving a degenerate graph.
pub fn clustered_descriptors(n: usize, dim: usize, clusters: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(clusters > 0);
    let mut rng = StdRng::seed_from_u64(seed);
    let spread = 4.0 / dim as f64;
    let centers: Vec<Vec<f64>> = (0..clusters)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..spread)).collect())
        .collect();
    (0..n)
        .map(|i| {
            centers[i % clusters]
                .iter()
                .map(|&c| (c + rng.gen_range(-0.5 * spread..0.5 * spread)).max(0.0))
                .collect()
        })
        .collect()
}
