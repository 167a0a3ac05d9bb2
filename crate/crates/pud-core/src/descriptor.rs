//! Perceptually uniform region detection and the PUD feature blocks.
//!
//! For each quantized map (color T1 with 128 bins, edge orientation T2 with
//! 12 bins) an interior pixel is "uniform" when at least one of its eight
//! neighbors shares its map value. Over uniform centers only, four per-bin
//! statistics are accumulated and combined into a contrast block
//! Lc = phi*(psi+1) and a structure block Lf = eta*(varphi+1). The final
//! descriptor concatenates both blocks of both maps, weighted per map:
//! h = [beta1*[Lc1 Lf1], beta2*[Lc2 Lf2]], 280 values.

use crate::colorspace::{
    color_difference_idx, quantize_color, rgb_to_hsv, HsvPlanes, RasterImage, COLOR_BINS,
};
use crate::gradient::{dizenzo_orientation, ORIENTATION_BINS};

/// Length of the final descriptor: 2*128 color values + 2*12 orientation values.
pub const PUD_DIM: usize = 2 * COLOR_BINS + 2 * ORIENTATION_BINS;

/// The eight neighbor offsets of a 3x3 window, in row-major window order.
/// Accumulation order is part of the extraction contract: reference
/// implementations must visit neighbors in this order to reproduce results
/// bit for bit.
pub(crate) const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Marks interior pixels whose 3x3 block is perceptually uniform on the
/// given map: at least one of the eight neighbors has the same map value.
/// Marginal (border) pixels are never marked.
pub fn detect_uniform_blocks(map: &[u8], width: usize, height: usize) -> Vec<bool> {
    assert_eq!(map.len(), width * height);
    assert!(width >= 3 && height >= 3);
    let mut mask = vec![false; map.len()];
    for y in 1..height - 1 {
        for x in 1..width - 1 {
            let c = y * width + x;
            let center = map[c];
            let uniform = NEIGHBOR_OFFSETS.iter().any(|&(dx, dy)| {
                let nx = (x as isize + dx) as usize;
                let ny = (y as isize + dy) as usize;
                map[ny * width + nx] == center
            });
            mask[c] = uniform;
        }
    }
    mask
}

/// Per-bin statistics accumulated over uniform interior centers.
///
/// For a masked center with bin b and neighbor differences d_i:
/// `sum_uniform_diff[b]` adds d_i over neighbors sharing the center's map
/// value, `sum_all_diff[b]` adds all eight d_i, `uniform_neighbor_count[b]`
/// counts matching neighbors, and `center_count[b]` counts masked centers.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    pub sum_uniform_diff: Vec<f64>,
    pub sum_all_diff: Vec<f64>,
    pub uniform_neighbor_count: Vec<u64>,
    pub center_count: Vec<u64>,
}

impl BlockStats {
    pub fn zeros(bins: usize) -> Self {
        Self {
            sum_uniform_diff: vec![0.0; bins],
            sum_all_diff: vec![0.0; bins],
            uniform_neighbor_count: vec![0; bins],
            center_count: vec![0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.center_count.len()
    }
}

/// Accumulates block statistics for one quantized map.
///
/// The neighbor difference d_i is always the color difference of the pixels
/// (the map only decides which neighbors count as uniform), so the same
/// planes feed both the color and the orientation statistics.
pub fn accumulate_block_stats(
    map: &[u8],
    bins: usize,
    mask: &[bool],
    planes: &HsvPlanes,
) -> BlockStats {
    let width = planes.width();
    let height = planes.height();
    assert_eq!(map.len(), width * height);
    assert_eq!(mask.len(), map.len());

    let mut stats = BlockStats::zeros(bins);
    for y in 1..height - 1 {
        for x in 1..width - 1 {
            let c = y * width + x;
            if !mask[c] {
                continue;
            }
            let b = map[c] as usize;
            debug_assert!(b < bins);
            for &(dx, dy) in NEIGHBOR_OFFSETS.iter() {
                let nx = (x as isize + dx) as usize;
                let ny = (y as isize + dy) as usize;
                let n = ny * width + nx;
                let d = color_difference_idx(planes, c, n);
                stats.sum_all_diff[b] += d;
                if map[n] == map[c] {
                    stats.sum_uniform_diff[b] += d;
                    stats.uniform_neighbor_count[b] += 1;
                }
            }
            stats.center_count[b] += 1;
        }
    }
    stats
}

/// phi: per-bin ratio of uniform-neighbor color difference to all neighbor
/// color difference. Empty bins map to 0.
pub fn color_difference_correlation(stats: &BlockStats) -> Vec<f64> {
    stats
        .sum_uniform_diff
        .iter()
        .zip(&stats.sum_all_diff)
        .map(|(&d, &d_all)| if d_all > 0.0 { d / d_all } else { 0.0 })
        .collect()
}

/// psi: per-bin share of the total accumulated color difference. All-zero
/// when nothing was accumulated.
pub fn global_color_difference_histogram(stats: &BlockStats) -> Vec<f64> {
    let total: f64 = stats.sum_all_diff.iter().sum();
    if total > 0.0 {
        stats.sum_all_diff.iter().map(|&d| d / total).collect()
    } else {
        vec![0.0; stats.bins()]
    }
}

/// varphi: per-bin share of uniform centers. All-zero when no center was
/// masked.
pub fn texton_frequency_histogram(stats: &BlockStats) -> Vec<f64> {
    let total: u64 = stats.center_count.iter().sum();
    if total > 0 {
        stats
            .center_count
            .iter()
            .map(|&n| n as f64 / total as f64)
            .collect()
    } else {
        vec![0.0; stats.bins()]
    }
}

/// eta: per-bin fraction of matching neighbors out of the 8 possible per
/// center. Empty bins map to 0.
pub fn texton_frequency_correlation(stats: &BlockStats) -> Vec<f64> {
    stats
        .uniform_neighbor_count
        .iter()
        .zip(&stats.center_count)
        .map(|(&n, &n_bar)| {
            if n_bar > 0 {
                n as f64 / (8.0 * n_bar as f64)
            } else {
                0.0
            }
        })
        .collect()
}

/// Contrast fusion: Lc(b) = phi(b) * (psi(b) + 1).
pub fn fuse_contrast(phi: &[f64], psi: &[f64]) -> Vec<f64> {
    assert_eq!(phi.len(), psi.len());
    phi.iter().zip(psi).map(|(&p, &q)| p * (q + 1.0)).collect()
}

/// Structure fusion: Lf(b) = eta(b) * (varphi(b) + 1).
pub fn fuse_structure(eta: &[f64], varphi: &[f64]) -> Vec<f64> {
    assert_eq!(eta.len(), varphi.len());
    eta.iter()
        .zip(varphi)
        .map(|(&e, &f)| e * (f + 1.0))
        .collect()
}

/// The four per-bin statistics vectors of one map plus their two fusions.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlocks {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub varphi: Vec<f64>,
    pub eta: Vec<f64>,
    pub lc: Vec<f64>,
    pub lf: Vec<f64>,
}

impl FeatureBlocks {
    pub fn compute(stats: &BlockStats) -> Self {
        let phi = color_difference_correlation(stats);
        let psi = global_color_difference_histogram(stats);
        let varphi = texton_frequency_histogram(stats);
        let eta = texton_frequency_correlation(stats);
        let lc = fuse_contrast(&phi, &psi);
        let lf = fuse_structure(&eta, &varphi);
        Self {
            phi,
            psi,
            varphi,
            eta,
            lc,
            lf,
        }
    }

    pub fn bins(&self) -> usize {
        self.phi.len()
    }
}

/// Map weights for the final descriptor. Defaults match the category-
/// retrieval configuration (beta1 = 0.1, beta2 = 0.75).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PudParams {
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for PudParams {
    fn default() -> Self {
        Self {
            beta1: 0.1,
            beta2: 0.75,
        }
    }
}

/// The extracted descriptor: per-map blocks, their concatenations, and the
/// weighted 280-dimensional feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PudDescriptor {
    /// Color-map blocks (128 bins).
    pub color_blocks: FeatureBlocks,
    /// Orientation-map blocks (12 bins).
    pub orientation_blocks: FeatureBlocks,
    /// [Lc1 Lf1], 256 values.
    pub h1: Vec<f64>,
    /// [Lc2 Lf2], 24 values.
    pub h2: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    /// [beta1*h1, beta2*h2], 280 values.
    pub h: Vec<f64>,
}

/// Extracts the full descriptor from an image.
///
/// Runs the pipeline once per map: quantize, detect uniform blocks,
/// accumulate statistics, fuse. The result is a pure function of the pixels
/// and the weights; repeated calls agree bit for bit.
pub fn extract_pud(img: &RasterImage, params: &PudParams) -> PudDescriptor {
    assert!(
        params.beta1 >= 0.0 && params.beta2 >= 0.0,
        "weights must be nonnegative"
    );
    let width = img.width();
    let height = img.height();

    let planes = rgb_to_hsv(img);
    let t1 = quantize_color(&planes);
    let orientation = dizenzo_orientation(img);

    let mask1 = detect_uniform_blocks(&t1, width, height);
    let stats1 = accumulate_block_stats(&t1, COLOR_BINS, &mask1, &planes);
    let color_blocks = FeatureBlocks::compute(&stats1);

    let mask2 = detect_uniform_blocks(&orientation.t2, width, height);
    let stats2 = accumulate_block_stats(&orientation.t2, ORIENTATION_BINS, &mask2, &planes);
    let orientation_blocks = FeatureBlocks::compute(&stats2);

    assemble(color_blocks, orientation_blocks, params)
}

pub(crate) fn assemble(
    color_blocks: FeatureBlocks,
    orientation_blocks: FeatureBlocks,
    params: &PudParams,
) -> PudDescriptor {
    let mut h1 = Vec::with_capacity(2 * COLOR_BINS);
    h1.extend_from_slice(&color_blocks.lc);
    h1.extend_from_slice(&color_blocks.lf);
    let mut h2 = Vec::with_capacity(2 * ORIENTATION_BINS);
    h2.extend_from_slice(&orientation_blocks.lc);
    h2.extend_from_slice(&orientation_blocks.lf);

    let mut h = Vec::with_capacity(PUD_DIM);
    h.extend(h1.iter().map(|&v| params.beta1 * v));
    h.extend(h2.iter().map(|&v| params.beta2 * v));
    debug_assert_eq!(h.len(), PUD_DIM);

    PudDescriptor {
        color_blocks,
        orientation_blocks,
        h1,
        h2,
        beta1: params.beta1,
        beta2: params.beta2,
        h,
    }
}

/// Baseline comparator: the normalized occurrence histogram of quantized
/// color bins over all pixels. Sums to 1.
pub fn extract_hsv_histogram(img: &RasterImage) -> Vec<f64> {
    let planes = rgb_to_hsv(img);
    let t1 = quantize_color(&planes);
    let mut hist = vec![0.0; COLOR_BINS];
    for &bin in &t1 {
        hist[bin as usize] += 1.0;
    }
    let total = t1.len() as f64;
    for v in &mut hist {
        *v /= total;
    }
    hist
}
