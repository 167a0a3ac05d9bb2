//! Shared fixtures for the extraction and ranking benchmarks.

use rand::rngs::StdRng;
use rand::SeedableRng;

use pud_core::synthetic::{clustered_descriptors, striped_image};
use pud_core::{RasterImage, PUD_DIM};

/// A 384x256 striped raster, the size used for the extraction target.
pub fn benchmark_image() -> RasterImage {
    let mut rng = StdRng::seed_from_u64(0xBE7C);
    striped_image(384, 256, 210.0, 30.0, 7.0, 0.0, &mut rng)
}

/// A deterministic descriptor corpus with a non-degenerate affinity graph.
pub fn random_descriptors(n: usize) -> Vec<Vec<f64>> {
    clustered_descriptors(n, PUD_DIM, 10, 0xC0FF)
}
