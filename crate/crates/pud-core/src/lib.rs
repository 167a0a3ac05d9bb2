//! Perceptual-uniform image descriptors with manifold-ranking retrieval.
//!
//! The pipeline: decode an RGB raster, quantize it into a 128-bin color map
//! and a 12-bin edge-orientation map, detect perceptually uniform 3x3 regions
//! on each map, and accumulate per-bin color-difference and texton-frequency
//! statistics into a 280-dimensional descriptor. A corpus of descriptors is
//! ranked against a query either by L1/L2 distance or by manifold ranking on
//! a kNN affinity graph.

pub mod colorspace;
pub mod descriptor;
pub mod evaluation;
pub mod gradient;
pub mod ranking;
pub mod synthetic;

pub use colorspace::{
    color_difference, quantize_color, quantize_hsv, rgb_to_hsv, HsvPlanes, RasterError,
    RasterImage, COLOR_BINS,
};
pub use descriptor::{
    accumulate_block_stats, color_difference_correlation, detect_uniform_blocks, extract_hsv_histogram,
    extract_pud, fuse_contrast, fuse_structure, global_color_difference_histogram,
    texton_frequency_correlation, texton_frequency_histogram, BlockStats, FeatureBlocks, PudDescriptor,
    PudParams, PUD_DIM,
};
pub use evaluation::{
    ns_score, precision_recall_at_n, run_protocol, CorpusItem, EvalError, EvalReport,
    LabeledCorpus, Protocol,
};
pub use gradient::{
    dizenzo_orientation, quantize_orientation, OrientationMap, GRADIENT_EPSILON, ORIENTATION_BINS,
};
pub use ranking::{
    build_graph, mr_closed_form, mr_iterative, rank_by_manifold, rank_by_norm, Metric,
    MrDirectSolver, MrParams, RankGraph, RankMethod, RankState, RankingError, SolverConfig,
    SolverKind,
};
