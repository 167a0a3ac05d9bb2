//! Dataset ingestion, feature-index persistence, and the retrieval commands
//! behind the `pud` binary.

pub mod commands;
pub mod error;
pub mod index;
pub mod manifest;
pub mod report;

pub use error::CliError;
pub use index::{DescriptorKind, FeatureIndex, IndexRecord};
pub use manifest::{decode_raster, ingest, DatasetManifest, ManifestEntry, Rejection};
