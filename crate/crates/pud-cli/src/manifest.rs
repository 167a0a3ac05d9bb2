//! Dataset manifests: directory scanning, manifest-file parsing, and image
//! decoding into rasters.
//!
//! Directory mode treats every PNG/JPEG/BMP under the root as an entry,
//! labeled by its immediate parent directory and identified by its
//! slash-normalized relative path. Manifest-file mode reads tab-separated
//! lines `relative_path<TAB>image_id<TAB>class_label` resolved against the
//! manifest's directory. Entries are ordered lexicographically by relative
//! path in both modes.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::CliError;
use pud_core::RasterImage;

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub relative_path: String,
    pub image_id: String,
    pub class_label: String,
}

#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

/// A rejected entry and the reason, reported per path.
#[derive(Debug, Clone)]
pub struct Rejection {
    pub relative_path: String,
    pub reason: String,
}

impl DatasetManifest {
    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.relative_path)
    }

    /// Tab-separated serialization, one entry per line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(out, "{}\t{}\t{}", e.relative_path, e.image_id, e.class_label);
        }
        out
    }
}

/// Decodes an image file into an RGB raster.
pub fn decode_raster(path: &Path) -> Result<RasterImage, String> {
    let decoded = image::open(path).map_err(|e| format!("decode failed: {e}"))?;
    let rgb = decoded.to_rgb8();
    RasterImage::from_raw_rgb(rgb.width() as usize, rgb.height() as usize, rgb.as_raw())
        .map_err(|e| e.to_string())
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)))
        .unwrap_or(false)
}

fn scan_directory(root: &Path) -> Result<Vec<ManifestEntry>, CliError> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let entry = entry?;
            let path = entry.path();
            let name = entry.file_name();
            if name.to_string_lossy().starts_with('.') {
                continue;
            }
            if path.is_dir() {
                walk(&path, out)?;
            } else if has_image_extension(&path) {
                out.push(path);
            }
        }
        Ok(())
    }

    let mut files = Vec::new();
    walk(root, &mut files)
        .map_err(|e| CliError::Data(format!("cannot scan {}: {e}", root.display())))?;

    let entries = files
        .into_iter()
        .map(|path| {
            let rel = path
                .strip_prefix(root)
                .expect("walked path is under root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            let class_label = path
                .parent()
                .and_then(|p| p.file_name())
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "unknown".to_string());
            ManifestEntry {
                image_id: rel.clone(),
                relative_path: rel,
                class_label,
            }
        })
        .collect();
    Ok(entries)
}

fn parse_manifest_file(path: &Path) -> Result<(PathBuf, Vec<ManifestEntry>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
    let root = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));

    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(CliError::Data(format!(
                "{}:{}: expected 3 tab-separated fields, got {}",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        entries.push(ManifestEntry {
            relative_path: fields[0].to_string(),
            image_id: fields[1].to_string(),
            class_label: fields[2].to_string(),
        });
    }
    Ok((root, entries))
}

/// Builds a manifest from a directory or a manifest file.
///
/// With `validate_decode`, every entry is decoded and failures become
/// rejections; otherwise only existence is checked. Rejections abort the
/// call unless `skip_bad`, in which case the rejected entries are dropped
/// from the manifest and returned for reporting.
pub fn ingest(
    path: &Path,
    validate_decode: bool,
    skip_bad: bool,
) -> Result<(DatasetManifest, Vec<Rejection>), CliError> {
    if !path.exists() {
        return Err(CliError::Data(format!("no such path: {}", path.display())));
    }
    let (root, mut entries) = if path.is_dir() {
        (path.to_path_buf(), scan_directory(path)?)
    } else {
        parse_manifest_file(path)?
    };
    entries.sort_by(|a, b| a.relative_path.cmp(&b.relative_path));

    let mut seen = HashSet::new();
    for e in &entries {
        if !seen.insert(e.image_id.as_str()) {
            return Err(CliError::Data(format!("duplicate image id '{}'", e.image_id)));
        }
    }
    drop(seen);

    let verdicts: Vec<Option<String>> = entries
        .par_iter()
        .map(|e| {
            let full = root.join(&e.relative_path);
            if !full.is_file() {
                return Some(format!("missing file: {}", full.display()));
            }
            if validate_decode {
                if let Err(reason) = decode_raster(&full) {
                    return Some(reason);
                }
            }
            None
        })
        .collect();

    let mut kept = Vec::with_capacity(entries.len());
    let mut rejections = Vec::new();
    for (entry, verdict) in entries.into_iter().zip(verdicts) {
        match verdict {
            None => kept.push(entry),
            Some(reason) => rejections.push(Rejection {
                relative_path: entry.relative_path,
                reason,
            }),
        }
    }

    if !rejections.is_empty() && !skip_bad {
        let mut msg = format!("{} entries rejected:\n", rejections.len());
        for r in &rejections {
            let _ = writeln!(msg, "  {}: {}", r.relative_path, r.reason);
        }
        msg.push_str("rerun with --skip-bad to drop them");
        return Err(CliError::Data(msg));
    }
    if kept.is_empty() {
        return Err(CliError::Data(format!(
            "empty dataset: no usable images under {}",
            path.display()
        )));
    }

    Ok((DatasetManifest { root, entries: kept }, rejections))
}
