//! Implementations of the `pud` subcommands: ingest, extract, query,
//! evaluate.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::CliError;
use crate::index::{DescriptorKind, FeatureIndex, IndexRecord};
use crate::manifest::{decode_raster, ingest};
use crate::report;
use pud_core::ranking::order_by_descending_score;
use pud_core::{
    build_graph, extract_hsv_histogram, extract_pud, mr_iterative, rank_by_norm, run_protocol,
    Metric, MrDirectSolver, MrParams, Protocol, PudParams, RankMethod, RankState, SolverConfig,
    SolverKind,
};

/// Graph and solver flags shared by `query` and `evaluate`.
#[derive(Debug, Clone, Copy)]
pub struct RankingFlags {
    pub k: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iters: usize,
}

impl RankingFlags {
    pub fn to_params(self) -> MrParams {
        MrParams {
            k: self.k,
            sigma: self.sigma,
            alpha: self.alpha,
            solver: SolverConfig {
                kind: self.solver,
                tol: self.tol,
                max_iters: self.max_iters,
                ..SolverConfig::default()
            },
        }
    }
}

pub fn cmd_ingest(path: &Path, skip_bad: bool, out: Option<&Path>) -> Result<(), CliError> {
    let (manifest, rejections) = ingest(path, true, skip_bad)?;
    for r in &rejections {
        eprintln!("rejected {}: {}", r.relative_path, r.reason);
    }

    let mut class_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &manifest.entries {
        *class_counts.entry(e.class_label.as_str()).or_insert(0) += 1;
    }
    println!(
        "{} entries, {} classes (root {})",
        manifest.entries.len(),
        class_counts.len(),
        manifest.root.display()
    );
    for (label, count) in &class_counts {
        println!("  {label}: {count}");
    }

    if let Some(out_path) = out {
        std::fs::write(out_path, manifest.to_tsv())?;
        println!("manifest written to {}", out_path.display());
    }
    Ok(())
}

pub fn cmd_extract(
    path: &Path,
    kind: DescriptorKind,
    beta1: f64,
    beta2: f64,
    out: &Path,
    skip_bad: bool,
) -> Result<(), CliError> {
    if beta1 < 0.0 || beta2 < 0.0 {
        return Err(CliError::Usage("beta weights must be nonnegative".into()));
    }
    // Decode failures surface during extraction; no pre-validation pass.
    let (manifest, rejections) = ingest(path, false, skip_bad)?;
    for r in &rejections {
        eprintln!("rejected {}: {}", r.relative_path, r.reason);
    }

    let params = PudParams { beta1, beta2 };
    let results: Vec<Result<IndexRecord, (String, String)>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let img = decode_raster(&manifest.resolve(entry))
                .map_err(|reason| (entry.relative_path.clone(), reason))?;
            let descriptor = match kind {
                DescriptorKind::Pud => extract_pud(&img, &params).h,
                DescriptorKind::Hsv => extract_hsv_histogram(&img),
            };
            Ok(IndexRecord {
                image_id: entry.image_id.clone(),
                class_label: entry.class_label.clone(),
                descriptor,
            })
        })
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(record) => records.push(record),
            Err((path, reason)) => failures.push((path, reason)),
        }
    }
    for (path, reason) in &failures {
        eprintln!("failed {path}: {reason}");
    }
    if !failures.is_empty() && !skip_bad {
        return Err(CliError::Data(format!(
            "{} entries failed to extract; rerun with --skip-bad to drop them",
            failures.len()
        )));
    }
    if records.is_empty() {
        return Err(CliError::Data("no records extracted".into()));
    }

    let count = records.len();
    let index = FeatureIndex::new(kind, beta1, beta2, records)?;
    index.write_to(out)?;
    println!(
        "wrote {count} records (dim {}) to {}",
        index.dim,
        out.display()
    );
    Ok(())
}

/// Query source: an id inside the index, or an external image file.
#[derive(Debug, Clone)]
pub enum QuerySpec {
    Id(String),
    Image(PathBuf),
}

pub fn cmd_query(
    index_path: &Path,
    spec: &QuerySpec,
    method: RankMethod,
    flags: RankingFlags,
    returns: usize,
) -> Result<(), CliError> {
    let index = FeatureIndex::read_from(index_path)?;
    let descriptors = index.descriptors();
    let n = descriptors.len();
    if n == 0 {
        return Err(CliError::Data("index contains no records".into()));
    }
    let top = returns.min(n);

    let (order, scores) = match spec {
        QuerySpec::Id(id) => {
            let q = index
                .position(id)
                .ok_or_else(|| CliError::Data(format!("unknown query id '{id}'")))?;
            if method.is_manifold() {
                let params = flags.to_params();
                let graph = build_graph(&descriptors, params.k, params.sigma, method.metric())?;
                let state = RankState::single_query(n, q, params.alpha)?;
                let f = match params.solver.effective_kind(n) {
                    SolverKind::Direct => {
                        MrDirectSolver::new(&graph, params.alpha)?.solve(&graph, &state.y)?
                    }
                    _ => mr_iterative(&graph, &state, params.solver.tol, params.solver.max_iters)?,
                };
                (order_by_descending_score(&f), f)
            } else {
                let order = rank_by_norm(&descriptors, q, method.metric());
                let scores = distances_to(&descriptors, descriptors[q], method.metric());
                (order, scores)
            }
        }
        QuerySpec::Image(path) => {
            if method.is_manifold() {
                return Err(CliError::Usage(format!(
                    "method unavailable: {method} requires an in-corpus query id; \
                     external images can be ranked with l1 or l2"
                )));
            }
            let img = decode_raster(path).map_err(CliError::Data)?;
            let descriptor = match index.descriptor_kind {
                DescriptorKind::Pud => {
                    extract_pud(
                        &img,
                        &PudParams {
                            beta1: index.beta1,
                            beta2: index.beta2,
                        },
                    )
                    .h
                }
                DescriptorKind::Hsv => extract_hsv_histogram(&img),
            };
            let scores = distances_to(&descriptors, &descriptor, method.metric());
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
            (order, scores)
        }
    };

    println!("rank\timage_id\tclass_label\tscore");
    for (rank, &i) in order[..top].iter().enumerate() {
        let r = &index.records[i];
        println!(
            "{}\t{}\t{}\t{:.6}",
            rank + 1,
            r.image_id,
            r.class_label,
            scores[i]
        );
    }
    Ok(())
}

fn distances_to(descriptors: &[&[f64]], query: &[f64], metric: Metric) -> Vec<f64> {
    descriptors
        .iter()
        .map(|d| metric.distance(query, d))
        .collect()
}

pub fn cmd_evaluate(
    index_path: &Path,
    method: RankMethod,
    flags: RankingFlags,
    returns: usize,
    protocol: Protocol,
    report_path: Option<&Path>,
) -> Result<(), CliError> {
    let index = FeatureIndex::read_from(index_path)?;
    let corpus = index.to_corpus()?;
    let n = if protocol == Protocol::NsScore {
        returns.min(corpus.len())
    } else {
        returns
    };
    let report = run_protocol(&corpus, method, &flags.to_params(), n, protocol)?;

    let table = report::render_table(&report);
    print!("{table}");
    println!(
        "avg precision {:.2}%  avg recall {:.2}%",
        report.avg_precision, report.avg_recall
    );

    if let Some(path) = report_path {
        let json = report::to_json(&report, index.descriptor_kind.as_str())?;
        std::fs::write(path, json)?;
        let table_path = path.with_extension("txt");
        std::fs::write(&table_path, &table)?;
        println!(
            "report written to {} (table at {})",
            path.display(),
            table_path.display()
        );
    }
    Ok(())
}
