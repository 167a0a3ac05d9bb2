//! Retrieval evaluation: every image queries the corpus, precision and
//! recall are measured over the top n returns, with per-class aggregation
//! and the 4-per-class N-S score.
//!
//! The query stays in the candidate list and counts as relevant, so
//! precision at n = 1 is always 100% for distance methods. With equal class
//! sizes this makes recall = precision * n / class_size an identity.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ranking::{
    build_graph, mr_iterative, order_by_descending_score, rank_by_norm, MrDirectSolver, MrParams,
    RankMethod, RankState, RankingError, SolverKind,
};

/// Errors from corpus construction and protocol runs.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("duplicate image id '{0}'")]
    DuplicateImageId(String),
    #[error("query '{image_id}' failed: {source}")]
    QueryFailed {
        image_id: String,
        #[source]
        source: RankingError,
    },
    #[error(transparent)]
    Ranking(#[from] RankingError),
}

/// One corpus entry: identifier, class label, descriptor vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub image_id: String,
    pub class_label: String,
    pub descriptor: Vec<f64>,
}

/// A labeled descriptor corpus with precomputed class sizes.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    items: Vec<CorpusItem>,
    class_sizes: BTreeMap<String, usize>,
}

impl LabeledCorpus {
    pub fn new(items: Vec<CorpusItem>) -> Result<Self, EvalError> {
        let mut seen = std::collections::HashSet::new();
        let mut class_sizes = BTreeMap::new();
        for item in &items {
            if !seen.insert(item.image_id.as_str()) {
                return Err(EvalError::DuplicateImageId(item.image_id.clone()));
            }
            *class_sizes.entry(item.class_label.clone()).or_insert(0) += 1;
        }
        drop(seen);
        Ok(Self { items, class_sizes })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[CorpusItem] {
        &self.items
    }

    pub fn class_sizes(&self) -> &BTreeMap<String, usize> {
        &self.class_sizes
    }

    pub fn class_size(&self, label: &str) -> usize {
        self.class_sizes.get(label).copied().unwrap_or(0)
    }

    /// Descriptor slices in corpus order, for the ranking functions.
    pub fn descriptors(&self) -> Vec<&[f64]> {
        self.items.iter().map(|i| i.descriptor.as_slice()).collect()
    }
}

/// Which summary the protocol computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Precision/recall at n returns.
    PrecisionRecall,
    /// Precision/recall plus the N-S score (same-class count in the top 4).
    NsScore,
}

/// Aggregated evaluation results. Percentages are in [0, 100].
///
/// `avg_precision`/`avg_recall` are means over all queries (the primary
/// aggregation); `class_mean_precision`/`class_mean_recall` average the
/// per-class means instead and coincide with the primary numbers when all
/// classes have equal size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: RankMethod,
    pub n_returns: usize,
    pub per_class_precision: BTreeMap<String, f64>,
    pub per_class_recall: BTreeMap<String, f64>,
    pub avg_precision: f64,
    pub avg_recall: f64,
    pub class_mean_precision: f64,
    pub class_mean_recall: f64,
    pub ns_score: Option<f64>,
}

/// Precision and recall (as fractions) of one ranking at n returns.
pub fn precision_recall_at_n(
    ranking: &[usize],
    query_label: &str,
    corpus: &LabeledCorpus,
    n: usize,
) -> Result<(f64, f64), EvalError> {
    if n == 0 || n > corpus.len() {
        return Err(EvalError::InvalidParam(format!(
            "n = {n} out of range for corpus of {}",
            corpus.len()
        )));
    }
    let relevant = ranking[..n]
        .iter()
        .filter(|&&i| corpus.items()[i].class_label == query_label)
        .count();
    let class_size = corpus.class_size(query_label);
    let precision = relevant as f64 / n as f64;
    let recall = if class_size > 0 {
        relevant as f64 / class_size as f64
    } else {
        0.0
    };
    Ok((precision, recall))
}

/// N-S score of one ranking: same-class count among the top 4 returns
/// (query included). Maximum 4.
pub fn ns_score(ranking: &[usize], query_label: &str, corpus: &LabeledCorpus) -> f64 {
    let top = ranking.len().min(4);
    ranking[..top]
        .iter()
        .filter(|&&i| corpus.items()[i].class_label == query_label)
        .count() as f64
}

/// Runs the full protocol: every item queries the corpus with the selected
/// method, per-query precision/recall at n are aggregated per class and
/// overall. Deterministic given the corpus order.
pub fn run_protocol(
    corpus: &LabeledCorpus,
    method: RankMethod,
    params: &MrParams,
    n: usize,
    protocol: Protocol,
) -> Result<EvalReport, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::InvalidParam("empty corpus".into()));
    }
    if n == 0 || n > corpus.len() {
        return Err(EvalError::InvalidParam(format!(
            "n = {n} out of range for corpus of {}",
            corpus.len()
        )));
    }
    let descriptors = corpus.descriptors();
    let len = corpus.len();

    // Queries solve independently in parallel; the first failure (by query
    // index) aborts the run, tagged with the failing image id.
    let query_failed = |(q, source): (usize, RankingError)| EvalError::QueryFailed {
        image_id: corpus.items()[q].image_id.clone(),
        source,
    };
    let rankings: Vec<Vec<usize>> = if method.is_manifold() {
        let graph = build_graph(&descriptors, params.k, params.sigma, method.metric())?;
        let direct = match params.solver.effective_kind(len) {
            SolverKind::Direct => Some(MrDirectSolver::new(&graph, params.alpha)?),
            _ => None,
        };
        let results: Vec<Result<Vec<usize>, (usize, RankingError)>> = (0..len)
            .into_par_iter()
            .map(|q| {
                let state = RankState::single_query(len, q, params.alpha)
                    .map_err(|e| (q, e))?;
                let f = match &direct {
                    Some(solver) => solver.solve(&graph, &state.y),
                    None => {
                        mr_iterative(&graph, &state, params.solver.tol, params.solver.max_iters)
                    }
                }
                .map_err(|e| (q, e))?;
                Ok(order_by_descending_score(&f))
            })
            .collect();
        results
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .map_err(query_failed)?
    } else {
        (0..len)
            .into_par_iter()
            .map(|q| rank_by_norm(&descriptors, q, method.metric()))
            .collect()
    };

    // Per-query measurements, aggregated in fixed corpus order.
    let mut per_query_precision = Vec::with_capacity(len);
    let mut per_query_recall = Vec::with_capacity(len);
    let mut per_query_ns = Vec::with_capacity(len);
    for (q, ranking) in rankings.iter().enumerate() {
        let label = corpus.items()[q].class_label.as_str();
        let (p, r) = precision_recall_at_n(ranking, label, corpus, n)?;
        per_query_precision.push(p);
        per_query_recall.push(r);
        if protocol == Protocol::NsScore {
            per_query_ns.push(ns_score(ranking, label, corpus));
        }
    }

    let mut class_p: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let mut class_r: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (q, item) in corpus.items().iter().enumerate() {
        let ep = class_p.entry(item.class_label.clone()).or_insert((0.0, 0));
        ep.0 += per_query_precision[q];
        ep.1 += 1;
        let er = class_r.entry(item.class_label.clone()).or_insert((0.0, 0));
        er.0 += per_query_recall[q];
        er.1 += 1;
    }
    let per_class_precision: BTreeMap<String, f64> = class_p
        .into_iter()
        .map(|(label, (sum, count))| (label, 100.0 * sum / count as f64))
        .collect();
    let per_class_recall: BTreeMap<String, f64> = class_r
        .into_iter()
        .map(|(label, (sum, count))| (label, 100.0 * sum / count as f64))
        .collect();

    let avg_precision = 100.0 * per_query_precision.iter().sum::<f64>() / len as f64;
    let avg_recall = 100.0 * per_query_recall.iter().sum::<f64>() / len as f64;
    let class_mean_precision =
        per_class_precision.values().sum::<f64>() / per_class_precision.len() as f64;
    let class_mean_recall =
        per_class_recall.values().sum::<f64>() / per_class_recall.len() as f64;
    let ns = if protocol == Protocol::NsScore {
        Some(per_query_ns.iter().sum::<f64>() / len as f64)
    } else {
        None
    };

    Ok(EvalReport {
        method,
        n_returns: n,
        per_class_precision,
        per_class_recall,
        avg_precision,
        avg_recall,
        class_mean_precision,
        class_mean_recall,
        ns_score: ns,
    })
}
