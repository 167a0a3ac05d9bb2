//! kNN affinity graphs and manifold ranking.
//!
//! A corpus of descriptors becomes an undirected graph whose edge weights
//! are Gaussian kernels of pairwise distance; the symmetrically normalized
//! affinity S = D^{-1/2} W D^{-1/2} drives the ranking diffusion
//! f = (I - alpha*S)^{-1} y, computed either by a dense direct solve or by
//! the fixed-point iteration f <- alpha*S*f + (1-alpha)*y. The two agree up
//! to the global factor (1-alpha); the ranking order is identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from graph construction and the ranking solvers.
#[derive(Debug, Error)]
pub enum RankingError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
}

/// Distance used both for norm ranking and for graph construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    L1,
    L2,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Ranking method selector. MR1/MR2 are manifold ranking over graphs built
/// with L1/L2 distances respectively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMethod {
    L1,
    L2,
    Mr1,
    Mr2,
}

impl RankMethod {
    pub fn metric(&self) -> Metric {
        match self {
            RankMethod::L1 | RankMethod::Mr1 => Metric::L1,
            RankMethod::L2 | RankMethod::Mr2 => Metric::L2,
        }
    }

    pub fn is_manifold(&self) -> bool {
        matches!(self, RankMethod::Mr1 | RankMethod::Mr2)
    }
}

impl std::str::FromStr for RankMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(RankMethod::L1),
            "l2" => Ok(RankMethod::L2),
            "mr1" => Ok(RankMethod::Mr1),
            "mr2" => Ok(RankMethod::Mr2),
            other => Err(format!("unknown method '{other}' (expected l1, l2, mr1, mr2)")),
        }
    }
}

impl std::fmt::Display for RankMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RankMethod::L1 => "l1",
            RankMethod::L2 => "l2",
            RankMethod::Mr1 => "mr1",
            RankMethod::Mr2 => "mr2",
        };
        f.write_str(s)
    }
}

/// Solver selection for the manifold ranking system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// Direct for n <= direct_limit, iterative above.
    Auto,
    Direct,
    Iterative,
}

/// Solver configuration with the documented defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub tol: f64,
    pub max_iters: usize,
    pub direct_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kind: SolverKind::Auto,
            tol: 1e-10,
            max_iters: 5000,
            direct_limit: 2000,
        }
    }
}

impl SolverConfig {
    pub fn effective_kind(&self, n: usize) -> SolverKind {
        match self.kind {
            SolverKind::Auto => {
                if n <= self.direct_limit {
                    SolverKind::Direct
                } else {
                    SolverKind::Iterative
                }
            }
            k => k,
        }
    }
}

/// Graph construction and diffusion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrParams {
    pub k: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub solver: SolverConfig,
}

impl Default for MrParams {
    fn default() -> Self {
        Self {
            k: 8,
            sigma: 2.0,
            alpha: 0.95,
            solver: SolverConfig::default(),
        }
    }
}

/// A sparse symmetric affinity graph over a descriptor corpus.
///
/// `affinity` stores W (zero diagonal, every stored weight in (0,1]);
/// `normalized` stores S = D^{-1/2} W D^{-1/2}, with rows and columns of
/// zero-degree nodes left empty.
#[derive(Debug, Clone)]
pub struct RankGraph {
    n: usize,
    k: usize,
    sigma: f64,
    affinity: Vec<Vec<(u32, f64)>>,
    normalized: Vec<Vec<(u32, f64)>>,
    degrees: Vec<f64>,
}

impl RankGraph {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Effective neighborhood size after clamping to n-1.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Row i of W as (column, weight) pairs sorted by column.
    pub fn affinity_row(&self, i: usize) -> &[(u32, f64)] {
        &self.affinity[i]
    }

    /// Row i of S as (column, weight) pairs sorted by column.
    pub fn normalized_row(&self, i: usize) -> &[(u32, f64)] {
        &self.normalized[i]
    }

    /// y = S x.
    pub fn normalized_matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (i, row) in self.normalized.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, s) in row {
                acc += s * x[j as usize];
            }
            out[i] = acc;
        }
    }
}

/// Initial scores for a single in-corpus query: 1 at the query, 0 elsewhere.
#[derive(Debug, Clone)]
pub struct RankState {
    pub y: Vec<f64>,
    pub alpha: f64,
}

impl RankState {
    pub fn single_query(n: usize, query: usize, alpha: f64) -> Result<Self, RankingError> {
        if query >= n {
            return Err(RankingError::InvalidParam(format!(
                "query index {query} out of range for corpus of {n}"
            )));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(RankingError::InvalidParam(format!(
                "alpha must be in [0,1), got {alpha}"
            )));
        }
        let mut y = vec![0.0; n];
        y[query] = 1.0;
        Ok(Self { y, alpha })
    }
}

/// Builds the kNN affinity graph.
///
/// An undirected edge (i, j) exists when either endpoint lists the other
/// among its k nearest neighbors; its weight is exp(-d^2 / (2 sigma^2)).
/// k is clamped to n-1 when the corpus is smaller than requested.
pub fn build_graph<D: AsRef<[f64]> + Sync>(
    descriptors: &[D],
    k: usize,
    sigma: f64,
    metric: Metric,
) -> Result<RankGraph, RankingError> {
    let n = descriptors.len();
    if n == 0 {
        return Err(RankingError::InvalidParam("empty corpus".into()));
    }
    if k == 0 {
        return Err(RankingError::InvalidParam("k must be at least 1".into()));
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(RankingError::InvalidParam(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let dim = descriptors[0].as_ref().len();
    for (i, d) in descriptors.iter().enumerate() {
        let d = d.as_ref();
        if d.len() != dim {
            return Err(RankingError::InvalidParam(format!(
                "descriptor {i} has dimension {} but descriptor 0 has {dim}",
                d.len()
            )));
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(RankingError::InvalidParam(format!(
                "descriptor {i} contains a non-finite value"
            )));
        }
    }

    if n == 1 {
        // A single node has no possible neighbors: empty graph.
        return Ok(RankGraph {
            n,
            k: 0,
            sigma,
            affinity: vec![Vec::new()],
            normalized: vec![Vec::new()],
            degrees: vec![0.0],
        });
    }

    let k_eff = k.min(n - 1);
    if k_eff < k {
        log::warn!("k = {k} exceeds corpus size {n}; clamped to {k_eff}");
    }

    // Exact kNN lists, ties broken by ascending index.
    let neighbor_lists: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let di = descriptors[i].as_ref();
            let mut candidates: Vec<(f64, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (metric.distance(di, descriptors[j].as_ref()), j as u32))
                .collect();
            candidates.select_nth_unstable_by(k_eff - 1, |a, b| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
            });
            candidates.truncate(k_eff);
            candidates.into_iter().map(|(_, j)| j).collect()
        })
        .collect();

    // OR-symmetrization: collect undirected edges once.
    let mut edge_sets: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, list) in neighbor_lists.iter().enumerate() {
        for &j in list {
            let (a, b) = if (i as u32) < j { (i as u32, j) } else { (j, i as u32) };
            edge_sets[a as usize].push(b);
        }
    }
    for set in &mut edge_sets {
        set.sort_unstable();
        set.dedup();
    }

    let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    let mut affinity: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for (a, set) in edge_sets.iter().enumerate() {
        for &b in set {
            let d = metric.distance(descriptors[a].as_ref(), descriptors[b as usize].as_ref());
            let w = (-d * d * inv_two_sigma_sq).exp();
            if w > 0.0 {
                affinity[a].push((b, w));
                affinity[b as usize].push((a as u32, w));
            }
        }
    }
    for row in &mut affinity {
        row.sort_unstable_by_key(|&(j, _)| j);
    }

    let degrees: Vec<f64> = affinity
        .iter()
        .map(|row| row.iter().map(|&(_, w)| w).sum())
        .collect();
    let inv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();

    let normalized: Vec<Vec<(u32, f64)>> = affinity
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .map(|&(j, w)| (j, w * (inv_sqrt[i] * inv_sqrt[j as usize])))
                .collect()
        })
        .collect();

    Ok(RankGraph {
        n,
        k: k_eff,
        sigma,
        affinity,
        normalized,
        degrees,
    })
}

/// Dense LU factorization with partial pivoting, for the direct solver.
#[derive(Debug, Clone)]
pub(crate) struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub(crate) fn factor(mut a: Vec<f64>, n: usize) -> Result<Self, RankingError> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut pivot_row = col;
            let mut pivot_val = a[col * n + col].abs();
            for row in col + 1..n {
                let v = a[row * n + col].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = row;
                }
            }
            if pivot_val == 0.0 {
                return Err(RankingError::NumericalFailure(format!(
                    "singular matrix at column {col}"
                )));
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = a[col * n + col];
            for row in col + 1..n {
                let factor = a[row * n + col] / pivot;
                a[row * n + col] = factor;
                if factor != 0.0 {
                    for j in col + 1..n {
                        a[row * n + j] -= factor * a[col * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    #[allow(clippy::needless_range_loop)] // flat-matrix indexing
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }
}

/// A pre-factored direct solver for (I - alpha*S) f = y. Factor once, solve
/// for many query vectors.
#[derive(Debug, Clone)]
pub struct MrDirectSolver {
    alpha: f64,
    lu: LuFactors,
}

/// Largest acceptable residual max|(I - alpha*S) f - y| for a direct solve.
pub const DIRECT_RESIDUAL_LIMIT: f64 = 1e-8;

impl MrDirectSolver {
    pub fn new(graph: &RankGraph, alpha: f64) -> Result<Self, RankingError> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(RankingError::InvalidParam(format!(
                "alpha must be in [0,1), got {alpha}"
            )));
        }
        let n = graph.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
            for &(j, s) in graph.normalized_row(i) {
                a[i * n + j as usize] -= alpha * s;
            }
        }
        Ok(Self {
            alpha,
            lu: LuFactors::factor(a, n)?,
        })
    }

    /// Solves for one right-hand side and verifies the residual.
    pub fn solve(&self, graph: &RankGraph, y: &[f64]) -> Result<Vec<f64>, RankingError> {
        let f = self.lu.solve(y);
        let mut sf = vec![0.0; graph.len()];
        graph.normalized_matvec(&f, &mut sf);
        let mut residual = 0.0f64;
        for i in 0..graph.len() {
            residual = residual.max((f[i] - self.alpha * sf[i] - y[i]).abs());
        }
        if residual > DIRECT_RESIDUAL_LIMIT {
            return Err(RankingError::NumericalFailure(format!(
                "direct solve residual {residual:.3e} exceeds {DIRECT_RESIDUAL_LIMIT:.1e}"
            )));
        }
        Ok(f)
    }
}

/// Direct solution of (I - alpha*S) f = y.
pub fn mr_closed_form(graph: &RankGraph, state: &RankState) -> Result<Vec<f64>, RankingError> {
    if state.y.len() != graph.len() {
        return Err(RankingError::InvalidParam(format!(
            "state length {} does not match graph size {}",
            state.y.len(),
            graph.len()
        )));
    }
    MrDirectSolver::new(graph, state.alpha)?.solve(graph, &state.y)
}

/// Fixed-point iteration f <- alpha*S*f + (1-alpha)*y from f = y, stopping
/// when the max-norm step falls below `tol`.
///
/// The fixed point is (1-alpha) times the closed-form solution; the ranking
/// order is the same.
pub fn mr_iterative(
    graph: &RankGraph,
    state: &RankState,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>, RankingError> {
    if state.y.len() != graph.len() {
        return Err(RankingError::InvalidParam(format!(
            "state length {} does not match graph size {}",
            state.y.len(),
            graph.len()
        )));
    }
    if !(0.0..1.0).contains(&state.alpha) {
        return Err(RankingError::InvalidParam(format!(
            "alpha must be in [0,1), got {}",
            state.alpha
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(RankingError::InvalidParam(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let n = graph.len();
    let alpha = state.alpha;
    let one_minus = 1.0 - alpha;
    let mut f = state.y.clone();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        graph.normalized_matvec(&f, &mut next);
        for (value, &y) in next.iter_mut().zip(&state.y) {
            *value = alpha * *value + one_minus * y;
        }
        residual = f
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut f, &mut next);
        if residual < tol {
            return Ok(f);
        }
    }
    Err(RankingError::ConvergenceFailure {
        iterations: max_iters,
        residual,
    })
}

/// Orders corpus indices by ascending distance to the query descriptor.
/// Ties break toward the query itself, then by ascending index, so the
/// query ranks first even when exact duplicates exist.
pub fn rank_by_norm<D: AsRef<[f64]> + Sync>(
    descriptors: &[D],
    query: usize,
    metric: Metric,
) -> Vec<usize> {
    assert!(query < descriptors.len());
    let q = descriptors[query].as_ref();
    let distances: Vec<f64> = descriptors
        .iter()
        .map(|d| metric.distance(q, d.as_ref()))
        .collect();
    let mut order: Vec<usize> = (0..descriptors.len()).collect();
    order.sort_by(|&a, &b| {
        distances[a]
            .total_cmp(&distances[b])
            .then((a != query).cmp(&(b != query)))
            .then(a.cmp(&b))
    });
    order
}

/// Orders indices by descending score, ties by ascending index.
pub fn order_by_descending_score(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Ranks the corpus by manifold ranking scores for an in-corpus query.
pub fn rank_by_manifold(
    graph: &RankGraph,
    query: usize,
    alpha: f64,
    config: &SolverConfig,
) -> Result<Vec<usize>, RankingError> {
    let state = RankState::single_query(graph.len(), query, alpha)?;
    let f = match config.effective_kind(graph.len()) {
        SolverKind::Direct => mr_closed_form(graph, &state)?,
        _ => mr_iterative(graph, &state, config.tol, config.max_iters)?,
    };
    if f.iter().any(|v| !v.is_finite()) {
        return Err(RankingError::NumericalFailure(
            "non-finite ranking score".into(),
        ));
    }
    Ok(order_by_descending_score(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_corpus(rng: &mut StdRng, n: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect()
    }

    #[test]
    fn single_node_graph_is_empty() {
        let graph = build_graph(&[vec![1.0, 2.0]], 8, 2.0, Metric::L1).unwrap();
        assert_eq!(graph.len(), 1);
        assert!(graph.affinity_row(0).is_empty());
        assert_eq!(graph.degrees(), &[0.0]);
        let state = RankState::single_query(1, 0, 0.5).unwrap();
        assert_eq!(mr_closed_form(&graph, &state).unwrap(), vec![1.0]);
    }

    #[test]
    fn two_node_graph_normalizes_to_one() {
        let descs = vec![vec![0.0], vec![1.5]];
        let graph = build_graph(&descs, 1, 2.0, Metric::L2).unwrap();
        let w = (-1.5f64 * 1.5 / 8.0).exp();
        assert_eq!(graph.affinity_row(0), &[(1, w)]);
        assert_eq!(graph.affinity_row(1), &[(0, w)]);
        let s = graph.normalized_row(0)[0].1;
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_corpus_with_k1_gets_two_edges() {
        // Middle point neighbors its closer endpoint; OR-symmetrization
        // keeps both endpoint->middle edges.
        let descs = vec![vec![0.0], vec![1.0], vec![3.0]];
        let graph = build_graph(&descs, 1, 2.0, Metric::L1).unwrap();
        let edges: usize = (0..3).map(|i| graph.affinity_row(i).len()).sum();
        assert_eq!(edges, 4); // 2 undirected edges
        assert_eq!(graph.affinity_row(0).len(), 1);
        assert_eq!(graph.affinity_row(1).len(), 2);
        assert_eq!(graph.affinity_row(2).len(), 1);
    }

    #[test]
    fn k_clamps_to_corpus_size() {
        let mut rng = StdRng::seed_from_u64(1);
        let descs = random_corpus(&mut rng, 4, 3);
        let graph = build_graph(&descs, 100, 2.0, Metric::L1).unwrap();
        assert_eq!(graph.k(), 3);
    }

    #[test]
    fn invalid_params_rejected() {
        let descs = vec![vec![0.0], vec![1.0]];
        assert!(build_graph(&descs, 0, 2.0, Metric::L1).is_err());
        assert!(build_graph(&descs, 1, 0.0, Metric::L1).is_err());
        assert!(build_graph::<Vec<f64>>(&[], 1, 1.0, Metric::L1).is_err());
        let bad = vec![vec![0.0], vec![f64::NAN]];
        assert!(build_graph(&bad, 1, 1.0, Metric::L1).is_err());
    }

    #[test]
    fn affinity_is_exactly_symmetric() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..5 {
            let descs = random_corpus(&mut rng, 40, 6);
            let graph = build_graph(&descs, 5, 2.0, Metric::L2).unwrap();
            for i in 0..40 {
                for &(j, w) in graph.affinity_row(i) {
                    let back = graph
                        .affinity_row(j as usize)
                        .iter()
                        .find(|&&(jj, _)| jj as usize == i)
                        .expect("missing symmetric edge");
                    assert_eq!(w.to_bits(), back.1.to_bits());
                    assert!(w > 0.0 && w <= 1.0);
                }
                // No self-loops.
                assert!(graph.affinity_row(i).iter().all(|&(j, _)| j as usize != i));
            }
        }
    }

    #[test]
    fn normalized_spectral_radius_at_most_one() {
        let mut rng = StdRng::seed_from_u64(3);
        let descs = random_corpus(&mut rng, 40, 4);
        let graph = build_graph(&descs, 8, 2.0, Metric::L1).unwrap();
        // Power iteration on S.
        let mut v: Vec<f64> = (0..40).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut next = vec![0.0; 40];
        let mut radius = 0.0;
        for _ in 0..200 {
            graph.normalized_matvec(&v, &mut next);
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            radius = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (a, b) in v.iter_mut().zip(&next) {
                *a = b / norm;
            }
        }
        assert!(radius <= 1.0 + 1e-9, "spectral radius {radius}");
    }

    #[test]
    fn closed_form_two_node_solution() {
        let descs = vec![vec![0.0], vec![1.0]];
        let graph = build_graph(&descs, 1, 2.0, Metric::L1).unwrap();
        for &alpha in &[0.0, 0.5, 0.95] {
            let state = RankState::single_query(2, 0, alpha).unwrap();
            let f = mr_closed_form(&graph, &state).unwrap();
            let scale = 1.0 / (1.0 - alpha * alpha);
            assert!((f[0] - scale).abs() < 1e-12);
            assert!((f[1] - scale * alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn iterative_two_node_limit() {
        let descs = vec![vec![0.0], vec![1.0]];
        let graph = build_graph(&descs, 1, 2.0, Metric::L1).unwrap();
        let state = RankState::single_query(2, 0, 0.5).unwrap();
        let f = mr_iterative(&graph, &state, 1e-12, 5000).unwrap();
        // Limit is (1/(1+alpha)) * (1, alpha).
        assert!((f[0] - 1.0 / 1.5).abs() < 1e-10);
        assert!((f[1] - 0.5 / 1.5).abs() < 1e-10);
    }

    #[test]
    fn alpha_zero_returns_initial_scores() {
        let mut rng = StdRng::seed_from_u64(4);
        let descs = random_corpus(&mut rng, 10, 3);
        let graph = build_graph(&descs, 3, 2.0, Metric::L1).unwrap();
        let state = RankState::single_query(10, 4, 0.0).unwrap();
        assert_eq!(mr_closed_form(&graph, &state).unwrap(), state.y);
        assert_eq!(mr_iterative(&graph, &state, 1e-10, 10).unwrap(), state.y);
        let order = rank_by_manifold(&graph, 4, 0.0, &SolverConfig::default()).unwrap();
        assert_eq!(order[0], 4);
        // Remaining ties resolve by ascending index.
        let rest: Vec<usize> = order[1..].to_vec();
        assert_eq!(rest, vec![0, 1, 2, 3, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn convergence_failure_reported() {
        let descs = vec![vec![0.0], vec![1.0]];
        let graph = build_graph(&descs, 1, 2.0, Metric::L1).unwrap();
        let state = RankState::single_query(2, 0, 0.95).unwrap();
        let err = mr_iterative(&graph, &state, 1e-14, 3).unwrap_err();
        assert!(matches!(err, RankingError::ConvergenceFailure { .. }));
    }

    #[test]
    fn disconnected_component_keeps_zero_score() {
        // Two far clusters; with k=1 each stays internal.
        let descs = vec![vec![0.0], vec![0.1], vec![100.0], vec![100.1]];
        let graph = build_graph(&descs, 1, 2.0, Metric::L1).unwrap();
        let state = RankState::single_query(4, 0, 0.9).unwrap();
        let f_closed = mr_closed_form(&graph, &state).unwrap();
        let f_iter = mr_iterative(&graph, &state, 1e-12, 5000).unwrap();
        assert_eq!(f_closed[2], 0.0);
        assert_eq!(f_closed[3], 0.0);
        assert_eq!(f_iter[2], 0.0);
        assert_eq!(f_iter[3], 0.0);
        assert!(f_closed[0] > 0.0 && f_closed[1] > 0.0);
    }

    #[test]
    fn iterative_error_contracts_by_alpha() {
        // In the 2-norm the iteration error shrinks at least by alpha per
        // step (S is symmetric with spectral radius <= 1).
        let mut rng = StdRng::seed_from_u64(5);
        let descs = random_corpus(&mut rng, 60, 5);
        let graph = build_graph(&descs, 8, 2.0, Metric::L2).unwrap();
        let alpha = 0.9;
        let state = RankState::single_query(60, 7, alpha).unwrap();
        let limit = {
            let f = mr_closed_form(&graph, &state).unwrap();
            f.iter().map(|v| v * (1.0 - alpha)).collect::<Vec<f64>>()
        };
        let err2 = |f: &[f64]| -> f64 {
            f.iter()
                .zip(&limit)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let mut f = state.y.clone();
        let mut next = vec![0.0; 60];
        let mut prev_err = err2(&f);
        for step in 0..30 {
            graph.normalized_matvec(&f, &mut next);
            for (value, &y) in next.iter_mut().zip(&state.y) {
                *value = alpha * *value + (1.0 - alpha) * y;
            }
            std::mem::swap(&mut f, &mut next);
            if step % 10 == 9 {
                let err = err2(&f);
                assert!(
                    err <= alpha.powi(10) * prev_err * (1.0 + 1e-6),
                    "step {step}: {err} vs {prev_err}"
                );
                prev_err = err;
            }
        }
    }

    #[test]
    fn damping_to_zero_approaches_initial_scores() {
        let mut rng = StdRng::seed_from_u64(6);
        let descs = random_corpus(&mut rng, 30, 4);
        let graph = build_graph(&descs, 4, 2.0, Metric::L1).unwrap();
        let mut last = f64::INFINITY;
        for &alpha in &[0.5, 0.1, 0.01] {
            let state = RankState::single_query(30, 3, alpha).unwrap();
            let f = mr_closed_form(&graph, &state).unwrap();
            let dev = f
                .iter()
                .zip(&state.y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 0.05);
    }

    #[test]
    fn norm_ranking_orders_and_breaks_ties() {
        let descs = vec![vec![0.0], vec![1.0], vec![3.0]];
        assert_eq!(rank_by_norm(&descs, 0, Metric::L1), vec![0, 1, 2]);

        // L1 and L2 disagree: from (0,0), L1 prefers (3,0) (3 < 4) while
        // L2 prefers (2,2) (sqrt(8) < 3).
        let descs = vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![2.0, 2.0]];
        assert_eq!(rank_by_norm(&descs, 0, Metric::L1), vec![0, 1, 2]);
        assert_eq!(rank_by_norm(&descs, 0, Metric::L2), vec![0, 2, 1]);

        // An exact duplicate ranks second, never first.
        let descs = vec![vec![7.0], vec![9.0], vec![7.0]];
        assert_eq!(rank_by_norm(&descs, 2, Metric::L2)[0], 2);
        assert_eq!(rank_by_norm(&descs, 2, Metric::L2)[1], 0);
        assert_eq!(rank_by_norm(&descs, 0, Metric::L2), vec![0, 2, 1]);
    }

    #[test]
    fn manifold_ranking_two_nodes() {
        let descs = vec![vec![0.0], vec![1.0]];
        let graph = build_graph(&descs, 1, 2.0, Metric::L1).unwrap();
        let state = RankState::single_query(2, 0, 0.5).unwrap();
        let f = mr_closed_form(&graph, &state).unwrap();
        assert!((f[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((f[1] - 2.0 / 3.0).abs() < 1e-12);
        let order = rank_by_manifold(&graph, 0, 0.5, &SolverConfig::default()).unwrap();
        assert_eq!(order, vec![0, 1]);
    }
}
