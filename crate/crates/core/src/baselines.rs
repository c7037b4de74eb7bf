//! Reference pairing strategies: complete graph, one reference view, cosine
//! similarity of image descriptors, and a sequential window.
//!
//! Every strategy returns directed `(source, target)` pairs without
//! self-pairs or duplicates.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Image descriptor tagged with the view it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub source_view: usize,
}

impl FeatureVector {
    pub fn new(source_view: usize, values: Vec<f64>) -> Self {
        Self { values, source_view }
    }
}

/// Every ordered pair `(i, j)` with `i != j`, in lexicographic order.
pub fn complete_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// Default reference view: the middle of the capture sweep.
pub fn default_reference(n: usize) -> usize {
    n / 2
}

/// Star around `reference`: `(reference, j)` and `(j, reference)` for every
/// other view.
pub fn oneref_pairs(n: usize, reference: usize) -> Result<Vec<(usize, usize)>> {
    if reference >= n {
        return input(format!("reference view {reference} out of range for {n} views"));
    }
    Ok((0..n)
        .filter(|&j| j != reference)
        .flat_map(|j| [(reference, j), (j, reference)])
        .collect())
}

/// Both directions of every pair at most `window` apart in index order,
/// without wrap-around.
pub fn window_pairs(n: usize, window: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n.min(i.saturating_add(window).saturating_add(1))).map(move |j| (i, j)))
        .flat_map(|(i, j)| [(i, j), (j, i)])
        .collect()
}

fn cosine(a: &[f64], a_norm: f64, b: &[f64], b_norm: f64) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (a_norm * b_norm)).clamp(-1.0, 1.0)
}

/// Links each view to its `k_nearest` most similar views (cosine similarity
/// of descriptors, at least `sim_min`). Links are merged as undirected edges
/// keyed by `source_view` and expanded to both directions.
///
/// Ties in similarity go to the smaller view label.
pub fn cosine_pairs(features: &[FeatureVector], k_nearest: usize, sim_min: f64) -> Result<Vec<(usize, usize)>> {
    if features.len() < 2 {
        return input(format!("cosine pairing needs at least 2 views, got {}", features.len()));
    }
    if !(-1.0..=1.0).contains(&sim_min) {
        return input(format!("sim_min must lie in [-1, 1], got {sim_min}"));
    }
    let dim = features[0].values.len();
    let mut labels = BTreeSet::new();
    let mut norms = Vec::with_capacity(features.len());
    for f in features {
        if f.values.len() != dim {
            return input(format!(
                "descriptor of view {} has length {}, expected {dim}",
                f.source_view,
                f.values.len()
            ));
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return input(format!("descriptor of view {} has non-finite entries", f.source_view));
        }
        let norm = f.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return input(format!(
                "descriptor of view {} is the zero vector; cosine similarity is undefined",
                f.source_view
            ));
        }
        if !labels.insert(f.source_view) {
            return input(format!("duplicate source view {}", f.source_view));
        }
        norms.push(norm);
    }

    let mut edges = BTreeSet::new();
    for (a, fa) in features.iter().enumerate() {
        let mut scored: Vec<(f64, usize)> = features
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != a)
            .map(|(b, fb)| (cosine(&fa.values, norms[a], &fb.values, norms[b]), fb.source_view))
            .filter(|&(s, _)| s >= sim_min)
            .collect();
        scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for &(_, other) in scored.iter().take(k_nearest) {
            let me = fa.source_view;
            edges.insert((me.min(other), me.max(other)));
        }
    }
    Ok(edges.into_iter().flat_map(|(i, j)| [(i, j), (j, i)]).collect())
}

/// Affine memory model: `base_mb + per_pair_mb * pair_count`.
pub fn estimate_inference_cost(pair_count: usize, per_pair_mb: f64, base_mb: f64) -> f64 {
    base_mb + per_pair_mb * pair_count as f64
}
