use std::cmp::Ordering;

use super::{CandidateEdge, PairingPlan};
use crate::error::{Error, Result};

/// Largest candidate set the exhaustive solver accepts by default.
pub const DEFAULT_EXACT_MAX_EDGES: usize = 24;

fn vertex_count(edges: &[CandidateEdge]) -> usize {
    edges.iter().map(|e| e.j.max(e.i) + 1).max().unwrap_or(0)
}

/// Descending weight, then ascending `(i, j)`.
fn greedy_order(a: &CandidateEdge, b: &CandidateEdge) -> Ordering {
    b.weight.total_cmp(&a.weight).then_with(|| a.key().cmp(&b.key()))
}

/// Greedy b-matching: scan edges heaviest first and accept an edge whenever
/// both endpoints still have spare degree. The result is maximal by
/// inclusion and within a factor two of the optimum.
pub fn select_subgraph_greedy(edges: &[CandidateEdge], b: usize) -> PairingPlan {
    greedy_fill(Vec::new(), edges, b)
}

/// Greedy pass on top of a pre-selected `seed` whose degrees already fit the
/// budget.
pub(super) fn greedy_fill(seed: Vec<CandidateEdge>, rest: &[CandidateEdge], b: usize) -> PairingPlan {
    let n = vertex_count(&seed).max(vertex_count(rest));
    let mut degree = vec![0usize; n];
    for e in &seed {
        degree[e.i] += 1;
        degree[e.j] += 1;
    }
    debug_assert!(degree.iter().all(|&d| d <= b), "seed exceeds degree budget");

    let mut order: Vec<&CandidateEdge> = rest.iter().collect();
    order.sort_by(|a, b| greedy_order(a, b));

    let mut selected = seed;
    for e in order {
        if e.i != e.j && degree[e.i] < b && degree[e.j] < b {
            degree[e.i] += 1;
            degree[e.j] += 1;
            selected.push(*e);
        }
    }
    PairingPlan::from_edges(selected)
}

/// Exhaustive maximum-weight b-matching for small candidate sets.
///
/// Among optimal edge sets the lexicographically smallest one (as a sorted
/// sequence of `(i, j)` keys) wins; totals are summed in canonical order so
/// ties are exact comparisons.
pub fn select_subgraph_exact(edges: &[CandidateEdge], b: usize, max_edges: usize) -> Result<PairingPlan> {
    if edges.len() > max_edges {
        return Err(Error::Capacity {
            what: "candidate edge set",
            actual: edges.len(),
            limit: max_edges,
        });
    }
    let mut sorted = edges.to_vec();
    sorted.sort_by_key(CandidateEdge::key);

    // suffix[k]: sum of the positive weights from k on, an upper bound on
    // what the remaining edges can add.
    let mut suffix = vec![0.0; sorted.len() + 1];
    for k in (0..sorted.len()).rev() {
        suffix[k] = suffix[k + 1] + sorted[k].weight.max(0.0);
    }

    let mut search = Search {
        edges: &sorted,
        suffix: &suffix,
        b,
        degree: vec![0; vertex_count(&sorted)],
        chosen: Vec::with_capacity(sorted.len()),
        best: Vec::new(),
        best_weight: 0.0,
    };
    search.visit(0, 0.0);

    let picked = search.best.iter().map(|&k| sorted[k]).collect();
    Ok(PairingPlan::from_edges(picked))
}

struct Search<'a> {
    edges: &'a [CandidateEdge],
    suffix: &'a [f64],
    b: usize,
    degree: Vec<usize>,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_weight: f64,
}

impl Search<'_> {
    fn visit(&mut self, k: usize, weight: f64) {
        // Bound with slack: only prune branches that cannot even tie.
        let slack = 1e-9 * (1.0 + self.best_weight.abs());
        if weight + self.suffix[k] + slack < self.best_weight {
            return;
        }
        if k == self.edges.len() {
            let better = weight > self.best_weight || (weight == self.best_weight && self.chosen < self.best);
            if better {
                self.best_weight = weight;
                self.best.clone_from(&self.chosen);
            }
            return;
        }
        let e = self.edges[k];
        if e.i != e.j && self.degree[e.i] < self.b && self.degree[e.j] < self.b {
            self.degree[e.i] += 1;
            self.degree[e.j] += 1;
            self.chosen.push(k);
            self.visit(k + 1, weight + e.weight);
            self.chosen.pop();
            self.degree[e.i] -= 1;
            self.degree[e.j] -= 1;
        }
        self.visit(k + 1, weight);
    }
}
