//! Geometry-aware pairing on a cycle of views.
//!
//! Views are indexed in capture order and placed on the cycle graph `C_n`.
//! A small set of offsets proposes chords `{i, i + k mod n}`; every chord is
//! scored from its wrap-around distance through a monotone decay and a
//! per-range affine map, weak chords are dropped, and a degree-bounded
//! high-weight subgraph (a b-matching) is kept as the pair plan.

mod export;
mod select;

use std::collections::BTreeSet;

use petgraph::algo::connected_components;
use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

pub use export::{to_dot, PlanDocument};
pub use select::{select_subgraph_exact, select_subgraph_greedy, DEFAULT_EXACT_MAX_EDGES};

/// Coarse distance bucket of a candidate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeClass {
    Local,
    Medium,
    Long,
}

impl RangeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RangeClass::Local => "local",
            RangeClass::Medium => "medium",
            RangeClass::Long => "long",
        }
    }
}

/// One real value per [`RangeClass`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerRange {
    pub local: f64,
    pub medium: f64,
    pub long: f64,
}

impl PerRange {
    pub const fn new(local: f64, medium: f64, long: f64) -> Self {
        Self { local, medium, long }
    }

    pub fn get(&self, range: RangeClass) -> f64 {
        match range {
            RangeClass::Local => self.local,
            RangeClass::Medium => self.medium,
            RangeClass::Long => self.long,
        }
    }

    fn all_finite(&self) -> bool {
        self.local.is_finite() && self.medium.is_finite() && self.long.is_finite()
    }
}

/// Shape of the overlap surrogate. Both variants equal 1 for `d <= 1` and
/// decrease monotonically afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decay {
    /// `exp(-max(d - 1, 0) / tau)`
    #[default]
    Exp,
    /// `1 / (1 + max(d - 1, 0) / tau)`
    Inverse,
}

impl Decay {
    /// Evaluates the decay; `tau` must already be validated as positive.
    pub fn eval(self, d: usize, tau: f64) -> f64 {
        let excess = d.saturating_sub(1) as f64 / tau;
        match self {
            Decay::Exp => (-excess).exp(),
            Decay::Inverse => 1.0 / (1.0 + excess),
        }
    }
}

/// Parameters of the edge-importance model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportanceParams {
    #[serde(default)]
    pub decay: Decay,
    pub tau: f64,
    pub alpha: PerRange,
    pub beta: PerRange,
    pub w_min: f64,
    pub local_max: usize,
    pub medium_max: usize,
}

pub const DEFAULT_TAU: f64 = 2.0;
pub const DEFAULT_ALPHA: PerRange = PerRange::new(1.0, 0.7, 0.4);
pub const DEFAULT_BETA: PerRange = PerRange::new(0.0, 0.0, 0.0);
pub const DEFAULT_LOCAL_MAX: usize = 2;
pub const DEFAULT_W_MIN: f64 = 0.05;
pub const DEFAULT_DEGREE_BUDGET: usize = 4;

impl ImportanceParams {
    /// Default parameters for a cycle of `n` views.
    ///
    /// `medium_max` is `ceil(n / 4)`, raised to `local_max + 1` so the medium
    /// class is never empty by construction.
    pub fn for_views(n: usize) -> Self {
        Self {
            decay: Decay::Exp,
            tau: DEFAULT_TAU,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            w_min: DEFAULT_W_MIN,
            local_max: DEFAULT_LOCAL_MAX,
            medium_max: n.div_ceil(4).max(DEFAULT_LOCAL_MAX + 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return input(format!("tau must be positive and finite, got {}", self.tau));
        }
        if !(self.w_min >= 0.0 && self.w_min.is_finite()) {
            return input(format!("w_min must be non-negative, got {}", self.w_min));
        }
        if !self.alpha.all_finite() || !self.beta.all_finite() {
            return input("alpha and beta must be finite");
        }
        if self.local_max == 0 {
            return input("local_max must be at least 1");
        }
        if self.local_max >= self.medium_max {
            return input(format!(
                "local_max ({}) must be smaller than medium_max ({})",
                self.local_max, self.medium_max
            ));
        }
        Ok(())
    }
}

/// Powers of two up to `floor(n / 2)`.
pub fn default_offsets(n: usize) -> Vec<usize> {
    let half = n / 2;
    std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|&k| k <= half.max(1))
        .collect()
}

/// A validated GAPS instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingProblem {
    n: usize,
    offsets: Vec<usize>,
    params: ImportanceParams,
    degree_budget: usize,
    keep_ring: bool,
}

impl PairingProblem {
    /// Offsets are sorted and deduplicated; each must lie in `1..=n/2`.
    pub fn new(
        n: usize,
        offsets: impl IntoIterator<Item = usize>,
        params: ImportanceParams,
        degree_budget: usize,
    ) -> Result<Self> {
        if n < 2 {
            return input(format!("at least 2 views are required, got {n}"));
        }
        let offsets: Vec<usize> = offsets.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if offsets.is_empty() {
            return input("offset set is empty");
        }
        if let Some(&bad) = offsets.iter().find(|&&k| k == 0 || k > n / 2) {
            return input(format!("offset {bad} outside 1..={} for {n} views", n / 2));
        }
        if degree_budget == 0 {
            return input("degree budget must be at least 1");
        }
        params.validate()?;
        Ok(Self {
            n,
            offsets,
            params,
            degree_budget,
            keep_ring: true,
        })
    }

    /// Problem with every parameter at its default.
    pub fn with_defaults(n: usize) -> Result<Self> {
        Self::new(
            n,
            default_offsets(n),
            ImportanceParams::for_views(n),
            DEFAULT_DEGREE_BUDGET,
        )
    }

    pub fn keep_ring(mut self, keep_ring: bool) -> Self {
        self.keep_ring = keep_ring;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn params(&self) -> &ImportanceParams {
        &self.params
    }

    pub fn degree_budget(&self) -> usize {
        self.degree_budget
    }

    pub fn keeps_ring(&self) -> bool {
        self.keep_ring
    }
}

/// Undirected weighted pair, canonicalized so that `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateEdge {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "d")]
    pub distance: usize,
    pub range: RangeClass,
    #[serde(rename = "w")]
    pub weight: f64,
}

impl CandidateEdge {
    pub fn key(&self) -> (usize, usize) {
        (self.i, self.j)
    }
}

/// Wrap-around index distance on `C_n`.
pub fn circular_distance(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= n || j >= n {
        return input(format!("view index ({i}, {j}) out of range for {n} views"));
    }
    let diff = i.abs_diff(j);
    Ok(diff.min(n - diff))
}

/// `exp(-max(d - 1, 0) / tau)`.
pub fn decay_phi(d: usize, tau: f64) -> Result<f64> {
    if tau.is_nan() || tau <= 0.0 {
        return input(format!("tau must be positive, got {tau}"));
    }
    Ok(Decay::Exp.eval(d, tau))
}

pub fn classify_range(d: usize, params: &ImportanceParams) -> RangeClass {
    if d <= params.local_max {
        RangeClass::Local
    } else if d <= params.medium_max {
        RangeClass::Medium
    } else {
        RangeClass::Long
    }
}

/// `alpha_r * phi(d) + beta_r`, clamped below at zero.
pub fn edge_importance(d: usize, params: &ImportanceParams) -> f64 {
    let range = classify_range(d, params);
    let phi = params.decay.eval(d, params.tau);
    (params.alpha.get(range) * phi + params.beta.get(range)).max(0.0)
}

fn score_edge(a: usize, b: usize, n: usize, params: &ImportanceParams) -> CandidateEdge {
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    let diff = j - i;
    let distance = diff.min(n - diff);
    CandidateEdge {
        i,
        j,
        distance,
        range: classify_range(distance, params),
        weight: edge_importance(distance, params),
    }
}

/// Union over the offsets of the `k`-chords of the cycle, deduplicated and
/// returned in canonical `(i, j)` order.
pub fn generate_candidates(problem: &PairingProblem) -> Vec<CandidateEdge> {
    let n = problem.n;
    let mut keys = BTreeSet::new();
    for &k in &problem.offsets {
        for i in 0..n {
            let j = (i + k) % n;
            keys.insert((i.min(j), i.max(j)));
        }
    }
    keys.into_iter()
        .map(|(i, j)| score_edge(i, j, n, &problem.params))
        .collect()
}

/// Drops edges lighter than `w_min`. With `keep_ring`, distance-1 edges
/// always survive.
pub fn filter_by_importance(edges: &[CandidateEdge], w_min: f64, keep_ring: bool) -> Vec<CandidateEdge> {
    edges
        .iter()
        .filter(|e| e.weight >= w_min || (keep_ring && e.distance == 1))
        .copied()
        .collect()
}

/// How selected undirected edges are handed to pairwise consumers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMode {
    /// `(i, j)` and `(j, i)` for every edge.
    #[default]
    Both,
    /// `(i, j)` with `i < j` only.
    Forward,
}

impl DirectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectionMode::Both => "both",
            DirectionMode::Forward => "forward",
        }
    }
}

/// Selected edge set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingPlan {
    edges: Vec<CandidateEdge>,
    total_weight: f64,
    directed: Option<Vec<(usize, usize)>>,
}

impl PairingPlan {
    /// Builds a plan from already selected edges. Edges are put in canonical
    /// order and the total is summed in that order.
    pub fn from_edges(mut edges: Vec<CandidateEdge>) -> Self {
        edges.sort_by_key(CandidateEdge::key);
        let total_weight = edges.iter().fold(0.0, |acc, e| acc + e.weight);
        Self {
            edges,
            total_weight,
            directed: None,
        }
    }

    pub fn empty() -> Self {
        Self::from_edges(Vec::new())
    }

    pub fn edges(&self) -> &[CandidateEdge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn directed(&self) -> Option<&[(usize, usize)]> {
        self.directed.as_deref()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Attaches the directed expansion for `mode`.
    pub fn with_directed(mut self, mode: DirectionMode) -> Self {
        self.directed = Some(expand_to_directed_pairs(&self, mode));
        self
    }

    /// Degree of every vertex in `0..n`.
    pub fn degrees(&self, n: usize) -> Vec<usize> {
        let mut deg = vec![0; n];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg
    }
}

pub fn expand_to_directed_pairs(plan: &PairingPlan, mode: DirectionMode) -> Vec<(usize, usize)> {
    match mode {
        DirectionMode::Both => plan.edges.iter().flat_map(|e| [(e.i, e.j), (e.j, e.i)]).collect(),
        DirectionMode::Forward => plan.edges.iter().map(|e| (e.i, e.j)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Connectivity {
    pub connected: bool,
    pub components: usize,
}

/// Whether the selected edges span all `n` vertices.
pub fn check_connectivity(plan: &PairingPlan, n: usize) -> Connectivity {
    let mut graph = UnGraph::<(), ()>::with_capacity(n, plan.len());
    for _ in 0..n {
        graph.add_node(());
    }
    for e in plan.edges() {
        graph.add_edge((e.i as u32).into(), (e.j as u32).into(), ());
    }
    let components = connected_components(&graph);
    Connectivity {
        connected: components == 1,
        components,
    }
}

/// Runs the whole pipeline: candidates, importance filter, degree-bounded
/// selection, directed expansion.
///
/// With `keep_ring` and a budget of at least two, the distance-1 ring is
/// placed first and the greedy pass fills the remaining capacity, so the
/// plan always contains the full cycle. When ring edges already carry the
/// largest weight this is exactly the plain greedy result.
pub fn plan_gaps(problem: &PairingProblem, mode: DirectionMode) -> PairingPlan {
    let candidates = generate_candidates(problem);
    let kept = filter_by_importance(&candidates, problem.params.w_min, problem.keep_ring);
    let b = problem.degree_budget;
    let plan = if problem.keep_ring && b >= 2 {
        let (ring, rest): (Vec<_>, Vec<_>) = kept.into_iter().partition(|e| e.distance == 1);
        select::greedy_fill(ring, &rest, b)
    } else {
        select_subgraph_greedy(&kept, b)
    };
    log::debug!(
        "gaps: n={} candidates={} selected={} total_weight={:.6}",
        problem.n,
        candidates.len(),
        plan.len(),
        plan.total_weight()
    );
    plan.with_directed(mode)
}
