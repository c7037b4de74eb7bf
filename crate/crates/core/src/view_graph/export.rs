use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CandidateEdge, DirectionMode, PairingPlan};

/// JSON form of a plan, shared by every pairing strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub n: usize,
    pub mode: DirectionMode,
    pub edges: Vec<CandidateEdge>,
    pub pairs: Vec<(usize, usize)>,
    pub total_weight: f64,
}

impl PlanDocument {
    /// Uses the plan's attached directed pairs, expanding with `mode` when
    /// none are attached yet.
    pub fn new(plan: &PairingPlan, n: usize, mode: DirectionMode) -> Self {
        let pairs = match plan.directed() {
            Some(pairs) => pairs.to_vec(),
            None => super::expand_to_directed_pairs(plan, mode),
        };
        Self {
            n,
            mode,
            edges: plan.edges().to_vec(),
            pairs,
            total_weight: plan.total_weight(),
        }
    }
}

/// Undirected Graphviz graph with every vertex listed and edges labelled
/// by weight.
pub fn to_dot(plan: &PairingPlan, n: usize) -> String {
    let mut out = String::from("graph pairs {\n");
    for v in 0..n {
        let _ = writeln!(out, "  {v};");
    }
    for e in plan.edges() {
        let _ = writeln!(out, "  {} -- {} [label=\"{:.4}\"];", e.i, e.j, e.weight);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::view_graph::{plan_gaps, PairingProblem, RangeClass};

    #[test]
    fn json_document_shape() {
        let problem = PairingProblem::with_defaults(4).unwrap();
        let plan = plan_gaps(&problem, DirectionMode::Both);
        let doc = PlanDocument::new(&plan, 4, DirectionMode::Both);
        let value = serde_json::to_value(&doc).unwrap();
        for key in ["n", "mode", "edges", "pairs", "total_weight"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["mode"], "both");
        let first = &value["edges"][0];
        for key in ["i", "j", "d", "range", "w"] {
            assert!(first.get(key).is_some(), "missing edge field {key}");
        }
        assert_eq!(value["pairs"][0], serde_json::json!([0, 1]));
        let back: PlanDocument = serde_json::from_value(value).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn dot_labels_use_four_decimals() {
        let plan = PairingPlan::from_edges(vec![CandidateEdge {
            i: 0,
            j: 2,
            distance: 2,
            range: RangeClass::Local,
            weight: 0.606_530_66,
        }]);
        let dot = to_dot(&plan, 3);
        assert!(dot.starts_with("graph pairs {"));
        assert!(dot.contains("  0 -- 2 [label=\"0.6065\"];"));
        assert!(dot.contains("  1;"));
        assert!(dot.trim_end().ends_with('}'));
    }
}
