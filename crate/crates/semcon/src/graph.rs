//! Directed citation graph: forward/backward neighborhoods and citation
//! counting.
//!
//! For a publication p, `cited_set(p)` is A(p) — the papers p cites — and
//! `citing_set(p)` is B(p) — the papers citing p. Citation count is the
//! in-degree, counted within the ingested edge set; edges from papers
//! without text records still count (text availability only matters to the
//! similarity model, not to citation counting).

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{CitationEdge, Doi};

/// Immutable double-indexed citation graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationGraph {
    out_edges: BTreeMap<Doi, BTreeSet<Doi>>,
    in_edges: BTreeMap<Doi, BTreeSet<Doi>>,
    edge_count: usize,
    empty: BTreeSet<Doi>,
}

/// Index a deduplicated edge list in both directions.
///
/// Construction is order-insensitive: any permutation of the same edge set
/// produces an identical graph.
pub fn build_graph(edges: &[CitationEdge]) -> CitationGraph {
    let mut graph = CitationGraph::default();
    for edge in edges {
        let inserted = graph
            .out_edges
            .entry(edge.citing.clone())
            .or_default()
            .insert(edge.cited.clone());
        graph
            .in_edges
            .entry(edge.cited.clone())
            .or_default()
            .insert(edge.citing.clone());
        if inserted {
            graph.edge_count += 1;
        }
    }
    graph
}

impl CitationGraph {
    /// Papers cited by `p` (the set A(p)); empty for unknown DOIs.
    pub fn cited_set(&self, p: &Doi) -> &BTreeSet<Doi> {
        self.out_edges.get(p).unwrap_or(&self.empty)
    }

    /// Papers citing `p` (the set B(p)); empty for unknown DOIs.
    pub fn citing_set(&self, p: &Doi) -> &BTreeSet<Doi> {
        self.in_edges.get(p).unwrap_or(&self.empty)
    }

    /// In-degree of `p`; 0 for unknown DOIs.
    pub fn citation_count(&self, p: &Doi) -> usize {
        self.citing_set(p).len()
    }

    /// Number of distinct edges in the graph.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// True iff `p` occurs as an endpoint of at least one edge.
    pub fn knows(&self, p: &Doi) -> bool {
        self.out_edges.contains_key(p) || self.in_edges.contains_key(p)
    }

    /// Exhaustive mirror check: `b ∈ out[a]` ⇔ `a ∈ in[b]`, and both
    /// directions account for every edge exactly once.
    pub fn is_mirror_consistent(&self) -> bool {
        let out_total: usize = self.out_edges.values().map(BTreeSet::len).sum();
        let in_total: usize = self.in_edges.values().map(BTreeSet::len).sum();
        if out_total != in_total || out_total != self.edge_count {
            return false;
        }
        self.out_edges.iter().all(|(a, cited)| {
            cited.iter().all(|b| {
                self.in_edges
                    .get(b)
                    .is_some_and(|citing| citing.contains(a))
            })
        })
    }
}
