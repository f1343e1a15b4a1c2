//! Immutable simple digraph in compressed sparse row form.
//!
//! Every graph keeps both the out-neighbor and the in-neighbor lists, sorted
//! and deduplicated, plus the external ID of each node so results can be
//! reported in the IDs of the original input.

mod io;
mod scc;
mod subgraph;

pub use io::{load_edge_list, read_edge_list_file, write_edge_list, IdBase, LoadOptions, LoadedGraph};
pub use scc::{largest_scc, strongly_connected_components, SccLabels};
pub use subgraph::{extract_core, induced_subgraph, CoreMode, Subgraph};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<usize>,
    in_offsets: Vec<usize>,
    in_sources: Vec<usize>,
    labels: Vec<u64>,
}

/// Per-node out/in degree counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    pub out_degree: Vec<usize>,
    pub in_degree: Vec<usize>,
    pub total_edges: usize,
}

impl Digraph {
    /// Builds a graph on nodes `0..n`. Duplicate edges are merged; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut list = Vec::new();
        for (i, j) in edges {
            if i >= n {
                return Err(Error::NodeOutOfRange { node: i, n });
            }
            if j >= n {
                return Err(Error::NodeOutOfRange { node: j, n });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            list.push((i, j));
        }
        Ok(Self::from_clean_edges(n, list, (0..n as u64).collect()))
    }

    /// `edges` must be in range and loop-free; they are sorted and deduplicated here.
    pub(crate) fn from_clean_edges(n: usize, mut edges: Vec<(usize, usize)>, labels: Vec<u64>) -> Self {
        debug_assert_eq!(labels.len(), n);
        edges.sort_unstable();
        edges.dedup();

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(i, j) in &edges {
            out_offsets[i + 1] += 1;
            in_offsets[j + 1] += 1;
        }
        for v in 0..n {
            out_offsets[v + 1] += out_offsets[v];
            in_offsets[v + 1] += in_offsets[v];
        }
        let out_targets: Vec<usize> = edges.iter().map(|&(_, j)| j).collect();

        // Filling in-lists in edge order (sorted by source) keeps each list sorted.
        let mut in_sources = vec![0usize; edges.len()];
        let mut cursor = in_offsets.clone();
        for &(i, j) in &edges {
            in_sources[cursor[j]] = i;
            cursor[j] += 1;
        }

        Digraph {
            n,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            labels,
        }
    }

    /// Replaces the external node IDs.
    pub fn with_labels(mut self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_targets[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_sources[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_offsets[i + 1] - self.out_offsets[i]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_offsets[i + 1] - self.in_offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.out_neighbors(i).binary_search(&j).is_ok()
    }

    pub fn is_mutual(&self, i: usize, j: usize) -> bool {
        self.has_edge(i, j) && self.has_edge(j, i)
    }

    /// All directed edges in (source, target) lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.out_neighbors(i).iter().map(move |&j| (i, j)))
    }

    /// Neighbors `j` such that both `i -> j` and `j -> i` exist, ascending.
    pub fn mutual_neighbors(&self, i: usize) -> MutualNeighbors<'_> {
        MutualNeighbors {
            out: self.out_neighbors(i),
            inc: self.in_neighbors(i),
        }
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u64 {
        self.labels[i]
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        degree_profile(self)
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.out_degree(i)).collect()
    }
}

/// Merge-intersection of the sorted out- and in-lists of one node.
pub struct MutualNeighbors<'a> {
    out: &'a [usize],
    inc: &'a [usize],
}

impl Iterator for MutualNeighbors<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while let (Some(&a), Some(&b)) = (self.out.first(), self.inc.first()) {
            match a.cmp(&b) {
                std::cmp::Ordering::Less => self.out = &self.out[1..],
                std::cmp::Ordering::Greater => self.inc = &self.inc[1..],
                std::cmp::Ordering::Equal => {
                    self.out = &self.out[1..];
                    self.inc = &self.inc[1..];
                    return Some(a);
                }
            }
        }
        None
    }
}

pub fn degree_profile(g: &Digraph) -> DegreeProfile {
    DegreeProfile {
        out_degree: (0..g.n).map(|i| g.out_degree(i)).collect(),
        in_degree: (0..g.n).map(|i| g.in_degree(i)).collect(),
        total_edges: g.edge_count(),
    }
}
