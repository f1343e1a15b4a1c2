use super::scc::strongly_connected_components;
use super::Digraph;
use crate::error::{Error, Result};

/// A graph cut out of a parent, with the index maps in both directions.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: Digraph,
    /// Parent index of each new node.
    pub new_to_old: Vec<usize>,
    /// New index of each parent node, if kept.
    pub old_to_new: Vec<Option<usize>>,
}

/// Which nodes the core filter removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoreMode {
    /// Remove a node if its in-degree or its out-degree is at most the threshold.
    #[default]
    EitherLow,
    /// Remove a node only if both degrees are at most the threshold.
    BothLow,
}

impl std::str::FromStr for CoreMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "either_low" | "either-low" | "either" => Ok(CoreMode::EitherLow),
            "both_low" | "both-low" | "both" => Ok(CoreMode::BothLow),
            other => Err(format!("unknown core mode {other:?} (expected either_low or both_low)")),
        }
    }
}

pub fn induced_subgraph(g: &Digraph, keep: &[usize]) -> Result<Subgraph> {
    let n = g.node_count();
    if keep.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let mut old_to_new = vec![None; n];
    for &v in keep {
        if v >= n {
            return Err(Error::NodeOutOfRange { node: v, n });
        }
        old_to_new[v] = Some(0);
    }
    let mut new_to_old = Vec::with_capacity(keep.len());
    for (v, entry) in old_to_new.iter_mut().enumerate() {
        if let Some(slot) = entry.as_mut() {
            *slot = new_to_old.len();
            new_to_old.push(v);
        }
    }
    let mut edges = Vec::new();
    for &old in &new_to_old {
        let i = old_to_new[old].expect("kept");
        for &t in g.out_neighbors(old) {
            if let Some(j) = old_to_new[t] {
                edges.push((i, j));
            }
        }
    }
    let labels = new_to_old.iter().map(|&v| g.label(v)).collect();
    Ok(Subgraph {
        graph: Digraph::from_clean_edges(new_to_old.len(), edges, labels),
        new_to_old,
        old_to_new,
    })
}

/// Single pass of low-degree removal followed by the largest strongly
/// connected component of what remains.
pub fn extract_core(g: &Digraph, threshold: usize, mode: CoreMode) -> Result<Subgraph> {
    let keep: Vec<usize> = (0..g.node_count())
        .filter(|&v| {
            let low_in = g.in_degree(v) <= threshold;
            let low_out = g.out_degree(v) <= threshold;
            let removed = match mode {
                CoreMode::EitherLow => low_in || low_out,
                CoreMode::BothLow => low_in && low_out,
            };
            !removed
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyCore);
    }
    let filtered = induced_subgraph(g, &keep)?;
    let scc = strongly_connected_components(&filtered.graph);
    let core = induced_subgraph(&filtered.graph, &scc.members(0))?;

    let new_to_old: Vec<usize> = core.new_to_old.iter().map(|&v| filtered.new_to_old[v]).collect();
    let mut old_to_new = vec![None; g.node_count()];
    for (new, &old) in new_to_old.iter().enumerate() {
        old_to_new[old] = Some(new);
    }
    Ok(Subgraph {
        graph: core.graph,
        new_to_old,
        old_to_new,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete_mutual(n: usize) -> Digraph {
        let edges = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));
        Digraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn keep_pair() {
        let g = Digraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let s = induced_subgraph(&g, &[0, 1]).unwrap();
        assert_eq!(s.graph.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(s.old_to_new, vec![Some(0), Some(1), None]);
    }

    #[test]
    fn keep_all_is_identity() {
        let g = Digraph::from_edges(4, [(0, 1), (1, 2), (3, 0), (2, 3)]).unwrap();
        let s = induced_subgraph(&g, &[3, 2, 1, 0]).unwrap();
        assert_eq!(s.graph, g);
    }

    #[test]
    fn empty_keep_is_error() {
        let g = Digraph::from_edges(2, [(0, 1)]).unwrap();
        assert!(matches!(induced_subgraph(&g, &[]), Err(Error::EmptyNodeSet)));
    }

    #[test]
    fn labels_compose() {
        let g = Digraph::from_edges(3, [(0, 1), (1, 2)])
            .unwrap()
            .with_labels(vec![10, 20, 30])
            .unwrap();
        let s = induced_subgraph(&g, &[1, 2]).unwrap();
        let t = induced_subgraph(&s.graph, &[1]).unwrap();
        assert_eq!(t.graph.labels(), &[30]);
    }

    #[test]
    fn star_core_is_empty() {
        let g = Digraph::from_edges(6, (1..6).map(|j| (0, j))).unwrap();
        assert!(matches!(extract_core(&g, 2, CoreMode::EitherLow), Err(Error::EmptyCore)));
    }

    #[test]
    fn complete_mutual_core_is_whole() {
        let g = complete_mutual(5);
        let core = extract_core(&g, 2, CoreMode::EitherLow).unwrap();
        assert_eq!(core.graph, g);
        assert_eq!(core.new_to_old, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn modes_differ() {
        // node 5 only emits edges: in-degree 0, out-degree 5
        let mut edges: Vec<(usize, usize)> = (0..5)
            .flat_map(|i| (0..5).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        edges.extend((0..5).map(|j| (5, j)));
        let g = Digraph::from_edges(6, edges).unwrap();
        let either = extract_core(&g, 2, CoreMode::EitherLow).unwrap();
        assert_eq!(either.graph.node_count(), 5);
        // kept by the filter in both-low mode, but not in the largest SCC
        let both = extract_core(&g, 2, CoreMode::BothLow).unwrap();
        assert_eq!(both.graph.node_count(), 5);
        assert_eq!(both.old_to_new[5], None);
    }
}
