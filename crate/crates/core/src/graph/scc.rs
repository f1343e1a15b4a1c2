use super::subgraph::{induced_subgraph, Subgraph};
use super::Digraph;
use crate::error::Result;

/// Component label per node. Components are numbered by decreasing size,
/// ties broken by the smallest node they contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccLabels {
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl SccLabels {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn members(&self, component: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v] == component).collect()
    }
}

const UNVISITED: usize = usize::MAX;

/// Iterative Tarjan; no recursion, so deep graphs cannot overflow the stack.
pub fn strongly_connected_components(g: &Digraph) -> SccLabels {
    let n = g.node_count();
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut raw = vec![UNVISITED; n];
    let mut n_components = 0usize;
    let mut counter = 0usize;
    // (node, position in its out-neighbor list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        lowlink[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.out_neighbors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    lowlink[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    raw[w] = n_components;
                    if w == v {
                        break;
                    }
                }
                n_components += 1;
            }
        }
    }

    let mut sizes = vec![0usize; n_components];
    let mut first = vec![usize::MAX; n_components];
    for v in 0..n {
        sizes[raw[v]] += 1;
        first[raw[v]] = first[raw[v]].min(v);
    }
    let mut order: Vec<usize> = (0..n_components).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(sizes[c]), first[c]));
    let mut rank = vec![0usize; n_components];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    SccLabels {
        labels: raw.iter().map(|&c| rank[c]).collect(),
        sizes: order.iter().map(|&c| sizes[c]).collect(),
    }
}

pub fn largest_scc(g: &Digraph) -> Result<Subgraph> {
    let scc = strongly_connected_components(g);
    induced_subgraph(g, &scc.members(0))
}
