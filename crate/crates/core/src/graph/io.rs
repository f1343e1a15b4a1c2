//! SNAP-style edge lists: one `src dst` pair per line, `#` starts a comment.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::Digraph;
use crate::error::{Error, Result};

type IdLookup = Box<dyn Fn(u64) -> usize>;

/// How external node IDs map onto dense indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdBase {
    /// Distinct IDs are sorted and renumbered `0..n`.
    #[default]
    Compact,
    /// IDs are used as indices directly; `n = max id + 1`.
    ZeroBased,
    /// IDs start at 1; index = id - 1.
    OneBased,
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub drop_self_loops: bool,
    pub dedupe: bool,
    pub id_base: IdBase,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            drop_self_loops: true,
            dedupe: true,
            id_base: IdBase::Compact,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Digraph,
    pub self_loops_dropped: usize,
    pub duplicates_merged: usize,
}

pub fn read_edge_list_file(path: impl AsRef<Path>, opts: LoadOptions) -> Result<LoadedGraph> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file), opts)
}

pub fn load_edge_list<R: BufRead>(reader: R, opts: LoadOptions) -> Result<LoadedGraph> {
    let mut raw: Vec<(u64, u64)> = Vec::new();
    let mut seen_ids: BTreeSet<u64> = BTreeSet::new();
    let mut self_loops = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let src = parse_id(tokens.next(), lineno)?;
        let dst = parse_id(tokens.next(), lineno)?;
        if tokens.next().is_some() {
            return Err(Error::MalformedLine {
                line: lineno,
                message: "expected exactly two node IDs".into(),
            });
        }
        seen_ids.insert(src);
        seen_ids.insert(dst);
        if src == dst {
            if opts.drop_self_loops {
                self_loops += 1;
                continue;
            }
            return Err(Error::MalformedLine {
                line: lineno,
                message: format!("self-loop on node {src}"),
            });
        }
        raw.push((src, dst));
    }

    if seen_ids.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let (n, labels, index_of): (usize, Vec<u64>, IdLookup) = match opts.id_base {
        IdBase::Compact => {
            let labels: Vec<u64> = seen_ids.iter().copied().collect();
            let lookup = labels.clone();
            (
                labels.len(),
                labels,
                Box::new(move |id| lookup.binary_search(&id).expect("id registered")),
            )
        }
        IdBase::ZeroBased => {
            let max = *seen_ids.iter().next_back().expect("nonempty");
            let n = usize::try_from(max).expect("id fits usize") + 1;
            (n, (0..n as u64).collect(), Box::new(|id| id as usize))
        }
        IdBase::OneBased => {
            if seen_ids.contains(&0) {
                return Err(Error::MalformedLine {
                    line: 0,
                    message: "node ID 0 in a one-based edge list".into(),
                });
            }
            let max = *seen_ids.iter().next_back().expect("nonempty");
            let n = usize::try_from(max).expect("id fits usize");
            (n, (1..=n as u64).collect(), Box::new(|id| id as usize - 1))
        }
    };

    let edges: Vec<(usize, usize)> = raw.iter().map(|&(s, d)| (index_of(s), index_of(d))).collect();
    let before = edges.len();
    let mut unique = edges.clone();
    unique.sort_unstable();
    unique.dedup();
    let duplicates = before - unique.len();
    if duplicates > 0 && !opts.dedupe {
        return Err(Error::MalformedLine {
            line: 0,
            message: format!("{duplicates} duplicate edges and deduplication disabled"),
        });
    }

    Ok(LoadedGraph {
        graph: Digraph::from_clean_edges(n, unique, labels),
        self_loops_dropped: self_loops,
        duplicates_merged: duplicates,
    })
}

fn parse_id(token: Option<&str>, line: usize) -> Result<u64> {
    let token = token.ok_or_else(|| Error::MalformedLine {
        line,
        message: "expected two node IDs".into(),
    })?;
    token.parse::<u64>().map_err(|_| Error::MalformedLine {
        line,
        message: format!("invalid node ID {token:?}"),
    })
}

/// Writes the graph in the same format, using external node IDs.
pub fn write_edge_list<W: Write>(g: &Digraph, mut out: W) -> Result<()> {
    writeln!(out, "# Nodes: {} Edges: {}", g.node_count(), g.edge_count())?;
    writeln!(out, "# FromNodeId\tToNodeId")?;
    for (i, j) in g.edges() {
        writeln!(out, "{}\t{}", g.label(i), g.label(j))?;
    }
    Ok(())
}
