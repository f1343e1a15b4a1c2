use crate::error::{Error, Result};

/// Validated node-to-cluster assignment: labels cover `0..k`, no cluster empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    pub fn new(labels: &[usize]) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Self::with_k(labels, k)
    }

    pub fn with_k(labels: &[usize], k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPartition("no labels".into()));
        }
        let mut sizes = vec![0usize; k];
        for &c in labels {
            if c >= k {
                return Err(Error::InvalidPartition(format!("label {c} outside 0..{k}")));
            }
            sizes[c] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("cluster {empty} is empty")));
        }
        Ok(Partition {
            labels: labels.to_vec(),
            sizes,
        })
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.labels.len(),
            });
        }
        Ok(())
    }

    pub fn require_at_least(&self, k: usize) -> Result<()> {
        if self.k() < k {
            return Err(Error::InvalidPartition(format!(
                "need at least {k} clusters, got {}",
                self.k()
            )));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v] == cluster).collect()
    }
}

/// Renumbers clusters in order of first appearance.
pub fn canonicalize(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}
