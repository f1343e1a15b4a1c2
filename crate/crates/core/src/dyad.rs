//! Dyadic statistics: the census, Wolfe's reciprocity index, and the
//! symmetric mutuality tendency of dyads, clusters and cluster boundaries.
//!
//! The tendency of a dyad compares the observed mutual indicator with the
//! probability `d_i d_j / (n-1)^2` that both endpoints link to each other
//! under an out-degree-preserving random digraph. Sums over node sets use
//! the closed forms
//!
//! ```text
//! m_mu(S)  = (d_S^2 - sum_{i in S} d_i^2) / (2 (n-1)^2)
//! m_mu(dS) = d_S d_Sbar / (n-1)^2
//! ```
//!
//! together with a sparse count of observed mutual dyads, so no routine here
//! walks all `n(n-1)/2` pairs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::partition::Partition;

/// Counts of mutual, one-way (asymmetric) and null dyads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DyadCensus {
    pub mutual: u64,
    pub asymmetric: u64,
    pub null: u64,
    pub n_dyads: u64,
}

impl DyadCensus {
    /// Directed edges that belong to mutual dyads (`2m`).
    pub fn bidirectional_edges(&self) -> u64 {
        2 * self.mutual
    }
}

pub fn dyad_census(g: &Digraph) -> DyadCensus {
    let n = g.node_count() as u64;
    let ordered_mutual: u64 = (0..g.node_count()).map(|i| g.mutual_neighbors(i).count() as u64).sum();
    let mutual = ordered_mutual / 2;
    let asymmetric = g.edge_count() as u64 - 2 * mutual;
    let n_dyads = n * n.saturating_sub(1) / 2;
    DyadCensus {
        mutual,
        asymmetric,
        null: n_dyads - mutual - asymmetric,
        n_dyads,
    }
}

/// Wolfe's reciprocity index
/// `(P(X_ij, X_ji) - P(X_ij) P(X_ji)) / (P(X_ij) P(not X_ji))`.
///
/// Returns [`Error::Undefined`] when `p_ij = 0` or `p_ji = 1`. The value is
/// not clamped: plugging an observed joint into model marginals can exceed 1.
pub fn wolfe_rho(p_joint: f64, p_ij: f64, p_ji: f64) -> Result<f64> {
    for (name, value) in [("p_joint", p_joint), ("p_ij", p_ij), ("p_ji", p_ji)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidProbability { name, value });
        }
    }
    let denom = p_ij * (1.0 - p_ji);
    if denom == 0.0 {
        return Err(Error::Undefined("wolfe rho denominator is zero"));
    }
    Ok((p_joint - p_ij * p_ji) / denom)
}

/// [`wolfe_rho`] with the observed mutual indicator as the joint and
/// `d/(n-1)` out-degree marginals.
pub fn wolfe_rho_graph(g: &Digraph, i: usize, j: usize) -> Result<f64> {
    check_pair(g, i, j)?;
    let m = (g.node_count() - 1) as f64;
    let joint = if g.is_mutual(i, j) { 1.0 } else { 0.0 };
    wolfe_rho(joint, g.out_degree(i) as f64 / m, g.out_degree(j) as f64 / m)
}

fn check_pair(g: &Digraph, i: usize, j: usize) -> Result<()> {
    let n = g.node_count();
    for v in [i, j] {
        if v >= n {
            return Err(Error::NodeOutOfRange { node: v, n });
        }
    }
    if i == j {
        return Err(Error::SameNode(i));
    }
    Ok(())
}

pub(crate) fn null_scale(n: usize) -> f64 {
    let m = (n - 1) as f64;
    1.0 / (m * m)
}

/// Mutuality tendency of one dyad; symmetric in `i` and `j`.
pub fn dyad_tendency(g: &Digraph, i: usize, j: usize) -> Result<f64> {
    check_pair(g, i, j)?;
    let observed = if g.is_mutual(i, j) { 1.0 } else { 0.0 };
    let expected = (g.out_degree(i) * g.out_degree(j)) as f64 * null_scale(g.node_count());
    Ok(observed - expected)
}

/// Raw tendency sum over a scope of dyads, with its average when the scope
/// is nonempty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TendencyStats {
    pub theta_total: f64,
    pub n_pairs: u64,
    pub theta_avg: Option<f64>,
}

impl TendencyStats {
    fn new(theta_total: f64, n_pairs: u64) -> Self {
        TendencyStats {
            theta_total,
            n_pairs,
            theta_avg: (n_pairs > 0).then(|| theta_total / n_pairs as f64),
        }
    }

    /// The average, or an error for a scope without dyads (a single node).
    pub fn average(&self) -> Result<f64> {
        self.theta_avg
            .ok_or(Error::Undefined("average tendency over zero dyads"))
    }
}

fn membership(g: &Digraph, s: &[usize]) -> Result<Vec<bool>> {
    let n = g.node_count();
    if s.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    let mut mask = vec![false; n];
    for &v in s {
        if v >= n {
            return Err(Error::NodeOutOfRange { node: v, n });
        }
        mask[v] = true;
    }
    Ok(mask)
}

fn pairs(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// Integer volumes of a node set: (count, sum of d, sum of d^2).
fn volumes(g: &Digraph, mask: &[bool]) -> (u64, u128, u128) {
    let mut count = 0u64;
    let mut vol = 0u128;
    let mut sq = 0u128;
    for (v, &inside) in mask.iter().enumerate() {
        if inside {
            let d = g.out_degree(v) as u128;
            count += 1;
            vol += d;
            sq += d * d;
        }
    }
    (count, vol, sq)
}

/// Tendency of the dyads inside `s`.
pub fn cluster_tendency(g: &Digraph, s: &[usize]) -> Result<TendencyStats> {
    let mask = membership(g, s)?;
    if g.node_count() < 2 {
        return Err(Error::TooSmall { need: 2, got: g.node_count() });
    }
    let (count, vol, sq) = volumes(g, &mask);
    let mut observed = 0u64;
    for i in (0..g.node_count()).filter(|&i| mask[i]) {
        observed += g.mutual_neighbors(i).filter(|&j| j > i && mask[j]).count() as u64;
    }
    let expected = (vol * vol - sq) as f64 * null_scale(g.node_count()) / 2.0;
    Ok(TendencyStats::new(observed as f64 - expected, pairs(count)))
}

/// Tendency of the dyads with one end in `s` and the other outside it.
pub fn cross_tendency(g: &Digraph, s: &[usize]) -> Result<TendencyStats> {
    let mask = membership(g, s)?;
    let n = g.node_count();
    let (count, vol, _) = volumes(g, &mask);
    if count as usize == n {
        return Err(Error::InvalidPartition("set covers every node".into()));
    }
    let total: u128 = (0..n).map(|v| g.out_degree(v) as u128).sum();
    let mut observed = 0u64;
    for i in (0..n).filter(|&i| mask[i]) {
        observed += g.mutual_neighbors(i).filter(|&j| !mask[j]).count() as u64;
    }
    let expected = (vol * (total - vol)) as f64 * null_scale(n);
    Ok(TendencyStats::new(
        observed as f64 - expected,
        count * (n as u64 - count),
    ))
}

/// Tendency of the whole digraph.
pub fn graph_tendency(g: &Digraph) -> Result<TendencyStats> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    let census = dyad_census(g);
    let (_, vol, sq) = volumes(g, &vec![true; n]);
    let expected = (vol * vol - sq) as f64 * null_scale(n) / 2.0;
    Ok(TendencyStats::new(census.mutual as f64 - expected, census.n_dyads))
}

/// Per-cluster tallies from one sweep over the mutual dyads.
struct PartitionTally {
    within_mutual: Vec<u64>,
    boundary_mutual: Vec<u64>,
    cross_mutual: u64,
    vol: Vec<u128>,
    sq: Vec<u128>,
    total_vol: u128,
}

impl PartitionTally {
    fn new(g: &Digraph, p: &Partition) -> Self {
        let k = p.k();
        let mut tally = PartitionTally {
            within_mutual: vec![0; k],
            boundary_mutual: vec![0; k],
            cross_mutual: 0,
            vol: vec![0; k],
            sq: vec![0; k],
            total_vol: 0,
        };
        for i in 0..g.node_count() {
            let ci = p.label(i);
            let d = g.out_degree(i) as u128;
            tally.vol[ci] += d;
            tally.sq[ci] += d * d;
            tally.total_vol += d;
            for j in g.mutual_neighbors(i).filter(|&j| j > i) {
                let cj = p.label(j);
                if ci == cj {
                    tally.within_mutual[ci] += 1;
                } else {
                    tally.boundary_mutual[ci] += 1;
                    tally.boundary_mutual[cj] += 1;
                    tally.cross_mutual += 1;
                }
            }
        }
        tally
    }

    fn within(&self, c: usize, scale: f64) -> f64 {
        let expected = (self.vol[c] * self.vol[c] - self.sq[c]) as f64 * scale / 2.0;
        self.within_mutual[c] as f64 - expected
    }

    fn boundary(&self, c: usize, scale: f64) -> f64 {
        let expected = (self.vol[c] * (self.total_vol - self.vol[c])) as f64 * scale;
        self.boundary_mutual[c] as f64 - expected
    }

    fn all_cross(&self, scale: f64) -> f64 {
        let sum_sq: u128 = self.vol.iter().map(|v| v * v).sum();
        let expected = (self.total_vol * self.total_vol - sum_sq) as f64 * scale / 2.0;
        self.cross_mutual as f64 - expected
    }
}

fn partition_for(g: &Digraph, labels: &[usize], k: Option<usize>) -> Result<Partition> {
    let p = match k {
        Some(k) => Partition::with_k(labels, k)?,
        None => Partition::new(labels)?,
    };
    p.check_len(g.node_count())?;
    if g.node_count() < 2 {
        return Err(Error::TooSmall { need: 2, got: g.node_count() });
    }
    Ok(p)
}

/// Tendency ratio cut `sum_k Theta(dS_k) / |S_k|`. For two clusters this is
/// `Theta(dS) (1/|S| + 1/|Sbar|)`.
pub fn trcut(g: &Digraph, labels: &[usize], k: usize) -> Result<f64> {
    let p = partition_for(g, labels, Some(k))?;
    p.require_at_least(2)?;
    Ok(trcut_of(g, &p))
}

pub(crate) fn trcut_of(g: &Digraph, p: &Partition) -> f64 {
    let tally = PartitionTally::new(g, p);
    let scale = null_scale(g.node_count());
    (0..p.k())
        .map(|c| tally.boundary(c, scale) / p.sizes()[c] as f64)
        .sum()
}

/// Average tendencies of the graph, of each cluster, and of the dyads that
/// straddle two clusters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TendencyReport {
    pub graph: TendencyStats,
    pub clusters: Vec<TendencyStats>,
    pub boundary: TendencyStats,
}

impl TendencyReport {
    /// One row per scope: `graph`, `cluster_<k>`..., `boundary`.
    pub fn rows(&self) -> Vec<(String, TendencyStats)> {
        let mut rows = vec![("graph".to_string(), self.graph)];
        rows.extend(
            self.clusters
                .iter()
                .enumerate()
                .map(|(c, s)| (format!("cluster_{c}"), *s)),
        );
        rows.push(("boundary".to_string(), self.boundary));
        rows
    }
}

pub fn average_tendency_report(g: &Digraph, labels: &[usize]) -> Result<TendencyReport> {
    let p = partition_for(g, labels, None)?;
    Ok(report_of(g, &p))
}

pub(crate) fn report_of(g: &Digraph, p: &Partition) -> TendencyReport {
    let n = g.node_count();
    let scale = null_scale(n);
    let tally = PartitionTally::new(g, p);
    let clusters: Vec<TendencyStats> = (0..p.k())
        .map(|c| TendencyStats::new(tally.within(c, scale), pairs(p.sizes()[c] as u64)))
        .collect();
    let within_pairs: u64 = p.sizes().iter().map(|&s| pairs(s as u64)).sum();
    let n_dyads = pairs(n as u64);
    let total_mutual: u64 = tally.within_mutual.iter().sum::<u64>() + tally.cross_mutual;
    let graph_expected = (tally.total_vol * tally.total_vol - tally.sq.iter().sum::<u128>()) as f64 * scale / 2.0;
    TendencyReport {
        graph: TendencyStats::new(total_mutual as f64 - graph_expected, n_dyads),
        clusters,
        boundary: TendencyStats::new(tally.all_cross(scale), n_dyads - within_pairs),
    }
}
