//! Classical spectral clustering of digraphs via symmetrization.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cluster::{round_embedding, spectral_embedding, ClusteringResult, Method, Rounding, SpectralOptions};
use crate::dyad::report_of;
use crate::eigen::{Deflation, SymmetricOperator};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::partition::Partition;

pub const SPARSE_PRODUCT_CAP: usize = 20_000;
pub const DENSE_AFFINITY_CAP: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AffinityKind {
    /// `(A + A^T) / 2`.
    Average,
    /// `A A^T`: shared out-neighbors.
    Bibliographic,
    /// `A^T A`: shared in-neighbors.
    Cocitation,
    /// Random-walk flow `(Pi P + P^T Pi) / 2`.
    Circulation,
    /// Symmetrized directed modularity. Experimental.
    Modularity,
}

impl AffinityKind {
    pub const ALL: [AffinityKind; 5] = [
        AffinityKind::Average,
        AffinityKind::Bibliographic,
        AffinityKind::Cocitation,
        AffinityKind::Circulation,
        AffinityKind::Modularity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AffinityKind::Average => "average",
            AffinityKind::Bibliographic => "bibliographic",
            AffinityKind::Cocitation => "cocitation",
            AffinityKind::Circulation => "circulation",
            AffinityKind::Modularity => "modularity",
        }
    }

    pub fn is_nonnegative(self) -> bool {
        self != AffinityKind::Modularity
    }
}

impl fmt::Display for AffinityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AffinityKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        AffinityKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown affinity kind {s:?}"))
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Sparse {
        offsets: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
    Dense(DMatrix<f64>),
}

/// A symmetric affinity matrix built from a digraph.
#[derive(Debug, Clone)]
pub struct SymmetricAffinity {
    kind: AffinityKind,
    n: usize,
    storage: Storage,
    stationary: Option<Vec<f64>>,
}

impl SymmetricAffinity {
    pub fn kind(&self) -> AffinityKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stationary distribution of the random walk (circulation kind only).
    pub fn stationary(&self) -> Option<&[f64]> {
        self.stationary.as_deref()
    }

    /// Stored entries of row `i` (for the dense kind, every column).
    pub fn row(&self, i: usize) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match &self.storage {
            Storage::Sparse { offsets, cols, vals } => {
                let r = offsets[i]..offsets[i + 1];
                Box::new(cols[r.clone()].iter().copied().zip(vals[r].iter().copied()))
            }
            Storage::Dense(m) => Box::new(m.row(i).iter().copied().enumerate().collect::<Vec<_>>().into_iter()),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Sparse { offsets, cols, vals } => {
                let r = offsets[i]..offsets[i + 1];
                match cols[r.clone()].binary_search(&j) {
                    Ok(p) => vals[r.start + p],
                    Err(_) => 0.0,
                }
            }
            Storage::Dense(m) => m[(i, j)],
        }
    }

    /// Row sums `d_i = sum_j w_ij`, diagonal included.
    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, w)| w).sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse { .. } => {
                let mut m = DMatrix::zeros(self.n, self.n);
                for i in 0..self.n {
                    for (j, w) in self.row(i) {
                        m[(i, j)] = w;
                    }
                }
                m
            }
        }
    }

    fn from_rows(kind: AffinityKind, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(j, _)| j);
            for (j, w) in row {
                cols.push(j);
                vals.push(w);
            }
            offsets.push(cols.len());
        }
        SymmetricAffinity {
            kind,
            n,
            storage: Storage::Sparse { offsets, cols, vals },
            stationary: None,
        }
    }

    fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                worst = worst.max((w - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        let dev = self.max_asymmetry();
        if dev > 1e-12 {
            return Err(Error::NotSymmetric(dev));
        }
        if self.kind.is_nonnegative() {
            if let Some(w) = (0..self.n).flat_map(|i| self.row(i)).map(|(_, w)| w).find(|&w| w < 0.0) {
                return Err(Error::InvalidPartition(format!("negative affinity {w}")));
            }
        }
        Ok(())
    }
}

/// Builds the named symmetric affinity.
pub fn symmetrize(g: &Digraph, kind: AffinityKind) -> Result<SymmetricAffinity> {
    let n = g.node_count();
    let w = match kind {
        AffinityKind::Average => average(g),
        AffinityKind::Bibliographic | AffinityKind::Cocitation => {
            if n > SPARSE_PRODUCT_CAP {
                return Err(Error::TooLarge { n, cap: SPARSE_PRODUCT_CAP });
            }
            coupling(g, kind)
        }
        AffinityKind::Circulation => circulation(g)?,
        AffinityKind::Modularity => modularity(g)?,
    };
    w.validate()?;
    Ok(w)
}

fn average(g: &Digraph) -> SymmetricAffinity {
    let rows = (0..g.node_count())
        .map(|i| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            let (out, inn) = (g.out_neighbors(i), g.in_neighbors(i));
            let (mut a, mut b) = (0, 0);
            while a < out.len() || b < inn.len() {
                let (x, y) = (out.get(a).copied(), inn.get(b).copied());
                match (x, y) {
                    (Some(x), Some(y)) if x == y => {
                        row.push((x, 1.0));
                        a += 1;
                        b += 1;
                    }
                    (Some(x), Some(y)) if x < y => {
                        row.push((x, 0.5));
                        a += 1;
                    }
                    (Some(x), None) => {
                        row.push((x, 0.5));
                        a += 1;
                    }
                    (_, Some(y)) => {
                        row.push((y, 0.5));
                        b += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            row
        })
        .collect();
    SymmetricAffinity::from_rows(AffinityKind::Average, rows)
}

/// `A A^T` (shared out-neighbors) or `A^T A` (shared in-neighbors), diagonal kept.
fn coupling(g: &Digraph, kind: AffinityKind) -> SymmetricAffinity {
    let n = g.node_count();
    type Neighbors = fn(&Digraph, usize) -> &[usize];
    let (first, second): (Neighbors, Neighbors) = match kind {
        AffinityKind::Bibliographic => (Digraph::out_neighbors, Digraph::in_neighbors),
        _ => (Digraph::in_neighbors, Digraph::out_neighbors),
    };
    let mut acc = vec![0.0; n];
    let mut touched = Vec::new();
    let rows = (0..n)
        .map(|i| {
            for &k in first(g, i) {
                for &j in second(g, k) {
                    if acc[j] == 0.0 {
                        touched.push(j);
                    }
                    acc[j] += 1.0;
                }
            }
            let row = touched.iter().map(|&j| (j, acc[j])).collect();
            for &j in &touched {
                acc[j] = 0.0;
            }
            touched.clear();
            row
        })
        .collect();
    SymmetricAffinity::from_rows(kind, rows)
}

/// Stationary distribution of `P = D_out^{-1} A` by power iteration on the
/// lazy chain `(I + P) / 2`, which has the same fixed point and no periodicity.
pub fn stationary_distribution(g: &Digraph, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if crate::graph::strongly_connected_components(g).count() != 1 {
        return Err(Error::NotStronglyConnected);
    }
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        next.iter_mut().zip(&pi).for_each(|(y, x)| *y = 0.5 * x);
        for (i, p) in pi.iter().enumerate() {
            let share = 0.5 * p / g.out_degree(i) as f64;
            for &j in g.out_neighbors(i) {
                next[j] += share;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if change < tol {
            return Ok(pi);
        }
    }
    Err(Error::StationaryNotConverged)
}

fn circulation(g: &Digraph) -> Result<SymmetricAffinity> {
    let n = g.node_count();
    let pi = if n == 1 { vec![1.0] } else { stationary_distribution(g, 1e-12, 10_000_000)? };
    let flow = |i: usize| pi[i] / g.out_degree(i) as f64;
    let rows = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = g.out_neighbors(i).iter().map(|&j| (j, 0.5 * flow(i))).collect();
            row.extend(g.in_neighbors(i).iter().map(|&j| (j, 0.5 * flow(j))));
            row.sort_unstable_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, w) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            merged
        })
        .collect();
    let mut w = SymmetricAffinity::from_rows(AffinityKind::Circulation, rows);
    // the two half-flows of a pair are summed in different orders per row
    if let Storage::Sparse { offsets, cols, vals } = &mut w.storage {
        for i in 0..n {
            for p in offsets[i]..offsets[i + 1] {
                let j = cols[p];
                if j < i {
                    let q = offsets[j] + cols[offsets[j]..offsets[j + 1]].binary_search(&i).expect("symmetric pattern");
                    vals[p] = vals[q];
                }
            }
        }
    }
    w.stationary = Some(pi);
    Ok(w)
}

/// Circulation Laplacian `I - (Pi^{1/2} P Pi^{-1/2} + Pi^{-1/2} P^T Pi^{1/2}) / 2`.
pub fn circulation_laplacian(g: &Digraph) -> Result<DMatrix<f64>> {
    let n = g.node_count();
    if n > DENSE_AFFINITY_CAP {
        return Err(Error::TooLarge { n, cap: DENSE_AFFINITY_CAP });
    }
    let w = circulation(g)?;
    let pi = w.stationary.as_ref().expect("circulation keeps pi");
    let mut l = DMatrix::identity(n, n);
    for i in 0..n {
        for (j, wij) in w.row(i) {
            l[(i, j)] -= wij / (pi[i] * pi[j]).sqrt();
        }
    }
    Ok(l)
}

fn modularity(g: &Digraph) -> Result<SymmetricAffinity> {
    let n = g.node_count();
    if n > DENSE_AFFINITY_CAP {
        return Err(Error::TooLarge { n, cap: DENSE_AFFINITY_CAP });
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::Undefined("modularity of a graph without edges"));
    }
    let m = m as f64;
    let q = |i: usize, j: usize| f64::from(u8::from(g.has_edge(i, j))) - (g.out_degree(i) * g.in_degree(j)) as f64 / m;
    let mat = DMatrix::from_fn(n, n, |i, j| 0.5 * (q(i, j) + q(j, i)));
    Ok(SymmetricAffinity {
        kind: AffinityKind::Modularity,
        n,
        storage: Storage::Dense(mat),
        stationary: None,
    })
}

/// `L = D - W` applied without materializing it.
#[derive(Debug, Clone)]
pub struct Laplacian<'a> {
    w: &'a SymmetricAffinity,
    degrees: Vec<f64>,
}

impl Laplacian<'_> {
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut l = -self.w.to_dense();
        for (i, d) in self.degrees.iter().enumerate() {
            l[(i, i)] += d;
        }
        l
    }
}

impl SymmetricOperator for Laplacian<'_> {
    fn dim(&self) -> usize {
        self.w.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            *out = self.degrees[i] * x[i] - self.w.row(i).map(|(j, w)| w * x[j]).sum::<f64>();
        }
    }

    fn norm_bound(&self) -> f64 {
        (0..self.w.n)
            .map(|i| {
                let mut diag = self.degrees[i];
                let mut off = 0.0;
                for (j, w) in self.w.row(i) {
                    if j == i {
                        diag -= w;
                    } else {
                        off += w.abs();
                    }
                }
                diag.abs() + off
            })
            .fold(0.0, f64::max)
    }
}

pub fn standard_laplacian(w: &SymmetricAffinity) -> Result<Laplacian<'_>> {
    let dev = w.max_asymmetry();
    if dev > 1e-12 {
        return Err(Error::NotSymmetric(dev));
    }
    Ok(Laplacian { w, degrees: w.degrees() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutObjectives {
    /// Total boundary weight, each crossing pair counted once.
    pub cut: f64,
    /// `sum_k cut(S_k, rest) / |S_k|`.
    pub rcut: f64,
    /// `sum_k cut(S_k, rest) / vol(S_k)`; `None` when some volume is not positive.
    pub ncut: Option<f64>,
}

pub fn cut_objectives(w: &SymmetricAffinity, labels: &[usize]) -> Result<CutObjectives> {
    let p = Partition::new(labels)?;
    p.check_len(w.n)?;
    p.require_at_least(2)?;
    Ok(cut_objectives_of(w, &p))
}

pub(crate) fn cut_objectives_of(w: &SymmetricAffinity, p: &Partition) -> CutObjectives {
    let k = p.k();
    let mut boundary = vec![0.0; k];
    let mut volume = vec![0.0; k];
    for i in 0..w.n {
        let ci = p.label(i);
        for (j, wij) in w.row(i) {
            volume[ci] += wij;
            if p.label(j) != ci {
                boundary[ci] += wij;
            }
        }
    }
    let rcut = boundary.iter().zip(p.sizes()).map(|(b, &s)| b / s as f64).sum();
    let ncut = volume
        .iter()
        .all(|&v| v > 0.0)
        .then(|| boundary.iter().zip(&volume).map(|(b, v)| b / v).sum());
    CutObjectives {
        cut: 0.5 * boundary.iter().sum::<f64>(),
        rcut,
        ncut,
    }
}

pub fn normalized_cut(w: &SymmetricAffinity, labels: &[usize]) -> Result<f64> {
    cut_objectives(w, labels)?
        .ncut
        .ok_or_else(|| Error::InvalidPartition("a cluster has zero volume".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutKind {
    #[default]
    Ratio,
    Normalized,
}

/// Normalized Laplacian `I - D^{-1/2} W D^{-1/2}` as an operator.
struct NormalizedLaplacian<'a> {
    w: &'a SymmetricAffinity,
    inv_sqrt: Vec<f64>,
}

impl SymmetricOperator for NormalizedLaplacian<'_> {
    fn dim(&self) -> usize {
        self.w.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate() {
            let s: f64 = self.w.row(i).map(|(j, w)| w * self.inv_sqrt[j] * x[j]).sum();
            *out = x[i] - self.inv_sqrt[i] * s;
        }
    }

    fn norm_bound(&self) -> f64 {
        2.0
    }
}

impl NormalizedLaplacian<'_> {
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.w.n;
        let mut l = DMatrix::identity(n, n);
        for i in 0..n {
            for (j, w) in self.w.row(i) {
                l[(i, j)] -= self.inv_sqrt[i] * w * self.inv_sqrt[j];
            }
        }
        l
    }
}

/// Symmetrize, solve for the smallest nontrivial eigenvectors of `D - W`,
/// and round with K-means. The objective is RCut.
pub fn baseline_spectral_clustering(g: &Digraph, kind: AffinityKind, opts: &SpectralOptions) -> Result<ClusteringResult> {
    baseline_spectral_clustering_with(g, kind, CutKind::Ratio, opts)
}

pub fn baseline_spectral_clustering_with(g: &Digraph, kind: AffinityKind, cut: CutKind, opts: &SpectralOptions) -> Result<ClusteringResult> {
    let n = g.node_count();
    if n < 3 {
        return Err(Error::TooSmall { need: 3, got: n });
    }
    let w = symmetrize(g, kind)?;
    let (emb, objective): (_, fn(&CutObjectives) -> Option<f64>) = match cut {
        CutKind::Ratio => {
            let lap = standard_laplacian(&w)?;
            if lap.norm_bound() <= 1e-12 {
                return Err(Error::Undefined("affinity has no off-diagonal weight"));
            }
            (spectral_embedding(&lap, || Ok(lap.to_dense()), Deflation::Constant, opts)?, |c| Some(c.rcut))
        }
        CutKind::Normalized => {
            if !kind.is_nonnegative() {
                return Err(Error::Undefined("normalized cut of a signed affinity"));
            }
            let degrees = w.degrees();
            if degrees.iter().any(|&d| d <= 0.0) {
                return Err(Error::Undefined("normalized cut with an isolated node"));
            }
            let op = NormalizedLaplacian {
                w: &w,
                inv_sqrt: degrees.iter().map(|d| 1.0 / d.sqrt()).collect(),
            };
            let deflation = Deflation::Vector(degrees.iter().map(|d| d.sqrt()).collect());
            let mut emb = spectral_embedding(&op, || Ok(op.to_dense()), deflation, opts)?;
            for (row, s) in emb.rows.iter_mut().zip(&op.inv_sqrt) {
                row.iter_mut().for_each(|x| *x *= s);
            }
            for v in &mut emb.spectrum.eigenvectors {
                v.iter_mut().zip(&op.inv_sqrt).for_each(|(x, s)| *x *= s);
            }
            (emb, |c| c.ncut)
        }
    };
    let partition = round_embedding(&emb, Rounding::KMeans, opts)?;
    let cuts = cut_objectives_of(&w, &partition);
    Ok(ClusteringResult {
        method: Method::Baseline(kind),
        k: emb.k,
        objective: objective(&cuts).unwrap_or(f64::NAN),
        tendency_report: report_of(g, &partition),
        labels: partition.labels().to_vec(),
        eigenvalues: emb.spectrum.eigenvalues,
        residuals: emb.spectrum.residuals,
        embedding: emb.rows,
        seed: opts.seed,
    })
}
