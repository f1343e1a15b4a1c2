//! Rounding spectral embeddings into clusters, and the end-to-end
//! tendency-aware pipeline.
//!
//! The relaxed problem `min tr(H^T L_T H)` over orthonormal `H` whose span
//! contains the constant vector is solved by the constant column plus the
//! `K-1` smallest eigenvectors of `L_T` on the complement of `1`. For two
//! clusters the single nontrivial eigenvector is rounded by sign; otherwise
//! the rows of the embedding go through K-means. Rows are not normalized:
//! this is the ratio-cut formulation.

mod ari;
mod kmeans;

pub use ari::adjusted_rand_index;
pub use kmeans::{kmeans, KMeansOptions, KMeansResult};

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::baseline::AffinityKind;
use crate::dyad::{report_of, trcut_of, TendencyReport};
use crate::eigen::{dense_deflated_eig, eigengap_select, smallest_eigenpairs, Deflation, EigenOptions, Spectrum, SymmetricOperator};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::operator::{dense_tendency_laplacian, TendencyOperator};
use crate::partition::{canonicalize, Partition};

/// Splits nodes by sign: label 0 where `v_i >= 0`, label 1 otherwise.
pub fn sign_bipartition(v: &[f64]) -> Result<Vec<usize>> {
    let labels: Vec<usize> = v.iter().map(|&x| usize::from(x < 0.0)).collect();
    let negatives = labels.iter().filter(|&&c| c == 1).count();
    if negatives == 0 || negatives == v.len() {
        return Err(Error::OneSigned { embedding: v.to_vec() });
    }
    Ok(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Tendency,
    Baseline(AffinityKind),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Tendency => write!(f, "tendency"),
            Method::Baseline(kind) => write!(f, "baseline:{kind}"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "tendency" {
            return Ok(Method::Tendency);
        }
        match s.strip_prefix("baseline:") {
            Some(kind) => Ok(Method::Baseline(kind.parse()?)),
            None if s == "baseline" => Ok(Method::Baseline(AffinityKind::Average)),
            None => Err(format!("unknown method {s:?} (expected tendency or baseline:<kind>)")),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    /// Eigengap over the first `k_max` nontrivial eigenvalues
    /// (default `min(20, n - 1)`).
    Auto { k_max: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Dense below [`SpectralOptions::dense_threshold`] nodes, Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Sign of the nontrivial eigenvector when `K = 2`, K-means otherwise.
    #[default]
    Sign,
    KMeans,
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub k: KChoice,
    pub rounding: Rounding,
    pub solver: SolverKind,
    pub dense_threshold: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub kmeans: KMeansOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            k: KChoice::Fixed(2),
            rounding: Rounding::Sign,
            solver: SolverKind::Auto,
            dense_threshold: 200,
            tol: 1e-8,
            max_iter: 50_000,
            seed: 0,
            kmeans: KMeansOptions::default(),
        }
    }
}

impl SpectralOptions {
    pub fn with_k(mut self, k: KChoice) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub method: Method,
    pub k: usize,
    pub labels: Vec<usize>,
    /// TRCut for the tendency method, RCut (or NCut) for baselines.
    pub objective: f64,
    /// Nontrivial eigenvalues that were computed, ascending.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `n x K` rows: the constant column followed by the `K-1` eigenvectors.
    pub embedding: Vec<Vec<f64>>,
    pub seed: u64,
    pub tendency_report: TendencyReport,
}

impl ClusteringResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.labels {
            sizes[c] += 1;
        }
        sizes
    }

    /// Canonical JSON form; labels are keyed by the graph's external IDs.
    pub fn to_json(&self, g: &Digraph) -> Value {
        let labels: Vec<Value> = self
            .labels
            .iter()
            .enumerate()
            .map(|(v, &c)| json!({ "node": g.label(v), "cluster": c }))
            .collect();
        json!({
            "method": self.method.to_string(),
            "K": self.k,
            "seed": self.seed,
            "eigenvalues": self.eigenvalues,
            "objective": self.objective,
            "cluster_sizes": self.cluster_sizes(),
            "labels": labels,
            "tendency_report": self.tendency_report,
        })
    }

    pub fn write_labels_csv<W: Write>(&self, g: &Digraph, mut out: W) -> Result<()> {
        writeln!(out, "node,cluster")?;
        for (v, &c) in self.labels.iter().enumerate() {
            writeln!(out, "{},{}", g.label(v), c)?;
        }
        Ok(())
    }
}

pub(crate) struct Embedding {
    pub k: usize,
    pub spectrum: Spectrum,
    pub rows: Vec<Vec<f64>>,
}

/// Solves for the nontrivial eigenvectors, picks `K`, and builds the
/// `n x K` embedding.
pub(crate) fn spectral_embedding<O, F>(op: &O, dense: F, deflation: Deflation, opts: &SpectralOptions) -> Result<Embedding>
where
    O: SymmetricOperator + ?Sized,
    F: FnOnce() -> Result<DMatrix<f64>>,
{
    let n = op.dim();
    let eff = n - usize::from(deflation != Deflation::None);
    let (n_vectors, auto) = match opts.k {
        KChoice::Fixed(k) => {
            if k < 2 || k > n {
                return Err(Error::InvalidK { k, n });
            }
            (k - 1, None)
        }
        KChoice::Auto { k_max } => {
            let k_max = k_max.unwrap_or(20).min(eff);
            if k_max < 3 {
                return Err(Error::TooFewEigenvalues(k_max));
            }
            (k_max, Some(k_max))
        }
    };
    if n_vectors > eff {
        return Err(Error::TooManyEigenpairs { k: n_vectors, n: eff });
    }

    let use_dense = match opts.solver {
        SolverKind::Dense => true,
        SolverKind::Lanczos => false,
        SolverKind::Auto => n <= opts.dense_threshold,
    };
    let mut spectrum = if use_dense {
        let full = dense_deflated_eig(&dense()?, &deflation)?;
        Spectrum {
            eigenvalues: full.eigenvalues[..n_vectors].to_vec(),
            eigenvectors: full.eigenvectors[..n_vectors].to_vec(),
            residuals: full.residuals[..n_vectors].to_vec(),
        }
    } else {
        let eig = EigenOptions {
            k: n_vectors,
            deflation: deflation.clone(),
            tol: opts.tol,
            max_iter: opts.max_iter,
            seed: opts.seed,
            krylov_dim: None,
        };
        smallest_eigenpairs(op, &eig)?
    };

    let k = match auto {
        Some(k_max) => eigengap_select(&spectrum.eigenvalues, k_max)?,
        None => n_vectors + 1,
    };
    let constant = match &deflation {
        Deflation::Vector(v) => {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect()
        }
        _ => vec![1.0 / (n as f64).sqrt(); n],
    };
    let rows = (0..n)
        .map(|i| {
            std::iter::once(constant[i])
                .chain(spectrum.eigenvectors[..k - 1].iter().map(|v| v[i]))
                .collect()
        })
        .collect();
    spectrum.eigenvectors.truncate(k - 1);
    Ok(Embedding { k, spectrum, rows })
}

pub(crate) fn round_embedding(emb: &Embedding, rounding: Rounding, opts: &SpectralOptions) -> Result<Partition> {
    let labels = if emb.k == 2 && rounding == Rounding::Sign {
        sign_bipartition(&emb.spectrum.eigenvectors[0])?
    } else {
        let km = kmeans(&emb.rows, emb.k, opts.seed, &opts.kmeans)?;
        canonicalize(&km.labels)
    };
    Partition::with_k(&labels, emb.k)
        .map_err(|e| Error::InvalidPartition(format!("rounding left an empty cluster: {e}")))
}

/// Tendency-aware spectral clustering of a digraph.
pub fn tendency_spectral_clustering(g: &Digraph, opts: &SpectralOptions) -> Result<ClusteringResult> {
    let n = g.node_count();
    if n < 3 {
        return Err(Error::TooSmall { need: 3, got: n });
    }
    let op = TendencyOperator::new(g)?;
    if op.norm_bound() <= 1e-9 {
        return Err(Error::NoTendencyStructure);
    }
    let emb = spectral_embedding(&op, || dense_tendency_laplacian(g, usize::MAX), Deflation::Constant, opts)?;
    let partition = round_embedding(&emb, opts.rounding, opts)?;
    Ok(ClusteringResult {
        method: Method::Tendency,
        k: emb.k,
        objective: trcut_of(g, &partition),
        tendency_report: report_of(g, &partition),
        labels: partition.labels().to_vec(),
        eigenvalues: emb.spectrum.eigenvalues,
        residuals: emb.spectrum.residuals,
        embedding: emb.rows,
        seed: opts.seed,
    })
}
