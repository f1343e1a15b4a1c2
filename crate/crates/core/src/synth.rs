//! Planted-partition digraphs with exact mutual and one-way edge budgets.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::baseline_spectral_clustering;
use crate::cluster::{adjusted_rand_index, tendency_spectral_clustering, Method, SpectralOptions};
use crate::dyad::TendencyReport;
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::seed::derive_seed;

/// How a within-cluster pair is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Pick a node uniformly, then a partner uniformly from its own cluster
    /// (within) or from outside it (across). Each cluster receives a share
    /// of within-cluster edges proportional to its size.
    #[default]
    NodeProportional,
    /// Uniform over all free unordered pairs of the category.
    UniformPairs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct SyntheticSpec {
    pub cluster_sizes: Vec<usize>,
    pub n_mutual_dyads: usize,
    pub n_oneway_edges: usize,
    pub frac_mutual_within: f64,
    pub frac_oneway_across: f64,
    pub seed: u64,
    pub placement: Placement,
}

/// File form: the mutual budget may be given in dyads or in directed edges.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    cluster_sizes: Vec<usize>,
    n_mutual_dyads: Option<usize>,
    n_bidirectional_edges: Option<usize>,
    n_oneway_edges: usize,
    frac_mutual_within: f64,
    frac_oneway_across: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    placement: Placement,
}

impl TryFrom<RawSpec> for SyntheticSpec {
    type Error = String;

    fn try_from(r: RawSpec) -> std::result::Result<Self, String> {
        let n_mutual_dyads = match (r.n_mutual_dyads, r.n_bidirectional_edges) {
            (Some(d), None) => d,
            (None, Some(e)) if e % 2 == 0 => e / 2,
            (None, Some(e)) => return Err(format!("n_bidirectional_edges = {e} is odd")),
            _ => return Err("give exactly one of n_mutual_dyads, n_bidirectional_edges".into()),
        };
        Ok(SyntheticSpec {
            cluster_sizes: r.cluster_sizes,
            n_mutual_dyads,
            n_oneway_edges: r.n_oneway_edges,
            frac_mutual_within: r.frac_mutual_within,
            frac_oneway_across: r.frac_oneway_across,
            seed: r.seed,
            placement: r.placement,
        })
    }
}

impl SyntheticSpec {
    /// 1000 nodes in clusters of 600 and 400; 38000 directed edges of which
    /// 12666 form 6333 mutual dyads (93.5% within) and 25334 are one-way
    /// (80.8% across).
    pub fn two_cluster_reference(seed: u64) -> Self {
        SyntheticSpec {
            cluster_sizes: vec![600, 400],
            n_mutual_dyads: 6333,
            n_oneway_edges: 25334,
            frac_mutual_within: 0.935,
            frac_oneway_across: 0.808,
            seed,
            placement: Placement::NodeProportional,
        }
    }

    /// 1200 nodes in clusters of 500, 400 and 300; 54675 directed edges of
    /// which 27336 form 13668 mutual dyads (90.02% within) and 27339 are
    /// one-way (89.6% across).
    pub fn three_cluster_reference(seed: u64) -> Self {
        SyntheticSpec {
            cluster_sizes: vec![500, 400, 300],
            n_mutual_dyads: 13668,
            n_oneway_edges: 27339,
            frac_mutual_within: 0.9002,
            frac_oneway_across: 0.896,
            seed,
            placement: Placement::NodeProportional,
        }
    }

    pub fn node_count(&self) -> usize {
        self.cluster_sizes.iter().sum()
    }

    pub fn mutual_within(&self) -> usize {
        (self.frac_mutual_within * self.n_mutual_dyads as f64).round() as usize
    }

    pub fn oneway_across(&self) -> usize {
        (self.frac_oneway_across * self.n_oneway_edges as f64).round() as usize
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Planted labels: contiguous blocks in `cluster_sizes` order.
    pub fn planted_labels(&self) -> Vec<usize> {
        self.cluster_sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
            .collect()
    }

    fn slots(&self) -> (u64, u64) {
        let n = self.node_count() as u64;
        let within: u64 = self.cluster_sizes.iter().map(|&s| s as u64 * (s as u64).saturating_sub(1) / 2).sum();
        (within, n * n.saturating_sub(1) / 2 - within)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster_sizes.is_empty() || self.cluster_sizes.contains(&0) {
            return Err(Error::Infeasible("cluster sizes must be positive".into()));
        }
        for (name, value) in [("frac_mutual_within", self.frac_mutual_within), ("frac_oneway_across", self.frac_oneway_across)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        let (within_slots, across_slots) = self.slots();
        let within = (self.mutual_within() + self.n_oneway_edges - self.oneway_across()) as u64;
        let across = (self.n_mutual_dyads - self.mutual_within() + self.oneway_across()) as u64;
        if within > within_slots {
            return Err(Error::Infeasible(format!("{within} within-cluster dyads requested, {within_slots} available")));
        }
        if across > across_slots {
            return Err(Error::Infeasible(format!("{across} cross-cluster dyads requested, {across_slots} available")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlantedGraph {
    pub graph: Digraph,
    pub labels: Vec<usize>,
}

struct Sampler<'a> {
    labels: &'a [usize],
    blocks: Vec<(usize, usize)>,
    placement: Placement,
    taken: HashSet<(usize, usize)>,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    fn pair_key(i: usize, j: usize) -> (usize, usize) {
        (i.min(j), i.max(j))
    }

    /// Weight of a free pair under the placement rule (up to a constant).
    fn weight(&self, i: usize, j: usize, within: bool) -> f64 {
        match self.placement {
            Placement::UniformPairs => 1.0,
            Placement::NodeProportional => {
                let n = self.labels.len();
                let partners = |v: usize| {
                    let s = self.blocks[self.labels[v]].1;
                    if within {
                        s - 1
                    } else {
                        n - s
                    }
                };
                1.0 / partners(i) as f64 + 1.0 / partners(j) as f64
            }
        }
    }

    fn draw(&mut self, within: bool) -> Option<(usize, usize)> {
        let n = self.labels.len();
        match self.placement {
            Placement::NodeProportional => {
                let i = self.rng.random_range(0..n);
                let (start, size) = self.blocks[self.labels[i]];
                if within {
                    if size < 2 {
                        return None;
                    }
                    let mut j = start + self.rng.random_range(0..size - 1);
                    if j >= i {
                        j += 1;
                    }
                    Some((i, j))
                } else {
                    if size == n {
                        return None;
                    }
                    let mut j = self.rng.random_range(0..n - size);
                    if j >= start {
                        j += size;
                    }
                    Some((i, j))
                }
            }
            Placement::UniformPairs => {
                let i = self.rng.random_range(0..n);
                let mut j = self.rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let same = self.labels[i] == self.labels[j];
                (same == within).then_some((i, j))
            }
        }
    }

    fn free_pairs(&self, within: bool) -> Vec<(usize, usize)> {
        let n = self.labels.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if (self.labels[i] == self.labels[j]) == within && !self.taken.contains(&(i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `count` distinct free pairs of one category, successively drawn with
    /// probability proportional to the placement weight.
    fn sample(&mut self, count: usize, within: bool, free: u64) -> Result<Vec<(usize, usize)>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        if count as u64 * 2 > free {
            // weighted sampling without replacement by exponential keys
            let mut keyed: Vec<(f64, (usize, usize))> = self
                .free_pairs(within)
                .into_iter()
                .map(|(i, j)| {
                    let u: f64 = self.rng.random::<f64>().max(f64::MIN_POSITIVE);
                    (u.ln() / self.weight(i, j, within), (i, j))
                })
                .collect();
            keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let picked: Vec<_> = keyed.into_iter().take(count).map(|(_, p)| p).collect();
            self.taken.extend(picked.iter().copied());
            return Ok(picked);
        }
        let budget = 200 * count + 10_000;
        let mut picked = Vec::with_capacity(count);
        let mut attempts = 0;
        while picked.len() < count {
            attempts += 1;
            if attempts > budget {
                return Err(Error::SamplingFailed { attempts });
            }
            let Some((i, j)) = self.draw(within) else { continue };
            if self.taken.insert(Self::pair_key(i, j)) {
                picked.push(Self::pair_key(i, j));
            }
        }
        Ok(picked)
    }
}

/// Generates a digraph whose dyad census matches the spec exactly.
pub fn generate_planted(spec: &SyntheticSpec) -> Result<PlantedGraph> {
    spec.validate()?;
    let n = spec.node_count();
    let labels = spec.planted_labels();
    let mut blocks = Vec::with_capacity(spec.cluster_sizes.len());
    let mut start = 0;
    for &s in &spec.cluster_sizes {
        blocks.push((start, s));
        start += s;
    }
    let mut sampler = Sampler {
        labels: &labels,
        blocks,
        placement: spec.placement,
        taken: HashSet::new(),
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
    };
    let (within_slots, across_slots) = spec.slots();
    let mutual_in = spec.mutual_within();
    let mutual_out = spec.n_mutual_dyads - mutual_in;
    let oneway_out = spec.oneway_across();
    let oneway_in = spec.n_oneway_edges - oneway_out;

    let mut edges = Vec::with_capacity(2 * spec.n_mutual_dyads + spec.n_oneway_edges);
    let mutual_within = sampler.sample(mutual_in, true, within_slots)?;
    let mutual_across = sampler.sample(mutual_out, false, across_slots)?;
    for (i, j) in mutual_within.into_iter().chain(mutual_across) {
        edges.push((i, j));
        edges.push((j, i));
    }
    let oneway_within = sampler.sample(oneway_in, true, within_slots - mutual_in as u64)?;
    let oneway_across = sampler.sample(oneway_out, false, across_slots - mutual_out as u64)?;
    for (i, j) in oneway_within.into_iter().chain(oneway_across) {
        edges.push(if sampler.rng.random::<bool>() { (i, j) } else { (j, i) });
    }
    let graph = Digraph::from_clean_edges(n, edges, (0..n as u64).collect());
    Ok(PlantedGraph { graph, labels })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub repeat: usize,
    pub seed: u64,
    pub method: Method,
    pub k: usize,
    /// `None` when undefined (e.g. a single planted cluster).
    pub ari: Option<f64>,
    pub cluster_sizes: Vec<usize>,
    pub objective: f64,
    pub tendency_report: TendencyReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: usize,
    pub mean_ari: Option<f64>,
    pub min_ari: Option<f64>,
    pub defined_ari_runs: usize,
    /// Mean average tendency per report row (`graph`, `cluster_<k>`, `boundary`).
    pub mean_theta: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub spec: SyntheticSpec,
    pub repeats: usize,
    pub master_seed: u64,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<MethodSummary>,
}

pub fn run_method(g: &Digraph, method: Method, opts: &SpectralOptions) -> Result<crate::cluster::ClusteringResult> {
    match method {
        Method::Tendency => tendency_spectral_clustering(g, opts),
        Method::Baseline(kind) => baseline_spectral_clustering(g, kind, opts),
    }
}

/// Generates `repeats` graphs (seed `derive_seed(master_seed, r)` each),
/// clusters each with every method, and scores against the planted labels.
pub fn planted_ari_experiment(
    spec: &SyntheticSpec,
    methods: &[Method],
    repeats: usize,
    master_seed: u64,
    opts: &SpectralOptions,
) -> Result<ExperimentReport> {
    let per_repeat: Vec<Vec<RunRecord>> = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(master_seed, r as u64);
            let planted = generate_planted(&spec.clone().with_seed(seed))?;
            let single_cluster = spec.cluster_sizes.len() < 2;
            methods
                .iter()
                .map(|&method| {
                    let run_opts = opts.clone().with_seed(seed);
                    let res = run_method(&planted.graph, method, &run_opts)?;
                    let ari = if single_cluster {
                        None
                    } else {
                        adjusted_rand_index(&res.labels, &planted.labels).ok()
                    };
                    Ok(RunRecord {
                        repeat: r,
                        seed,
                        method,
                        k: res.k,
                        ari,
                        cluster_sizes: res.cluster_sizes(),
                        objective: res.objective,
                        tendency_report: res.tendency_report,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let runs: Vec<RunRecord> = per_repeat.into_iter().flatten().collect();
    let summary = methods.iter().map(|&m| summarize(m, &runs)).collect();
    Ok(ExperimentReport {
        spec: spec.clone(),
        repeats,
        master_seed,
        runs,
        summary,
    })
}

fn summarize(method: Method, runs: &[RunRecord]) -> MethodSummary {
    let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.method == method).collect();
    let aris: Vec<f64> = mine.iter().filter_map(|r| r.ari).collect();
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in &mine {
        for (name, stats) in r.tendency_report.rows() {
            if let Some(avg) = stats.theta_avg {
                let e = sums.entry(name).or_default();
                e.0 += avg;
                e.1 += 1;
            }
        }
    }
    MethodSummary {
        method,
        runs: mine.len(),
        mean_ari: (!aris.is_empty()).then(|| aris.iter().sum::<f64>() / aris.len() as f64),
        min_ari: aris.iter().copied().reduce(f64::min),
        defined_ari_runs: aris.len(),
        mean_theta: sums.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect(),
    }
}
