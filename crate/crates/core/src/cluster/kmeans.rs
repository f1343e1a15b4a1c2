use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the relative inertia change falls below this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            restarts: 20,
            max_iter: 300,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub centroids: Vec<Vec<f64>>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Best of `opts.restarts` Lloyd runs with D^2-weighted seeding. Restart `r`
/// uses a seed derived from `(seed, r)`, so results do not depend on the
/// thread count.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, opts: &KMeansOptions) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let runs: Vec<KMeansResult> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| single_run(points, k, derive_seed(seed, r as u64), opts))
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.inertia < runs[best].inertia {
            best = i;
        }
    }
    Ok(runs.into_iter().nth(best).expect("at least one run"))
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while centers.len() < k {
        let pick = match WeightedIndex::new(&nearest) {
            Ok(dist) => dist.sample(rng),
            // every point coincides with a center: fall back to unchosen indices
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen[pick] = true;
        centers.push(points[pick].clone());
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[pick]));
        }
    }
    centers
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>], labels: &mut [usize], dists: &mut [f64]) {
    for (i, p) in points.iter().enumerate() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(p, center);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        dists[i] = best_d;
    }
}

fn means(points: &[Vec<f64>], labels: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.iter().zip(labels) {
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &cnt) in sums.iter_mut().zip(&counts) {
        if cnt > 0 {
            s.iter_mut().for_each(|x| *x /= cnt as f64);
        }
    }
    (sums, counts)
}

/// Moves the point farthest from its center into each empty cluster.
fn repair_empty(labels: &mut [usize], dists: &mut [f64], counts: &mut [usize]) {
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let far = (0..labels.len())
            .filter(|&i| counts[labels[i]] > 1)
            .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
            .expect("k <= n leaves a donor cluster");
        counts[labels[far]] -= 1;
        labels[far] = empty;
        counts[empty] = 1;
        dists[far] = 0.0;
    }
}

fn single_run(points: &[Vec<f64>], k: usize, seed: u64, opts: &KMeansOptions) -> KMeansResult {
    let n = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus(points, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut previous: Option<Vec<usize>> = None;
    let mut prev_inertia = f64::INFINITY;

    for _ in 0..opts.max_iter.max(1) {
        assign(points, &centers, &mut labels, &mut dists);
        let (_, mut counts) = means(points, &labels, k);
        repair_empty(&mut labels, &mut dists, &mut counts);
        let (new_centers, _) = means(points, &labels, k);
        centers = new_centers;
        let inertia = inertia_of(points, &labels, &centers);
        let stable = previous.as_deref() == Some(&labels[..]);
        let small_change = prev_inertia.is_finite() && (prev_inertia - inertia).abs() <= opts.tol * prev_inertia.max(f64::MIN_POSITIVE);
        if stable || small_change {
            break;
        }
        prev_inertia = inertia;
        previous = Some(labels.clone());
    }
    let inertia = inertia_of(points, &labels, &centers);
    KMeansResult {
        labels,
        inertia,
        centroids: centers,
    }
}

fn inertia_of(points: &[Vec<f64>], labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    points.iter().zip(labels).map(|(p, &c)| sq_dist(p, &centers[c])).sum()
}
