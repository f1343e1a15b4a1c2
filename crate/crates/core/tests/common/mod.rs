#![allow(dead_code)]

use mutuality::*;
use std::result::Result;
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdos-Renyi digraph with an extra chance of reciprocating each edge.
pub fn random_digraph(n: usize, p: f64, recip: f64, seed: u64) -> Digraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random::<f64>() < p {
                edges.push((i, j));
                if rng.random::<f64>() < recip {
                    edges.push((j, i));
                }
            }
        }
    }
    Digraph::from_edges(n, edges).unwrap()
}

pub fn digraph(max_n: usize) -> impl Strategy<Value = Digraph> {
    (2..=max_n, 0.0..0.6f64, 0.0..1.0f64, any::<u64>()).prop_map(|(n, p, r, s)| random_digraph(n, p, r, s))
}

pub fn dense_adjacency(g: &Digraph) -> DMatrix<f64> {
    let n = g.node_count();
    DMatrix::from_fn(n, n, |i, j| if g.has_edge(i, j) { 1.0 } else { 0.0 })
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(TestCaseError::fail(format!($($msg)+)));
        }
    };
}

pub fn census_identities(g: &Digraph) -> Result<(), TestCaseError> {
    let n = g.node_count() as u64;
    let c = dyad_census(g);
    ensure!(c.mutual + c.asymmetric + c.null == n * (n - 1) / 2, "m+b+u != N_d: {c:?}");
    ensure!(2 * c.mutual + c.asymmetric == g.edge_count() as u64, "2m+b != |E|");
    let a = dense_adjacency(g);
    let trace = (&a * &a).trace();
    ensure!(trace == 2.0 * c.mutual as f64, "tr(A^2) = {trace}, 2m = {}", 2 * c.mutual);
    Ok(())
}

pub fn theta_symmetry_and_range(g: &Digraph) -> Result<(), TestCaseError> {
    let n = g.node_count();
    for i in 0..n {
        for j in i + 1..n {
            let a = dyad_tendency(g, i, j).unwrap();
            let b = dyad_tendency(g, j, i).unwrap();
            ensure!(a == b, "theta not symmetric at ({i},{j})");
            ensure!((-1.0..=1.0).contains(&a), "theta out of range: {a}");
        }
    }
    Ok(())
}

pub fn decomposition(g: &Digraph, seed: u64, splits: usize) -> Result<(), TestCaseError> {
    let n = g.node_count();
    let total = graph_tendency(g).unwrap().theta_total;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..splits {
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        labels[0] = 0;
        labels[n - 1] = 1;
        let s: Vec<usize> = (0..n).filter(|&i| labels[i] == 0).collect();
        let sbar: Vec<usize> = (0..n).filter(|&i| labels[i] == 1).collect();
        let parts = cluster_tendency(g, &s).unwrap().theta_total
            + cluster_tendency(g, &sbar).unwrap().theta_total
            + cross_tendency(g, &s).unwrap().theta_total;
        ensure!(close(total, parts, 1e-12), "Theta_G = {total}, parts sum {parts}");
        let report = average_tendency_report(g, &labels).unwrap();
        let sum = report.clusters.iter().map(|c| c.theta_total).sum::<f64>() + report.boundary.theta_total;
        ensure!(close(report.graph.theta_total, sum, 1e-12), "report does not decompose");
    }
    Ok(())
}

/// Dense `L_T` assembled from pairwise tendencies, independent of the library's dense builder.
pub fn pairwise_laplacian(g: &Digraph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let t = dyad_tendency(g, i, j).unwrap();
                l[(i, j)] = -t;
                l[(i, i)] += t;
            }
        }
    }
    l
}

pub fn laplacian_identities(g: &Digraph, seed: u64) -> Result<(), TestCaseError> {
    let n = g.node_count();
    let op = TendencyOperator::new(g).unwrap();
    let dense = pairwise_laplacian(g);
    let lib_dense = dense_tendency_laplacian(g, 10_000).unwrap();
    ensure!((&dense - &lib_dense).amax() <= 1e-12, "dense builders disagree");
    ensure!((&dense - dense.transpose()).amax() == 0.0, "L_T not symmetric");
    let ones = op.apply(&vec![1.0; n]).unwrap();
    ensure!(ones.iter().all(|v| v.abs() <= 1e-10 * n as f64), "L_T 1 != 0");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = op.apply(&x).unwrap();
    let y_dense = &dense * nalgebra::DVector::from_column_slice(&x);
    let scale = y_dense.amax().max(1.0);
    for i in 0..n {
        ensure!((y[i] - y_dense[i]).abs() <= 1e-10 * scale, "matvec mismatch at {i}: {} vs {}", y[i], y_dense[i]);
    }

    let mut pairwise = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pairwise += dyad_tendency(g, i, j).unwrap() * (x[i] - x[j]).powi(2);
        }
    }
    let form = op.bilinear_form(&x).unwrap();
    let quad: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    ensure!(close(form, pairwise, 1e-10), "bilinear {form} vs pairwise {pairwise}");
    ensure!(close(quad, pairwise, 1e-10), "x^T L_T x {quad} vs pairwise {pairwise}");

    // Rayleigh identity for the ratio-cut indicator of a random bipartition
    if n >= 2 {
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        labels[0] = 0;
        labels[n - 1] = 1;
        let s = labels.iter().filter(|&&c| c == 0).count() as f64;
        let sb = n as f64 - s;
        let f: Vec<f64> = labels.iter().map(|&c| if c == 0 { (sb / s).sqrt() } else { -(s / sb).sqrt() }).collect();
        let rq = op.bilinear_form(&f).unwrap();
        let cut = trcut(g, &labels, 2).unwrap();
        ensure!(close(rq, n as f64 * cut, 1e-10), "f^T L_T f = {rq}, n TRCut = {}", n as f64 * cut);
    }
    Ok(())
}

pub fn iterative_matches_dense(g: &Digraph, k: usize, seed: u64) -> Result<(), TestCaseError> {
    let n = g.node_count();
    let op = TendencyOperator::new(g).unwrap();
    if op.norm_bound() < 1e-9 {
        return Ok(());
    }
    let k = k.min(n - 1);
    let dense = dense_deflated_eig(&pairwise_laplacian(g), &Deflation::Constant).unwrap();
    let opts = EigenOptions {
        k,
        tol: 1e-10,
        max_iter: 200_000,
        seed,
        ..Default::default()
    };
    let it = smallest_eigenpairs(&op, &opts).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for q in 0..k {
        let (a, b) = (it.eigenvalues[q], dense.eigenvalues[q]);
        ensure!((a - b).abs() <= 1e-6, "eigenvalue {q}: iterative {a} vs dense {b} (n={n})");
    }
    Ok(())
}
