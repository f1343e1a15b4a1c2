mod common;

use common::*;
use mutuality::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reachable(g: &Digraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for s in 0..n {
        let mut stack = vec![s];
        r[s][s] = true;
        while let Some(v) = stack.pop() {
            for &w in g.out_neighbors(v) {
                if !r[s][w] {
                    r[s][w] = true;
                    stack.push(w);
                }
            }
        }
    }
    r
}

fn min_inertia_bruteforce(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&c| counts[c] += 1);
        if counts.iter().all(|&c| c > 0) {
            let mut inertia = 0.0;
            for c in 0..k {
                let members: Vec<&Vec<f64>> = points.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
                let dim = points[0].len();
                let mean: Vec<f64> = (0..dim).map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64).collect();
                inertia += members.iter().map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sum::<f64>();
            }
            best = best.min(inertia);
        }
        // next labeling in base k
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn census_identities_hold(g in digraph(60)) {
        census_identities(&g)?;
    }

    #[test]
    fn tendency_is_symmetric_and_bounded(g in digraph(25)) {
        theta_symmetry_and_range(&g)?;
    }

    #[test]
    fn tendency_decomposes_over_bipartitions(g in digraph(40), seed in any::<u64>()) {
        decomposition(&g, seed, 8)?;
    }

    #[test]
    fn laplacian_identities_hold(g in digraph(40), seed in any::<u64>()) {
        laplacian_identities(&g, seed)?;
    }

    #[test]
    fn scc_matches_mutual_reachability(g in digraph(30)) {
        let scc = strongly_connected_components(&g);
        let r = reachable(&g);
        let n = g.node_count();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(scc.labels[i] == scc.labels[j], r[i][j] && r[j][i]);
            }
        }
        for c in 1..scc.count() {
            prop_assert!(scc.sizes[c - 1] >= scc.sizes[c]);
        }
    }

    #[test]
    fn edge_list_round_trip(g in digraph(30)) {
        prop_assume!(g.edge_count() > 0);
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = load_edge_list(&buf[..], LoadOptions { id_base: IdBase::ZeroBased, ..Default::default() }).unwrap().graph;
        // isolated nodes are not written, so compare edge sets by label
        let a: Vec<(u64, u64)> = g.edges().map(|(i, j)| (g.label(i), g.label(j))).collect();
        let mut b: Vec<(u64, u64)> = back.edges().map(|(i, j)| (back.label(i), back.label(j))).collect();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn relabeling_invariance(g in digraph(30), seed in any::<u64>()) {
        let n = g.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        labels[0] = 0;
        labels[1] = 1;
        if n > 2 { labels[2] = 2; }
        let k = if n > 2 { 3 } else { 2 };
        let perm = [2usize, 0, 1];
        let swapped: Vec<usize> = labels.iter().map(|&c| if k == 3 { perm[c] } else { 1 - c }).collect();
        let a = trcut(&g, &labels, k).unwrap();
        let b = trcut(&g, &swapped, k).unwrap();
        prop_assert!(close(a, b, 1e-12));
        let truth: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let ari_a = adjusted_rand_index(&labels, &truth);
        let ari_b = adjusted_rand_index(&swapped, &truth);
        if let (Ok(x), Ok(y)) = (ari_a, ari_b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn kmeans_matches_exhaustive_search(n in 4usize..=9, k in 2usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..n).map(|i| {
            let c = (i % k) as f64 * 4.0;
            vec![c + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]
        }).collect();
        let best = min_inertia_bruteforce(&pts, k);
        let r = kmeans(&pts, k, seed, &KMeansOptions::default()).unwrap();
        prop_assert!((r.inertia - best).abs() <= 1e-9 * best.max(1.0), "kmeans {} vs optimum {}", r.inertia, best);
        let again = kmeans(&pts, k, seed, &KMeansOptions::default()).unwrap();
        prop_assert_eq!(r, again);
    }

    #[test]
    fn sign_rounding_respects_rayleigh_bound(g in digraph(40), seed in any::<u64>()) {
        let op = TendencyOperator::new(&g).unwrap();
        prop_assume!(g.node_count() >= 3 && op.norm_bound() > 1e-9);
        let opts = SpectralOptions { seed, solver: SolverKind::Dense, ..Default::default() };
        match tendency_spectral_clustering(&g, &opts) {
            Ok(r) => {
                prop_assert!(r.eigenvalues[0] <= r.objective + 1e-10);
                let again = trcut(&g, &r.labels, r.k).unwrap();
                prop_assert!(close(again, r.objective, 1e-10));
                prop_assert_eq!(r.labels.len(), g.node_count());
                prop_assert!(r.cluster_sizes().iter().all(|&s| s > 0));
            }
            Err(Error::OneSigned { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn symmetrized_affinities_are_valid(g in digraph(30)) {
        let n = g.node_count();
        let a = dense_adjacency(&g);
        for kind in [AffinityKind::Average, AffinityKind::Bibliographic, AffinityKind::Cocitation, AffinityKind::Modularity] {
            if kind == AffinityKind::Modularity && g.edge_count() == 0 {
                continue;
            }
            let w = symmetrize(&g, kind).unwrap();
            let dense = w.to_dense();
            prop_assert!((&dense - dense.transpose()).amax() <= 1e-12);
            let expect: DMatrix<f64> = match kind {
                AffinityKind::Average => (&a + a.transpose()) * 0.5,
                AffinityKind::Bibliographic => &a * a.transpose(),
                AffinityKind::Cocitation => a.transpose() * &a,
                _ => {
                    let m = g.edge_count() as f64;
                    let q = DMatrix::from_fn(n, n, |i, j| a[(i, j)] - (g.out_degree(i) * g.in_degree(j)) as f64 / m);
                    (&q + q.transpose()) * 0.5
                }
            };
            prop_assert!((&dense - &expect).amax() <= 1e-12, "{kind} mismatch");
            let lap = standard_laplacian(&w).unwrap();
            let ld = lap.to_dense();
            for i in 0..n {
                prop_assert!(ld.row(i).sum().abs() <= 1e-9);
            }
            if kind.is_nonnegative() {
                let min = dense_symmetric_eig(&ld).unwrap().eigenvalues[0];
                prop_assert!(min >= -1e-10, "{kind}: smallest Laplacian eigenvalue {min}");
            }
        }
    }

    #[test]
    fn circulation_stationarity(g in digraph(25)) {
        let scc = largest_scc(&g).unwrap();
        let h = &scc.graph;
        prop_assume!(h.node_count() >= 2);
        let w = symmetrize(h, AffinityKind::Circulation).unwrap();
        let pi = w.stationary().unwrap();
        prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        for j in 0..h.node_count() {
            let flow: f64 = h.in_neighbors(j).iter().map(|&i| pi[i] / h.out_degree(i) as f64).sum();
            prop_assert!((flow - pi[j]).abs() < 1e-10);
        }
        let degrees = w.degrees();
        for (d, p) in degrees.iter().zip(pi) {
            prop_assert!((d - p).abs() < 1e-12);
        }
    }

    #[test]
    fn cut_objectives_match_pairwise(g in digraph(30), seed in any::<u64>()) {
        let n = g.node_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        labels[0] = 0;
        labels[n - 1] = 1;
        let w = symmetrize(&g, AffinityKind::Average).unwrap();
        let d = w.to_dense();
        let mut cut = 0.0;
        for i in 0..n {
            for j in 0..n {
                if labels[i] == 0 && labels[j] == 1 {
                    cut += d[(i, j)];
                }
            }
        }
        let s = labels.iter().filter(|&&c| c == 0).count() as f64;
        let c = cut_objectives(&w, &labels).unwrap();
        prop_assert!(close(c.cut, cut, 1e-12));
        prop_assert!(close(c.rcut, cut / s + cut / (n as f64 - s), 1e-12));
    }

    #[test]
    fn generator_budgets_are_exact(sizes in prop::collection::vec(2usize..12, 1..4), m in 0usize..20, b in 0usize..20,
                                   fm in 0.0..=1.0f64, fb in 0.0..=1.0f64, seed in any::<u64>(), uniform in any::<bool>()) {
        let spec = SyntheticSpec {
            cluster_sizes: sizes,
            n_mutual_dyads: m,
            n_oneway_edges: b,
            frac_mutual_within: fm,
            frac_oneway_across: fb,
            seed,
            placement: if uniform { Placement::UniformPairs } else { Placement::NodeProportional },
        };
        match generate_planted(&spec) {
            Ok(p) => {
                let c = dyad_census(&p.graph);
                prop_assert_eq!((c.mutual as usize, c.asymmetric as usize), (m, b));
                let mut within_mutual = 0;
                let mut across_oneway = 0;
                for (i, j) in p.graph.edges() {
                    let same = p.labels[i] == p.labels[j];
                    if p.graph.has_edge(j, i) {
                        if same && i < j { within_mutual += 1; }
                    } else if !same {
                        across_oneway += 1;
                    }
                }
                prop_assert_eq!(within_mutual, spec.mutual_within());
                prop_assert_eq!(across_oneway, spec.oneway_across());
                let again = generate_planted(&spec).unwrap();
                prop_assert!(p.graph.edges().eq(again.graph.edges()));
            }
            Err(Error::Infeasible(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lanczos_matches_dense(n in 10usize..=120, p in 0.05..0.4f64, r in 0.0..1.0f64, seed in any::<u64>(), k in 1usize..6) {
        let g = random_digraph(n, p, r, seed);
        iterative_matches_dense(&g, k, seed)?;
    }
}

/// Exhaustive check that the sign-rounded bipartition is a good (not
/// necessarily optimal) TRCut: in the top 20% of all bipartitions on at
/// least 90% of small random instances.
#[test]
fn relaxation_quality_guard() {
    let mut good = 0;
    let mut total = 0;
    for seed in 0..60u64 {
        let n = 6 + (seed % 5) as usize;
        let g = random_digraph(n, 0.35, 0.6, seed);
        if TendencyOperator::new(&g).unwrap().norm_bound() < 1e-9 {
            continue;
        }
        let opts = SpectralOptions { seed, solver: SolverKind::Dense, ..Default::default() };
        let Ok(r) = tendency_spectral_clustering(&g, &opts) else { continue };
        let mut cuts = Vec::new();
        for mask in 1..(1u32 << (n - 1)) {
            let labels: Vec<usize> = (0..n).map(|i| if i + 1 < n && mask >> i & 1 == 1 { 1 } else { 0 }).collect();
            cuts.push(trcut(&g, &labels, 2).unwrap());
        }
        let better = cuts.iter().filter(|&&c| c < r.objective - 1e-12).count();
        total += 1;
        if (better as f64) < 0.2 * cuts.len() as f64 {
            good += 1;
        }
    }
    assert!(total >= 40, "too few usable instances: {total}");
    assert!(good as f64 >= 0.9 * total as f64, "{good}/{total} in the top 20%");
}
