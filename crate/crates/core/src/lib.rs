//! Spectral clustering of directed social graphs that rewards mutual
//! connections beyond what out-degrees alone predict.
//!
//! The central object is the tendency Laplacian `L_T`, built from the
//! dyad-level mutuality tendency `theta_ij = M_ij - d_i d_j / (n-1)^2`.
//! Minimizing the tendency ratio cut (TRCut) over partitions keeps dyads
//! with excess reciprocity inside clusters.

pub mod baseline;
pub mod cluster;
pub mod dyad;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod operator;
pub mod partition;
pub mod report;
pub mod seed;
pub mod synth;

pub use baseline::{
    baseline_spectral_clustering, baseline_spectral_clustering_with, circulation_laplacian, cut_objectives,
    normalized_cut, standard_laplacian, stationary_distribution, symmetrize, AffinityKind, CutKind, CutObjectives,
    Laplacian, SymmetricAffinity,
};
pub use cluster::{
    adjusted_rand_index, kmeans, sign_bipartition, tendency_spectral_clustering, ClusteringResult, KChoice,
    KMeansOptions, KMeansResult, Method, Rounding, SolverKind, SpectralOptions,
};
pub use dyad::{
    average_tendency_report, cluster_tendency, cross_tendency, dyad_census, dyad_tendency, graph_tendency, trcut,
    wolfe_rho, wolfe_rho_graph, DyadCensus, TendencyReport, TendencyStats,
};
pub use eigen::{
    dense_deflated_eig, dense_symmetric_eig, eigengap_select, smallest_eigenpairs, Deflation, EigenOptions, Spectrum,
    SymmetricOperator,
};
pub use error::{Error, Result};
pub use graph::{
    degree_profile, extract_core, induced_subgraph, largest_scc, load_edge_list, read_edge_list_file,
    strongly_connected_components, write_edge_list, CoreMode, DegreeProfile, Digraph, IdBase, LoadOptions,
    LoadedGraph, SccLabels, Subgraph,
};
pub use operator::{dense_tendency_laplacian, write_dense_csv, TendencyOperator, DEFAULT_DENSE_CAP};
pub use partition::{canonicalize, Partition};
pub use synth::{
    generate_planted, planted_ari_experiment, run_method, ExperimentReport, MethodSummary, Placement, PlantedGraph,
    RunRecord, SyntheticSpec,
};
